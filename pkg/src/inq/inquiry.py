"""Questions with analysis-backed answers, grading, misconception records.

smells.detect hands over diagnostics; generate_questions turns the
question-worthy ones into at most one question per construct, each
carrying its ground truth (server-side only — the gateway strips it
before anything reaches a client). check_answer grades against that
truth and emits a MisconceptionRecord for every miss. Grading is pure:
callers supply the clock when they need reproducible records.
"""
from __future__ import annotations

import dataclasses
import hashlib
import time
from dataclasses import dataclass

from .analysis import ProgramAnalyses
from .analysis.bounds import IterationBound
from .lang.ast import ForRange, Node, Program, SourceSpan, While, walk
from .lang.printer import expr_source, node_source
from .smells import Diagnostic

QUESTION_KINDS = ("NumericExact", "NumericRange", "MultipleChoice", "YesNo")
VERDICTS = ("Correct", "Incorrect", "TooLoose")


class SchemaMismatch(ValueError):
    """The answer's shape does not fit the question's schema."""


@dataclass
class Question:
    question_id: str
    rule_id: str
    node: int
    kind: str
    prompt: str
    answer_schema: dict
    ground_truth: object  # IterationBound | option index | bool
    topic: str
    span: SourceSpan
    cooldown_key: str


@dataclass(frozen=True)
class MisconceptionRecord:
    category: str
    rule_id: str
    kind: str
    given: object
    truth: str
    ts: int


@dataclass(frozen=True)
class AnswerJudgment:
    verdict: str
    truth: str
    misconception: MisconceptionRecord | None


def node_paths(program: Program) -> dict[int, str]:
    """Structural path of every node: field names and child indices from
    the root. Stable under edits elsewhere in the document, which is what
    lets question ids survive unrelated changes."""
    paths: dict[int, str] = {}

    def visit(node: Node, path: str) -> None:
        paths[node.node_id] = path
        for f in dataclasses.fields(node):
            if f.name in ("span", "node_id"):
                continue
            value = getattr(node, f.name)
            children = value if isinstance(value, list) else [value]
            for i, child in enumerate(children):
                if isinstance(child, Node):
                    visit(child, f"{path}/{f.name}[{i}]")

    visit(program, "")
    return paths


def construct_key(node: Node) -> str:
    """Cooldown fingerprint: the construct's canonical text. Survives the
    construct being moved around the file; dies on any edit inside it."""
    return hashlib.sha256(node_source(node).encode("utf-8")).hexdigest()[:16]


def generate_questions(diagnostics: list[Diagnostic],
                       analyses: ProgramAnalyses, *,
                       cooldown: frozenset[str] | set[str] = frozenset(),
                       ) -> list[Question]:
    program = analyses.program
    paths = node_paths(program)
    nodes = {n.node_id: n for n in walk(program)}
    out: list[Question] = []
    claimed: set[int] = set()
    for d in diagnostics:
        if d.severity != "question-worthy" or d.node in claimed:
            continue
        claimed.add(d.node)
        node = nodes[d.node]
        key = construct_key(node)
        if key in cooldown:
            continue
        question = _build_question(d, node, analyses, paths[d.node], key)
        if question is not None:
            out.append(question)
    return out


def _build_question(d: Diagnostic, node: Node, analyses: ProgramAnalyses,
                    path: str, key: str) -> Question | None:
    line = d.span.start_line
    if d.rule_id in ("S01", "S03", "S04"):
        truth = _loop_truth(d, analyses)
        if truth.kind == "unknown":
            return None  # nothing gradable to ask; stays annotation-only
        kind = "NumericRange"
        prompt = f"How many times will the loop on line {line} iterate?"
        schema = {"type": "numeric-range", "min": 0, "infinite_checkbox": True}
    elif d.rule_id in ("S02", "S05"):
        construct = "loop" if isinstance(node, (While, ForRange)) else "branch"
        kind = "YesNo"
        prompt = f"Will the body of the {construct} on line {line} ever run?"
        schema = {"type": "yes-no"}
        truth = d.evidence.get("condition") == "tautology"
    elif d.rule_id == "S06":
        kind = "MultipleChoice"
        options = ["Always True", "Always False",
                   "Depends on the runtime values"]
        prompt = (f"`{expr_source(node)}` on line {line} compares a Str "
                  "with an Int. What does it evaluate to?")
        schema = {"type": "multiple-choice", "options": options}
        truth = 0 if d.evidence["outcome"] == "True" else 1
    elif d.rule_id == "S07":
        var = analyses.reaching.use_var[d.node]
        kind = "MultipleChoice"
        options = ["0", "'' (empty string)", "error: not yet assigned"]
        prompt = f"When line {line} runs, what is the value of '{var}'?"
        schema = {"type": "multiple-choice", "options": options}
        truth = 2
    else:
        raise ValueError(f"no question template for rule {d.rule_id}")
    qid = hashlib.sha256(
        f"{d.rule_id}|{path}|{node_source(node)}".encode("utf-8")
    ).hexdigest()[:12]
    return Question(
        question_id=qid, rule_id=d.rule_id, node=d.node, kind=kind,
        prompt=prompt, answer_schema=schema, ground_truth=truth,
        topic=d.category, span=d.span, cooldown_key=key)


def _loop_truth(d: Diagnostic, analyses: ProgramAnalyses) -> IterationBound:
    bound = analyses.bound(d.node)
    if d.rule_id == "S04" and bound.kind not in ("exact", "infinite"):
        # S04 already established the loop cannot make progress: once the
        # body is entered the condition never changes again. The honest
        # per-run answer is "0 or forever"; the teachable half is forever.
        return IterationBound.infinite()
    return bound


def check_answer(question: Question, answer: object, *,
                 now_ms: int | None = None) -> AnswerJudgment:
    verdict, truth_text = _grade(question, answer)
    misconception = None
    if verdict != "Correct":
        ts = now_ms if now_ms is not None else time.time_ns() // 1_000_000
        misconception = MisconceptionRecord(
            category=question.topic, rule_id=question.rule_id,
            kind=question.kind, given=answer, truth=truth_text, ts=ts)
    return AnswerJudgment(verdict=verdict, truth=truth_text,
                          misconception=misconception)


def _grade(question: Question, answer: object) -> tuple[str, str]:
    kind = question.kind
    truth = question.ground_truth
    if kind == "NumericRange":
        lo, hi, boxed = _range_answer(answer)
        assert isinstance(truth, IterationBound)
        if truth.kind in ("infinite", "at-least"):
            # at-least only arises from budget exhaustion; the loop never
            # stopped, so the checkbox is the right answer for it too.
            return ("Correct" if boxed else "Incorrect"), truth.describe()
        a, b = (truth.lo, truth.lo) if truth.kind == "exact" else \
            (truth.lo, truth.hi)
        if boxed:
            return "Incorrect", truth.describe()
        if lo <= a and b <= hi:
            if hi - lo <= max(2, b):
                return "Correct", truth.describe()
            return "TooLoose", truth.describe()
        return "Incorrect", truth.describe()
    if kind == "NumericExact":
        value = _count(answer, "answer")
        assert isinstance(truth, IterationBound)
        ok = truth.kind == "exact" and value == truth.lo
        return ("Correct" if ok else "Incorrect"), truth.describe()
    if kind == "MultipleChoice":
        options = question.answer_schema["options"]
        if not _is_count(answer) or answer >= len(options):
            raise SchemaMismatch(
                f"expected an option index in [0, {len(options)})")
        assert isinstance(truth, int)
        return ("Correct" if answer == truth else "Incorrect"), options[truth]
    if kind == "YesNo":
        if not isinstance(answer, bool):
            raise SchemaMismatch("expected true or false")
        assert isinstance(truth, bool)
        return ("Correct" if answer == truth else "Incorrect"), \
            ("yes" if truth else "no")
    raise ValueError(f"unknown question kind {kind!r}")


def _range_answer(answer: object) -> tuple[int, int, bool]:
    if not isinstance(answer, dict):
        raise SchemaMismatch("expected {lo, hi, infinite}")
    extra = set(answer) - {"lo", "hi", "infinite"}
    if extra or set(answer) != {"lo", "hi", "infinite"}:
        raise SchemaMismatch("expected exactly the keys lo, hi, infinite")
    lo = _count(answer["lo"], "lo")
    hi = _count(answer["hi"], "hi")
    if not isinstance(answer["infinite"], bool):
        raise SchemaMismatch("infinite must be a boolean")
    if lo > hi:
        raise SchemaMismatch("lo must not exceed hi")
    return lo, hi, answer["infinite"]


def _is_count(value: object) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and \
        value >= 0


def _count(value: object, label: str) -> int:
    if not _is_count(value):
        raise SchemaMismatch(f"{label} must be a non-negative integer")
    return value
