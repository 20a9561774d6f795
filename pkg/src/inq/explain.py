"""The correction step: explain actual behavior, name the cause, and —
when the program reads input — hand the learner a concrete experiment
that makes the misbehavior happen on their own screen.

Experiments are never guessed. A candidate input queue is executed and
only emitted if the run exhibits exactly the misbehavior the diagnostic
predicts; run_experiment replays it with the same conventions, so the
prediction always matches what the learner will see.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .analysis import ProgramAnalyses, analyze_program
from .inquiry import AnswerJudgment, Question
from .interp import ExecConfig, ExecResult, run
from .lang.ast import (
    BoolOp, Break, Call, Comment, Compare, ForRange, If, IfArm, IntLit, Name,
    Program, StrLit, While, walk,
)
from .lang.printer import expr_source
from .smells import Diagnostic, detect

EXPERIMENT_BUDGET = 10_000
MAX_ATTEMPTS = 200
_LETTERS = "xyzabcdefghijklmnopqrstuvw"

HELP_TOPICS = ("loops", "conditionals", "variables", "types", "io")


def help_text(topic: str) -> str:
    """Bundled offline help for a reference topic key."""
    if topic not in HELP_TOPICS:
        raise KeyError(f"unknown help topic: {topic!r}")
    from importlib import resources
    return resources.files("inq").joinpath("help", f"{topic}.txt") \
        .read_text(encoding="utf-8")


@dataclass(frozen=True)
class Observation:
    kind: str  # "no-termination" | "output" | "error"
    budget: int | None = None
    text: str | None = None
    error_kind: str | None = None

    @classmethod
    def no_termination(cls, budget: int) -> "Observation":
        return cls("no-termination", budget=budget)

    @classmethod
    def output(cls, text: str) -> "Observation":
        return cls("output", text=text)

    @classmethod
    def error(cls, error_kind: str) -> "Observation":
        return cls("error", error_kind=error_kind)

    def describe(self) -> str:
        if self.kind == "no-termination":
            return (f"the program is still running after {self.budget} "
                    "steps — it never finishes")
        if self.kind == "output":
            return f"the program finishes with output {self.text!r}"
        return f"the program stops with an error ({self.error_kind})"


@dataclass(frozen=True)
class Experiment:
    input_queue: tuple[str, ...]
    observation: Observation


@dataclass(frozen=True)
class Explanation:
    summary: str
    cause: str
    experiment: Experiment | None
    reference: str  # help-pack topic key


def explain(question: Question, judgment: AnswerJudgment, program: Program,
            analyses: ProgramAnalyses | None = None) -> Explanation:
    analyses = analyses or analyze_program(program)
    if judgment.verdict == "Correct":
        return Explanation(
            summary=f"Correct — the answer is {judgment.truth}.",
            cause="That is exactly what the analysis concluded.",
            experiment=None, reference=question.topic)
    diagnostic = next(
        (d for d in detect(program, analyses)
         if d.node == question.node and d.rule_id == question.rule_id), None)
    if diagnostic is None:
        raise ValueError("the program no longer carries this diagnostic")
    summary, cause = _template(diagnostic, program, analyses)
    experiment = find_surprise_input(program, diagnostic, analyses=analyses)
    return Explanation(summary=summary, cause=cause, experiment=experiment,
                       reference=question.topic)


# -- templates --------------------------------------------------------------

def _template(d: Diagnostic, program: Program,
              analyses: ProgramAnalyses) -> tuple[str, str]:
    node = next(n for n in walk(program) if n.node_id == d.node)
    line = d.span.start_line
    reads_input = _references_input(program)
    if d.rule_id == "S01":
        if reads_input:
            summary = ("This loop can never exit: the condition is true "
                       "for every possible input.")
        else:
            summary = ("This loop can never exit: the condition is true "
                       "every time it is checked.")
        return summary, _tautology_cause(node.condition)
    if d.rule_id == "S02":
        if isinstance(node, ForRange):
            return ("The loop body never runs: the range on line "
                    f"{line} is empty.",
                    "range() counts from start up to (not including) stop; "
                    "when start does not lie before stop there is nothing "
                    "to count.")
        place = "loop" if isinstance(node, While) else "branch"
        return (f"The {place} body on line {line} never runs: the "
                "condition is false every time it is checked.",
                "The values that can reach this line make the test "
                "impossible to satisfy, so the body is dead code.")
    if d.rule_id == "S03":
        first = next(s for s in node.body if not isinstance(s, Comment))
        word = "break" if isinstance(first, Break) else "return"
        return (f"The loop makes at most one pass: `{word}` is the first "
                "statement of its body.",
                f"`{word}` leaves the loop entirely the first time the "
                "body runs, so the remaining iterations never happen.")
    if d.rule_id == "S04":
        names = d.evidence["unchanged"].split(",")
        listed = ", ".join(f"'{n}'" for n in names)
        them = "it" if len(names) == 1 else "them"
        return (f"Once its body is entered, the loop on line {line} never "
                f"finishes: the condition depends only on {listed} and the "
                f"body never changes {them}.",
                "A while loop re-checks its condition with current values "
                "on every pass; when no statement in the body assigns "
                "those variables, the check gives the same answer forever.")
    if d.rule_id == "S05":
        if d.evidence.get("condition") == "contradiction":
            return (f"The branch on line {line} never runs: its condition "
                    "is false every time it is checked.",
                    "The values that can reach this line make the test "
                    "impossible to satisfy, so the body is dead code.")
        return (f"The branch on line {line} always runs when control "
                "reaches it: the condition cannot be false here.",
                "The values that reach this line already satisfy the "
                "test, so the `if` decides nothing.")
    if d.rule_id == "S06":
        outcome = d.evidence["outcome"]
        return (f"`{expr_source(node)}` is always {outcome}: a Str and an "
                "Int are never equal, even when the characters look like "
                "the number.",
                "input() always produces a Str and int() an Int; `==` "
                "across the two types is False (and `!=` is True) no "
                "matter the content. Convert one side before comparing.")
    if d.rule_id == "S07":
        var = analyses.reaching.use_var[d.node]
        return (f"Running line {line} raises an error: '{var}' has not "
                "been assigned a value.",
                "A name exists only after an assignment to it has "
                f"actually executed, and no path above line {line} "
                f"assigns '{var}'.")
    raise ValueError(f"no explanation template for rule {d.rule_id}")


def _tautology_cause(condition) -> str:
    if isinstance(condition, BoolOp) and condition.op == "or" and \
            all(isinstance(op, Compare) and op.op == "!="
                for op in condition.operands):
        return ("The `or` joins `!=` tests that can never all be false at "
                "once: every value differs from at least one of the "
                "compared options. To wait for a valid answer, join the "
                "tests with `and`.")
    return ("The condition is a tautology here: every value that can "
            "reach it satisfies the test, and nothing in the body can "
            "change that.")


# -- surprise-input search ---------------------------------------------------

def find_surprise_input(program: Program, diagnostic: Diagnostic, *,
                        analyses: ProgramAnalyses | None = None,
                        budget: int = EXPERIMENT_BUDGET,
                        max_attempts: int = MAX_ATTEMPTS,
                        ) -> Experiment | None:
    if not _references_input(program):
        return None
    context = _SiteContext(program, diagnostic)
    if context.target is None:
        return None
    pool = _candidate_pool(program, diagnostic)
    attempts = 0
    for length in (1, 2, 3):
        for combo in itertools.product(range(len(pool)), repeat=length):
            attempts += 1
            if attempts > max_attempts:
                return None
            queue = [pool[i] for i in combo]
            experiment = _try_candidate(program, context, queue, budget)
            if experiment is not None:
                return experiment
    return None


def run_experiment(program: Program, experiment: Experiment) -> Observation:
    """Replay an experiment under the same conventions the engine used to
    verify it: no-termination runs feed the queue cyclically (a learner
    retyping the same answers), everything else uses the queue verbatim."""
    observation = experiment.observation
    queue = list(experiment.input_queue)
    if observation.kind == "no-termination":
        result = run(program, ExecConfig(
            step_budget=observation.budget,
            input_queue=_cycled(queue, observation.budget)))
        return _observe(result, observation.budget)
    result = run(program, ExecConfig(step_budget=EXPERIMENT_BUDGET,
                                     input_queue=queue))
    return _observe(result, EXPERIMENT_BUDGET)


def _observe(result: ExecResult, budget: int) -> Observation:
    code = result.status.code
    if code == "Completed":
        return Observation.output(result.stdout)
    if code == "BudgetExhausted":
        return Observation.no_termination(budget)
    if code == "RuntimeError":
        return Observation.error(result.status.kind)
    return Observation.error(code)


class _SiteContext:
    """Everything _exhibits needs to judge one run: the diagnostic, the
    kind of observation it predicts, and the statement ids that tell dead
    regions from live ones."""

    def __init__(self, program: Program, diagnostic: Diagnostic) -> None:
        self.diagnostic = diagnostic
        self.node = diagnostic.node
        self.arm_owner: If | None = None
        self.arm: IfArm | None = None
        self.loop: While | ForRange | None = None

        rule = diagnostic.rule_id
        if rule == "S06":
            site = _condition_site(program, diagnostic.node)
            if site is None:
                self.target = None
                return
            outcome_true = diagnostic.evidence["outcome"] == "True"
            if isinstance(site, While):
                self.loop = site
                self.node = site.node_id
                self.target = "no-termination" if outcome_true else "output"
                self.live = outcome_true  # True ⇒ body runs forever
            else:
                self.arm = site
                self.arm_owner = _arm_owner(program, site)
                self.target = "output"
                self.live = outcome_true
            return
        node = next(n for n in walk(program) if n.node_id == diagnostic.node)
        if rule in ("S01", "S04"):
            self.target = "no-termination"
        elif rule == "S07":
            self.target = "error"
        elif rule in ("S02", "S05"):
            self.target = "output"
            if isinstance(node, IfArm):
                self.arm = node
                self.arm_owner = _arm_owner(program, node)
                self.live = diagnostic.evidence.get("condition") == "tautology"
            else:
                self.loop = node
                self.live = False
        else:
            self.target = None

    def first_body_ids(self) -> set[int]:
        assert self.arm is not None
        return {st.node_id for st in self.arm.body
                if not isinstance(st, Comment)}

    def after_arm_ids(self) -> set[int]:
        assert self.arm is not None and self.arm_owner is not None
        ids: set[int] = set()
        arms = self.arm_owner.arms
        position = arms.index(self.arm)
        for later in arms[position + 1:]:
            ids |= {sub.node_id for st in later.body for sub in walk(st)}
        for st in self.arm_owner.else_body or []:
            ids |= {sub.node_id for sub in walk(st)}
        return ids


def _try_candidate(program: Program, context: _SiteContext,
                   queue: list[str], budget: int) -> Experiment | None:
    run_queue = queue
    if context.target == "no-termination":
        run_queue = _cycled(queue, budget)
    executed: set[int] = set()
    result = run(program, ExecConfig(step_budget=budget,
                                     input_queue=run_queue),
                 trace=lambda st, env: executed.add(st.node_id))
    observation = _exhibits(context, result, executed, budget)
    if observation is None:
        return None
    if context.target == "no-termination":
        reported = tuple(queue)
    else:
        reported = tuple(run_queue[:result.inputs_consumed])
    return Experiment(input_queue=reported, observation=observation)


def _exhibits(context: _SiteContext, result: ExecResult,
              executed: set[int], budget: int) -> Observation | None:
    d = context.diagnostic
    code = result.status.code
    if context.target == "no-termination":
        if code == "BudgetExhausted" and \
                result.stmt_counts.get(context.node, 0) > 0:
            return Observation.no_termination(budget)
        return None
    if context.target == "error":
        status = result.status
        if code == "RuntimeError" and status.kind == "UnknownName" and \
                status.span == d.span:
            return Observation.error(status.kind)
        return None
    # "output": a completed run that shows the dead (or always-live) region
    if code != "Completed":
        return None
    if context.loop is not None:
        arrived = result.stmt_counts.get(context.node, 0) > 0
        entered = result.loop_counts.get(context.node, 0) > 0
        if arrived and entered == context.live:
            return Observation.output(result.stdout)
        return None
    if context.arm_owner is None or \
            context.arm_owner.node_id not in executed:
        return None
    body_ran = bool(context.first_body_ids() & executed)
    if context.live:
        if body_ran and not (context.after_arm_ids() & executed):
            return Observation.output(result.stdout)
    elif not body_ran:
        return Observation.output(result.stdout)
    return None


def _condition_site(program: Program, expr_id: int):
    """The While or IfArm whose condition contains the expression."""
    for node in walk(program):
        if isinstance(node, (While, IfArm)) and any(
                sub.node_id == expr_id for sub in walk(node.condition)):
            return node
    return None


def _arm_owner(program: Program, arm: IfArm) -> If:
    return next(n for n in walk(program)
                if isinstance(n, If) and arm in n.arms)


def _candidate_pool(program: Program, diagnostic: Diagnostic) -> list[str]:
    pool: list[str] = []
    seen: set[str] = set()

    def add(candidate: str) -> None:
        if candidate not in seen:
            seen.add(candidate)
            pool.append(candidate)

    if diagnostic.rule_id == "S06":
        # The compared literal is the whole point of the experiment:
        # the input that looks equal but is not.
        compare = next(n for n in walk(program)
                       if n.node_id == diagnostic.node)
        if isinstance(compare, Compare):
            for side in (compare.lhs, compare.rhs):
                rendered = _as_input_text(side)
                if rendered is not None:
                    add(rendered)
    add(_fresh_letter(program))
    add("")
    add("0")
    add("1")
    add("-1")
    add(_fresh_letter(program) * 20)
    literals = [n.value for n in walk(program) if isinstance(n, StrLit)]
    for value in literals:
        add(value)
    for value in literals:
        if value.upper() != value:
            add(value.upper())
        if value.lower() != value:
            add(value.lower())
    return pool


def _as_input_text(e) -> str | None:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return e.value
    return None


def _fresh_letter(program: Program) -> str:
    mentioned = set()
    for node in walk(program):
        if isinstance(node, StrLit):
            mentioned.update(node.value)
        elif isinstance(node, Name):
            mentioned.update(node.ident)
    for letter in _LETTERS:
        if letter not in mentioned:
            return letter
    return "x"


def _references_input(program: Program) -> bool:
    return any(isinstance(n, Call) and n.func == "input"
               for n in walk(program))


def _cycled(queue: list[str], budget: int) -> list[str]:
    if not queue:
        return queue
    repeats = budget // len(queue) + 1
    return queue * repeats
