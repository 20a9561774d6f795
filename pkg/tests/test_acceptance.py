"""Shipping gate: one test per release criterion.

Every criterion gets exactly one test function, so a `pytest -v` run of
this module reads as a pass/fail checklist. The tests deliberately avoid
the engine's own helpers wherever an independent oracle is possible:
observed behaviour comes from traced interpreter runs, classification
from an exhaustive grid, telemetry totals from counters maintained while
the log is being written, and transport payloads from raw bytes.
"""
from __future__ import annotations

import io
import json
import random
import threading
import time
import urllib.request
from collections import Counter
from pathlib import Path

import pytest

from progen import gen_corpus
from test_analysis import observe_arrivals
from test_conditions import _random_condition, cond_of, mirror_classify

from inq.analysis import analyze_program
from inq.analysis.bounds import IterationBound
from inq.analysis.conditions import classify_condition
from inq.analysis.domains import value_covers
from inq.explain import explain
from inq.gateway import InquiryService, make_http_server, serve_stdio
from inq.inquiry import Question, check_answer, generate_questions
from inq.interp import ExecConfig, run
from inq.lang import parse, pretty_print, structurally_equal
from inq.lang.ast import ForRange, SourceSpan, While, walk
from inq.remedy import apply as apply_remedies, exit_assertion, strip_markers
from inq.session import (EVENT_KINDS, EventLog, PrivacyViolation, aggregate,
                         hash_learner, make_event)
from inq.smells import detect

PROMPT_LOOP = (
    'response = input("Please enter (y)es or (n)o")\n'
    "while response != 'y' or response != 'n':\n"
    '    response = input("Please enter (y)es or (n)o")\n'
)

STEPPER = "i = 0\nwhile i < 7:\n    i += 2\nprint(i)\n"

CORPUS_DIR = Path(__file__).parent / "corpus"


def _report(label: str, detail: str) -> None:
    print(f"ACCEPTANCE PASS: {label} — {detail}")


# -- 1. canonical inquiry flow on the prompt loop ----------------------------


def test_criterion_canonical_prompt_loop_flow():
    """The classic y/n prompt loop drives the whole pipeline: one S01
    finding on the while header, an infinite ground truth, a wrong
    bounded answer graded Incorrect, and an experiment whose inputs
    demonstrably never satisfy the loop within a 10000-step budget."""
    started = time.perf_counter()

    result = parse(PROMPT_LOOP)
    assert not result.errors
    program = result.program
    analyses = analyze_program(program)
    diagnostics = detect(program, analyses)

    s01 = [d for d in diagnostics if d.rule_id == "S01"]
    assert len(s01) == 1
    loop = program.statements[1]
    assert isinstance(loop, While)
    assert s01[0].node == loop.node_id
    assert s01[0].span == loop.header_span

    questions = generate_questions(diagnostics, analyses)
    question = next(q for q in questions if q.rule_id == "S01")
    assert question.kind == "NumericRange"
    truth = question.ground_truth
    assert isinstance(truth, IterationBound)
    assert truth.kind == "infinite"

    judgment = check_answer(
        question, {"lo": 0, "hi": 100, "infinite": False}, now_ms=0)
    assert judgment.verdict == "Incorrect"

    explanation = explain(question, judgment, program, analyses)
    experiment = explanation.experiment
    assert experiment is not None
    assert experiment.input_queue
    # The program re-prompts forever, so the experiment's queue repeats
    # for as long as the budget lets the program keep asking.
    queue = tuple(experiment.input_queue) * 10_000
    outcome = run(program, ExecConfig(step_budget=10_000, input_queue=queue))
    assert outcome.status.code == "BudgetExhausted"

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    _report("canonical prompt-loop flow", f"completed in {elapsed:.3f}s")


# -- 2. parser round trip -----------------------------------------------------


def test_criterion_parser_round_trip():
    """parse -> pretty_print -> parse is structure-preserving across the
    hand-written corpus and a generated batch: 600 programs, zero
    mismatches."""
    hand = sorted(CORPUS_DIR.glob("*.nvl"))
    assert len(hand) == 100
    sources = [p.read_text(encoding="utf-8") for p in hand]
    sources += gen_corpus(250, start_seed=21_000)
    sources += gen_corpus(250, start_seed=22_000, smelly=True)
    assert len(sources) == 600

    mismatches = []
    for src in sources:
        first = parse(src)
        assert not first.errors, src
        printed = pretty_print(first.program)
        second = parse(printed)
        assert not second.errors, printed
        if not structurally_equal(first.program, second.program):
            mismatches.append(src)
    assert not mismatches, mismatches[:3]
    _report("parser round trip", f"{len(sources)} programs, 0 mismatches")


# -- 3. analysis soundness vs traced runs ------------------------------------


def test_criterion_analysis_soundness_on_closed_programs():
    """200 closed generated programs, all completing within a 100000-step
    budget: every observed per-arrival iteration count sits inside the
    claimed bound and every concrete value is admitted by the abstract
    value claimed just before its statement."""
    bound_violations: list = []
    interval_violations: list = []
    checked = 0

    for src in gen_corpus(200, start_seed=5100):
        program = parse(src).program
        analyses = analyze_program(program)

        result, arrivals = observe_arrivals(program, budget=100_000)
        assert result.status.code == "Completed", src
        for node in walk(program):
            if not isinstance(node, (While, ForRange)):
                continue
            counts = arrivals[node.node_id]
            assert sum(counts) == result.loop_counts.get(node.node_id, 0)
            bound = analyses.bound(node.node_id)
            if counts and bound.kind == "infinite":
                bound_violations.append((src, node.node_id, "infinite"))
            for observed in counts:
                if not bound.contains(observed):
                    bound_violations.append((src, node.node_id, observed))

        intervals = analyses.intervals

        def check(stmt, env, intervals=intervals, src=src):
            abstract_env = intervals.before.get(stmt.node_id)
            if abstract_env is None:
                interval_violations.append((src, stmt.node_id, "unreachable"))
                return
            for var, value in env.items():
                claimed = abstract_env.get(var)
                if claimed is not None and not value_covers(claimed, value):
                    interval_violations.append((src, stmt.node_id, var, value))

        outcome = run(program, ExecConfig(step_budget=100_000), trace=check)
        assert outcome.status.code == "Completed", src
        checked += 1

    assert checked == 200
    assert not bound_violations, bound_violations[:3]
    assert not interval_violations, interval_violations[:3]
    _report("analysis soundness", "200 closed programs, 0 violations")


# -- 4. classifier agreement with brute force --------------------------------


CONDITION_CATALOG = [
    "response != 'y' or response != 'n'",
    "x == 1 and x == 2",
    "x > 3 and x < 10",
    "True",
    "False",
    "not True",
    "x < 5 or x >= 5",
    "not (x < 5) or x < 6",
    "x == x",
    "x != x",
    "flag or not flag",
    "flag and not flag",
    "s == 'a' or s != 'a'",
    "s == 'a' and s == 'b'",
    "x >= -1",
    "1 == 1",
    "2 < 1",
    "x == 'one' or x == 1",
    # outside the decidable fragment; both sides must say undecided
    "x + 1 > 2",
    "x > 1.5",
    "len(s) > 0",
    "x < y",
    "x < 'a' and x > 0",
]


def test_criterion_classifier_matches_exhaustive_grid():
    """Catalog conditions plus 300 random ones (at most 3 variables and 6
    literals each): the classifier and an independently written
    finite-grid evaluator agree on every verdict."""
    rng = random.Random(414_141)
    texts = list(CONDITION_CATALOG)
    texts += [_random_condition(rng) for _ in range(300)]

    disagreements = []
    for text in texts:
        cond = cond_of(text)
        expected = mirror_classify(cond)
        actual = classify_condition(cond).value
        if actual != expected:
            disagreements.append((text, actual, expected))
    assert not disagreements, disagreements[:5]
    _report("classifier agreement",
            f"{len(texts)} conditions, 0 disagreements")


# -- 5. remedy transparency ---------------------------------------------------


def _stepping_programs(count: int) -> list[str]:
    """Counting loops in both directions, strict and non-strict, with a
    finite exit interval — exactly the shape the assertion synthesizer
    targets."""
    rng = random.Random(7_0007)
    out: list[str] = []
    while len(out) < count:
        a = rng.randrange(0, 6)
        step = rng.randrange(1, 4)
        b = a + rng.randrange(1, 20)
        var = rng.choice(["i", "j", "n", "total"])
        lines = []
        if rng.random() < 0.4:
            lines.append(f"base = {rng.randrange(0, 9)}")
        if rng.random() < 0.5:
            op = "<" if rng.random() < 0.5 else "<="
            lines += [f"{var} = {a}",
                      f"while {var} {op} {b}:",
                      f"    {var} += {step}"]
        else:
            op = ">" if rng.random() < 0.5 else ">="
            lines += [f"{var} = {b}",
                      f"while {var} {op} {a}:",
                      f"    {var} -= {step}"]
        lines.append(f"print({var})")
        if rng.random() < 0.3:
            lines.append(f"print({var} * 2)")
        out.append("\n".join(lines) + "\n")
    return out


def test_criterion_remedy_transparency():
    """100 programs with synthesized loop-exit assertions that hold:
    inserting them changes neither stdout nor the final environment, and
    stripping the markers restores the original source byte for byte."""
    compared = 0
    for src in _stepping_programs(100):
        program = parse(src).program
        analyses = analyze_program(program)
        loop = next(n for n in walk(program) if isinstance(n, While))
        pack = exit_assertion(analyses, loop.node_id)
        assert any(r.kind == "Assertion" for r in pack), src

        remedied = apply_remedies(src, pack)
        cfg = ExecConfig(step_budget=100_000)
        base = run(program, cfg)
        treated = run(parse(remedied).program, cfg)

        assert base.status.code == "Completed", src
        assert treated.status.code == "Completed", (src, remedied)
        assert treated.stdout == base.stdout, (src, remedied)
        assert treated.final_env == base.final_env, (src, remedied)
        assert strip_markers(remedied, show=False) == src
        assert strip_markers(remedied, show=True) == remedied
        compared += 1
    assert compared == 100
    _report("remedy transparency", "100 programs, 0 observable differences")


# -- 6. grading contract ------------------------------------------------------


def _range_question(truth: IterationBound) -> Question:
    span = SourceSpan(start_offset=0, end_offset=0, start_line=1,
                      start_col=1, end_line=1, end_col=1)
    return Question(
        question_id="acceptquestn", rule_id="S01", node=0,
        kind="NumericRange", prompt="How many times?",
        answer_schema={"type": "numeric-range", "min": 0,
                       "infinite_checkbox": True},
        ground_truth=truth, topic="loops", span=span,
        cooldown_key="acceptancekey000")


def test_criterion_grading_contract_exhaustive():
    """Range grading, checked against the written rules for every truth
    n <= 20 and every answer 0 <= lo <= hi <= 40 with and without the
    infinite box: containment decides correctness, the box on a finite
    truth is wrong, and a containing answer wider than max(2, n) is
    TooLoose rather than Correct."""
    checked = 0
    for n in range(21):
        question = _range_question(IterationBound.exact(n))
        for lo in range(41):
            for hi in range(lo, 41):
                for boxed in (False, True):
                    verdict = check_answer(
                        question, {"lo": lo, "hi": hi, "infinite": boxed},
                        now_ms=0).verdict
                    if boxed:
                        expected = "Incorrect"
                    elif lo <= n <= hi:
                        expected = ("Correct" if hi - lo <= max(2, n)
                                    else "TooLoose")
                    else:
                        expected = "Incorrect"
                    assert verdict == expected, (n, lo, hi, boxed, verdict)
                    checked += 1

    question = _range_question(IterationBound.infinite())
    for lo in range(41):
        for hi in range(lo, 41):
            for boxed in (False, True):
                verdict = check_answer(
                    question, {"lo": lo, "hi": hi, "infinite": boxed},
                    now_ms=0).verdict
                assert verdict == ("Correct" if boxed else "Incorrect")
                checked += 1
    _report("grading contract", f"{checked} exhaustive cases")


# -- 7. telemetry reconciliation ----------------------------------------------


def test_criterion_telemetry_reconciliation(tmp_path):
    """A 1000-event synthetic log aggregates to exactly the totals kept
    by independent counters while writing it; a payload carrying the
    clear-text learner id is rejected before anything hits the disk."""
    rng = random.Random(990_917)
    path = tmp_path / "events.ndjson"
    log = EventLog(path)

    session_ids = [f"{k:032x}" for k in (0xA1, 0xB2, 0xC3, 0xD4)]
    learner_hash = "f" * 16
    categories = ["loops", "conditionals", "variables", "types"]
    rules = ["S01", "S02", "S05", "S06", "S07"]
    kinds_of_question = ["NumericRange", "YesNo", "MultipleChoice"]

    expected_cat: Counter = Counter()
    expected_rule: Counter = Counter()
    answered: dict[str, list[int]] = {}
    used_sessions: set[str] = set()
    ts_seen: list[int] = []

    ts = 1_700_000_000_000
    for _ in range(1000):
        ts += rng.randrange(1, 500)
        kind = rng.choice(EVENT_KINDS)
        sid = rng.choice(session_ids)
        payload: dict = {"seq": len(ts_seen)}
        if kind == "question-answered":
            verdict = rng.choice(["Correct", "Incorrect", "TooLoose"])
            category = rng.choice(categories)
            rule = rng.choice(rules)
            qkind = rng.choice(kinds_of_question)
            payload = {"verdict": verdict, "category": category,
                       "rule_id": rule, "question_kind": qkind}
            tally = answered.setdefault(qkind, [0, 0])
            tally[1] += 1
            if verdict == "Correct":
                tally[0] += 1
            else:
                expected_cat[category] += 1
                expected_rule[rule] += 1
        log.log_event(make_event(sid, learner_hash, kind, payload, ts=ts))
        used_sessions.add(sid)
        ts_seen.append(ts)

    report = aggregate(path)
    assert report.events == 1000
    assert report.unknown_kinds == 0
    assert report.malformed == []
    assert report.per_category == dict(sorted(expected_cat.items()))
    assert report.per_rule == dict(sorted(expected_rule.items()))
    assert report.sessions == len(used_sessions)
    assert report.window == (min(ts_seen), max(ts_seen))
    for qkind, (correct, total) in answered.items():
        assert report.correctness_rate[qkind] == pytest.approx(
            correct / total)

    clear_id = "casey.novak@example.edu"
    guarded = EventLog(path, learner_id=clear_id)
    with pytest.raises(PrivacyViolation):
        guarded.log_event(make_event(
            session_ids[0], hash_learner(clear_id, "pepper"), "edit",
            {"note": f"{clear_id} pressed undo"}, ts=ts + 1))
    assert aggregate(path).events == 1000  # the rejected line never landed
    _report("telemetry reconciliation",
            "1000 events reconciled; clear-text id rejected")


# -- 8. transport equivalence -------------------------------------------------


def _fresh_service() -> InquiryService:
    return InquiryService(clock=lambda: 0)


def _scripted_requests() -> list[dict]:
    """A 12-step session: probe one service in-process for the ids the
    later steps need, then freeze the request list."""
    probe = _fresh_service()
    analyzed = probe.call("analyze", {"source": PROMPT_LOOP})
    question_id = next(a["question_id"] for a in analyzed["annotations"]
                       if "question_id" in a)
    probe.call("question.get", {"question_id": question_id})
    answer = {"lo": 0, "hi": 100, "infinite": False}
    answered = probe.call("question.answer",
                          {"question_id": question_id, "answer": answer})
    experiment = answered["explanation"]["experiment"]
    assert experiment is not None
    inputs = list(experiment["input_queue"]) * 10_000
    marked = probe.call("remedy.apply",
                        {"question_id": question_id})["new_source"]

    steps = [
        ("version", {}),
        ("analyze", {"source": PROMPT_LOOP}),
        ("question.get", {"question_id": question_id}),
        ("question.answer", {"question_id": question_id, "answer": answer}),
        ("run", {"source": PROMPT_LOOP, "inputs": inputs, "budget": 10_000}),
        ("remedy.apply", {"question_id": question_id}),
        ("remedy.toggle", {"show": False}),
        ("remedy.toggle", {"show": True}),
        ("analyze", {"source": marked}),
        ("help.get", {"topic": "loops"}),
        ("event.log", {"kind": "edit", "payload": {"chars": 3}}),
        ("run", {"source": STEPPER, "inputs": [], "budget": 100_000}),
    ]
    return [{"id": k, "method": method, "params": params}
            for k, (method, params) in enumerate(steps, start=1)]


def test_criterion_transport_equivalence():
    """The same 12-step scripted session, replayed over stdio and over
    HTTP against identically configured services, yields byte-identical
    response lines for every step."""
    script = _scripted_requests()
    assert len(script) == 12

    stdin = io.StringIO("\n".join(json.dumps(r) for r in script) + "\n")
    stdout = io.StringIO()
    serve_stdio(_fresh_service(), stdin, stdout)
    stdio_lines = stdout.getvalue().splitlines()
    assert len(stdio_lines) == 12

    server = make_http_server(_fresh_service(), 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        port = server.server_address[1]
        for request, stdio_line in zip(script, stdio_lines):
            parsed_line = json.loads(stdio_line)
            assert parsed_line["id"] == request["id"]
            assert "result" in parsed_line and "error" not in parsed_line
            http_request = urllib.request.Request(
                f"http://127.0.0.1:{port}/rpc",
                data=json.dumps(request).encode("utf-8"),
                headers={"Content-Type": "application/json"}, method="POST")
            with urllib.request.urlopen(http_request) as response:
                assert response.status == 200
                assert response.read() == stdio_line.encode("utf-8")
    finally:
        server.shutdown()
        server.server_close()
    _report("transport equivalence", "12 steps byte-identical")
