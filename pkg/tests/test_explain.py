"""Explanation and surprise-experiment tests.

The load-bearing property is the verified-prediction invariant: every
emitted experiment, replayed through run_experiment, reproduces its
predicted observation exactly.
"""

import pytest

from inq.analysis import analyze_program
from inq.explain import (
    Experiment, Observation, explain, find_surprise_input, run_experiment,
)
from inq.inquiry import check_answer, generate_questions
from inq.lang.parser import parse
from inq.smells import CATEGORIES, detect

PROMPT_LOOP = (
    'response = input("Please enter (y)es or (n)o")\n'
    "while response != 'y' or response != 'n':\n"
    '    response = input("Please enter (y)es or (n)o")\n'
)


def setup(source):
    result = parse(source)
    assert not result.errors, result.errors
    analyses = analyze_program(result.program)
    diags = detect(result.program, analyses)
    questions = generate_questions(diags, analyses)
    return result.program, analyses, diags, questions


def wrong_answer_for(question):
    if question.kind == "NumericRange":
        return {"lo": 0, "hi": 0, "infinite": False} \
            if question.ground_truth.kind != "exact" or \
            question.ground_truth.lo != 0 \
            else {"lo": 5, "hi": 5, "infinite": False}
    if question.kind == "MultipleChoice":
        return (question.ground_truth + 1) % \
            len(question.answer_schema["options"])
    return not question.ground_truth


def explained(source, rule_id=None):
    program, analyses, diags, questions = setup(source)
    if rule_id is not None:
        question = next(q for q in questions if q.rule_id == rule_id)
    else:
        assert len(questions) == 1
        question = questions[0]
    judgment = check_answer(question, wrong_answer_for(question), now_ms=1)
    assert judgment.verdict != "Correct"
    return program, question, explain(question, judgment, program, analyses)


# -- the flagship example ----------------------------------------------------


def test_prompt_loop_explanation():
    program, question, result = explained(PROMPT_LOOP)
    assert result.summary == ("This loop can never exit: the condition is "
                              "true for every possible input.")
    assert "`or`" in result.cause and "`and`" in result.cause
    assert result.reference == "loops"
    assert result.experiment is not None
    assert result.experiment.input_queue == ("x",)
    assert result.experiment.observation.kind == "no-termination"


def test_prompt_loop_experiment_replays():
    program, question, result = explained(PROMPT_LOOP)
    replay = run_experiment(program, result.experiment)
    assert replay == result.experiment.observation


# -- per-rule explanations ---------------------------------------------------


def test_dead_while_has_no_experiment():
    program, question, result = explained("i = 5\nwhile i < 3:\n    i = i + 1\n")
    assert "never runs" in result.summary
    assert result.experiment is None  # closed program: nothing to type


def test_empty_range_mentions_range():
    program, question, result = explained("for i in range(5, 2):\n    print(i)\n")
    assert "range" in result.summary + result.cause


def test_break_first_explanation():
    program, question, result = explained("while True:\n    break\n")
    assert "`break`" in result.summary
    assert "one pass" in result.summary


def test_stuck_guard_explanation_and_experiment():
    src = "x = int(input())\nwhile x > 0:\n    print(x)\n"
    program, question, result = explained(src)
    assert "never" in result.summary
    assert "'x'" in result.summary
    assert result.experiment is not None
    assert result.experiment.input_queue == ("1",)
    assert result.experiment.observation.kind == "no-termination"
    assert run_experiment(program, result.experiment) == \
        result.experiment.observation


def test_cross_type_experiment_uses_the_compared_literal():
    src = ("x = int(input())\nif x == '5':\n    print('match')\n"
           "print('done')\n")
    program, question, result = explained(src, rule_id="S06")
    assert "never equal" in result.summary
    experiment = result.experiment
    assert experiment is not None
    assert experiment.input_queue == ("5",)
    assert experiment.observation == Observation.output("done\n")
    assert run_experiment(program, experiment) == experiment.observation


def test_unassigned_read_experiment_reaches_the_guard():
    src = "c = input()\nif c == 'go':\n    print(y)\nprint('ok')\n"
    program, question, result = explained(src, rule_id="S07")
    experiment = result.experiment
    assert experiment is not None
    assert experiment.input_queue == ("go",)
    assert experiment.observation == Observation.error("UnknownName")
    assert run_experiment(program, experiment) == experiment.observation


def test_two_input_search_when_one_line_is_not_enough():
    src = ("a = input()\nb = input()\nif a == 'go':\n    print(z)\n"
           "print('ok')\n")
    program, analyses, diags, questions = setup(src)
    diagnostic = next(d for d in diags if d.rule_id == "S07")
    experiment = find_surprise_input(program, diagnostic, analyses=analyses)
    assert experiment is not None
    assert len(experiment.input_queue) == 2
    assert experiment.input_queue[0] == "go"
    assert experiment.observation == Observation.error("UnknownName")
    assert run_experiment(program, experiment) == experiment.observation


def test_tautological_elif_experiment_shows_the_branch_running():
    src = ("x = int(input())\nif x > 0:\n    print(1)\n"
           "elif x <= 0:\n    print(2)\n")
    program, question, result = explained(src, rule_id="S05")
    experiment = result.experiment
    assert experiment is not None
    assert experiment.observation.kind == "output"
    assert run_experiment(program, experiment) == experiment.observation


def test_dead_loop_confirmation_on_open_program():
    src = "x = input()\nwhile x == 3:\n    print(x)\nprint('end')\n"
    program, analyses, diags, questions = setup(src)
    diagnostic = next(d for d in diags if d.rule_id == "S02")
    experiment = find_surprise_input(program, diagnostic, analyses=analyses)
    assert experiment is not None
    assert experiment.observation == Observation.output("end\n")
    assert run_experiment(program, experiment) == experiment.observation


# -- contracts ---------------------------------------------------------------


def test_correct_answers_get_a_confirmation():
    program, analyses, diags, questions = setup(PROMPT_LOOP)
    question = questions[0]
    judgment = check_answer(
        question, {"lo": 0, "hi": 0, "infinite": True}, now_ms=1)
    assert judgment.verdict == "Correct"
    result = explain(question, judgment, program, analyses)
    assert result.summary.startswith("Correct")
    assert result.experiment is None
    assert result.cause


TRIGGERS = {
    "S01": PROMPT_LOOP,
    "S02": "i = 5\nwhile i < 3:\n    i = i + 1\n",
    "S03": "while True:\n    break\n",
    "S04": "x = int(input())\nwhile x > 0:\n    print(x)\n",
    "S05": "x = 7\nif x > 0:\n    print(x)\n",
    "S06": "x = input()\nif x == 3:\n    print('hi')\n",
    "S07": "print(y)\n",
}


@pytest.mark.parametrize("rule_id,src", sorted(TRIGGERS.items()))
def test_template_totality(rule_id, src):
    program, question, result = explained(src, rule_id=rule_id)
    assert result.summary.strip()
    assert result.cause.strip()
    assert result.reference in CATEGORIES


def test_explanations_are_deterministic():
    first = explained(PROMPT_LOOP)[2]
    second = explained(PROMPT_LOOP)[2]
    assert first == second


def test_search_determinism_and_verified_predictions():
    sources = [
        PROMPT_LOOP,
        "x = int(input())\nwhile x > 0:\n    print(x)\n",
        "x = input()\nif x == 3:\n    print('hi')\nprint('bye')\n",
        "c = input()\nif c == 'go':\n    print(y)\nprint('ok')\n",
        "x = input()\nwhile x == 3:\n    print(x)\nprint('end')\n",
    ]
    for src in sources:
        program, analyses, diags, questions = setup(src)
        for diagnostic in diags:
            if diagnostic.severity != "question-worthy":
                continue
            first = find_surprise_input(program, diagnostic,
                                        analyses=analyses)
            second = find_surprise_input(program, diagnostic,
                                         analyses=analyses)
            assert first == second
            if first is not None:
                assert run_experiment(program, first) == first.observation


def test_experiment_queue_is_trimmed_to_consumed_inputs():
    # three inputs available in the pool but only two are ever read
    src = "a = input()\nif a == 'go':\n    print(z)\nprint('ok')\n"
    program, analyses, diags, questions = setup(src)
    diagnostic = next(d for d in diags if d.rule_id == "S07")
    experiment = find_surprise_input(program, diagnostic, analyses=analyses)
    assert experiment is not None
    assert len(experiment.input_queue) == 1
