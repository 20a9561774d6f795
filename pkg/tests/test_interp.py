"""Interpreter semantics, pinned against hand-traced oracles.

Every expected value in here was worked out on paper first (step counts,
loop counts, floor-division results) or is a direct consequence of the
documented semantics; the interpreter is the thing under test, so nothing
below is derived from its own output.
"""
import pytest

from inq.interp import ExecConfig, ExecResult, run
from inq.lang import parse

IV_SNIPPET = (
    'response = input("Please enter (y)es or (n)o")\n'
    "while response != 'y' or response != 'n':\n"
    '    response = input("Please enter (y)es or (n)o")\n'
)


def go(source: str, inputs=(), budget: int = 100_000, max_out: int = 65_536,
       trace=None) -> ExecResult:
    result = parse(source)
    assert result.ok, [str(e) for e in result.errors]
    cfg = ExecConfig(step_budget=budget, input_queue=list(inputs),
                     max_output_bytes=max_out)
    return run(result.program, cfg, trace)


def test_print_arithmetic():
    r = go("print(1 + 2)")
    assert r.status.code == "Completed"
    assert r.stdout == "3\n"


def test_iv_snippet_loops_until_budget():
    r = go(IV_SNIPPET, inputs=["x"] * 10_000, budget=10_000)
    assert r.status.code == "BudgetExhausted"
    assert r.steps_used == 10_000
    while_id = parse(IV_SNIPPET).program.statements[1].node_id
    assert r.loop_counts[while_id] >= 1
    # y is no escape either: both != arms can't be false at once.
    r2 = go(IV_SNIPPET, inputs=["y"] * 10_000, budget=10_000)
    assert r2.status.code == "BudgetExhausted"


def test_while_hand_trace():
    # i=0 -> 2 -> 4 -> 6 -> 8; 4 body entries; steps: 1 assign + 5 condition
    # evaluations + 4 body statements = 10.
    src = "i = 0\nwhile i < 7:\n    i += 2"
    r = go(src)
    assert r.status.code == "Completed"
    assert r.final_env["i"] == 8
    while_id = parse(src).program.statements[1].node_id
    assert r.loop_counts[while_id] == 4
    assert r.steps_used == 10


def test_floor_division_semantics():
    r = go("print(7 // 2)\nprint(-7 // 2)\nprint(7 % -2)\nprint(-7 % 2)\nprint(7 / 2)")
    assert r.stdout == "3\n-4\n-1\n1\n3.5\n"


def test_division_yields_float_always():
    r = go("print(8 / 2)")
    assert r.stdout == "4.0\n"


@pytest.mark.parametrize("src,kind", [
    ("x = 1 // 0", "DivisionByZero"),
    ("x = 1 % 0", "DivisionByZero"),
    ("x = 1 / 0", "DivisionByZero"),
    ("x = 1.5 / 0.0", "DivisionByZero"),
    ("x = 9223372036854775807 + 1", "IntOverflow"),
    ("x = -9223372036854775807 - 2", "IntOverflow"),
    ("x = 3037000500 * 3037000500", "IntOverflow"),
    ("x = 1 < 'a'", "TypeMismatch"),
    ("x = 'a' - 'b'", "TypeMismatch"),
    ("x = 'a' + 1", "TypeMismatch"),
    ("x = True + True", "TypeMismatch"),
    ("x = True < False", "TypeMismatch"),
    ("x = -'a'", "TypeMismatch"),
    ("x = not 1", "TypeMismatch"),
    ("x = True and 1", "TypeMismatch"),
    ("if 1:\n    pass", "TypeMismatch"),
    ("while 'y':\n    pass", "TypeMismatch"),
    ("x = int('abc')", "BadIntParse"),
    ("x = int('')", "BadIntParse"),
    ("x = int('12.5')", "BadIntParse"),
    ("x = int('99999999999999999999')", "IntOverflow"),
    ("print(y)", "UnknownName"),
    ("y += 1", "UnknownName"),
    ("x = len(5)", "TypeMismatch"),
    ("x = range(5)", "TypeMismatch"),
    ("for i in range('a'):\n    pass", "TypeMismatch"),
    ("for i in range(0, 5, 0):\n    pass", "TypeMismatch"),
])
def test_runtime_error_kinds(src, kind):
    r = go(src)
    assert r.status.code == "RuntimeError"
    assert r.status.kind == kind
    assert r.status.span is not None


def test_cross_type_equality_is_false_not_error():
    r = go("print(1 == 'a')\nprint(1 != 'a')\nprint(True == 1)\nprint(1 == 1.0)")
    assert r.stdout == "False\nTrue\nFalse\nTrue\n"


def test_short_circuit_skips_rhs():
    r = go("x = False and 1 // 0 == 0\ny = True or 1 // 0 == 0\nprint(x, y)")
    assert r.status.code == "Completed"
    assert r.stdout == "False True\n"


def test_input_prompt_not_echoed():
    r = go('name = input("who? ")\nprint("hi", name)', inputs=["sam"])
    assert r.stdout == "hi sam\n"
    assert r.inputs_consumed == 1


def test_input_exhausted():
    r = go("x = input()", inputs=[])
    assert r.status.code == "InputExhausted"
    assert r.status.span is not None


def test_assertion_failed_with_message():
    r = go("assert 1 == 2, 'boom'")
    assert r.status.code == "AssertionFailed"
    assert r.status.message == "boom"
    r2 = go("assert False")
    assert r2.status.code == "AssertionFailed"
    assert r2.status.message == ""


def test_assertion_transparency():
    with_asserts = "x = 3\nassert x == 3, 'sanity'\nprint(x * 2)\nassert x < 10"
    without = "x = 3\nprint(x * 2)"
    a = go(with_asserts)
    b = go(without)
    assert a.status.code == b.status.code == "Completed"
    assert a.stdout == b.stdout
    assert a.final_env == b.final_env


def test_output_truncation():
    r = go("while True:\n    print('aaaaaaaaaa')", max_out=64)
    assert r.status.code == "OutputTruncated"
    assert len(r.stdout.encode()) <= 64


def test_budget_exhausted_exactly_at_budget():
    r = go("while True:\n    pass", budget=17)
    assert r.status.code == "BudgetExhausted"
    assert r.steps_used == 17


def test_budget_monotonicity():
    src = "i = 0\nwhile i < 7:\n    i += 2\nprint(i)"
    tight = go(src, budget=11)  # 10 loop steps + 1 print
    assert tight.status.code == "Completed"
    roomy = go(src, budget=100_000)
    assert roomy.status == tight.status
    assert roomy.stdout == tight.stdout
    assert roomy.final_env == tight.final_env
    assert roomy.steps_used == tight.steps_used


def test_determinism():
    src = "x = int(input())\nprint(x * x)"
    a = go(src, inputs=["12"])
    b = go(src, inputs=["12"])
    assert a == b


def test_for_range_variants():
    r = go("for i in range(5):\n    print(i)")
    assert r.stdout == "0\n1\n2\n3\n4\n"
    assert r.final_env["i"] == 4

    r = go("total = 0\nfor i in range(2, 10, 3):\n    total += i\nprint(total)")
    assert r.stdout == "15\n"  # 2 + 5 + 8

    r = go("for i in range(5, 0, -2):\n    print(i)")
    assert r.stdout == "5\n3\n1\n"

    r = go("for i in range(3, 3):\n    print(i)\nprint('done')")
    assert r.stdout == "done\n"

    # Zero iterations never binds the variable.
    r = go("for i in range(0):\n    pass\nprint(i)")
    assert r.status.code == "RuntimeError"
    assert r.status.kind == "UnknownName"


def test_for_range_step_counting():
    # for over range(3): 1 header + 4 iteration checks + 3 body = 8 steps.
    r = go("for i in range(3):\n    pass")
    assert r.steps_used == 8
    prog = parse("for i in range(3):\n    pass").program
    assert r.loop_counts[prog.statements[0].node_id] == 3


def test_break_and_continue():
    r = go("while True:\n    break\nprint('out')")
    assert r.stdout == "out\n"
    prog = parse("while True:\n    break\nprint('out')").program
    assert r.loop_counts[prog.statements[0].node_id] == 1

    r = go("for i in range(6):\n    if i % 2 == 0:\n        continue\n    print(i)")
    assert r.stdout == "1\n3\n5\n"

    r = go("for i in range(10):\n    if i == 3:\n        break\nprint(i)")
    assert r.stdout == "3\n"


def test_nested_loop_counts_accumulate():
    src = "for i in range(3):\n    for j in range(2):\n        pass"
    r = go(src)
    prog = parse(src).program
    outer = prog.statements[0]
    inner = outer.body[0]
    assert r.loop_counts[outer.node_id] == 3
    assert r.loop_counts[inner.node_id] == 6


def test_loop_header_reached_gets_entry_even_at_zero():
    src = "while False:\n    print('never')"
    r = go(src)
    prog = parse(src).program
    assert r.loop_counts[prog.statements[0].node_id] == 0


def test_functions_basic_and_recursion():
    src = ("def add(a, b):\n"
           "    return a + b\n"
           "def fact(n):\n"
           "    if n <= 1:\n"
           "        return 1\n"
           "    return n * fact(n - 1)\n"
           "print(add(2, 3))\n"
           "print(fact(10))")
    r = go(src)
    assert r.stdout == "5\n3628800\n"


def test_function_scope_is_python_like():
    src = ("g = 10\n"
           "def f(x):\n"
           "    local = x + g\n"
           "    return local\n"
           "print(f(1))\n"
           "print(g)")
    r = go(src)
    assert r.stdout == "11\n10\n"
    assert "local" not in r.final_env
    assert "x" not in r.final_env


def test_function_write_is_local():
    src = ("g = 1\n"
           "def f():\n"
           "    g = 99\n"
           "    return g\n"
           "print(f())\n"
           "print(g)")
    r = go(src)
    assert r.stdout == "99\n1\n"


def test_recursion_limit():
    src = "def f():\n    f()\nf()"
    r = go(src)
    assert r.status.code == "RuntimeError"
    assert r.status.kind == "RecursionLimit"


def test_void_result_use_is_type_mismatch():
    src = "def p():\n    print('hi')\nx = p()"
    r = go(src)
    assert r.status.code == "RuntimeError"
    assert r.status.kind == "TypeMismatch"
    # ...but discarding it is fine.
    r2 = go("def p():\n    print('hi')\np()")
    assert r2.status.code == "Completed"
    assert r2.stdout == "hi\n"


def test_call_before_def_is_unknown_name():
    r = go("f()\ndef f():\n    pass")
    assert r.status.code == "RuntimeError"
    assert r.status.kind == "UnknownName"


def test_arity_mismatch():
    r = go("def f(a):\n    return a\nf(1, 2)")
    assert r.status.code == "RuntimeError"
    assert r.status.kind == "TypeMismatch"


def test_string_operations():
    r = go("print('ab' + 'cd')\nprint('ab' * 3)\nprint(3 * 'ab')\nprint('ab' * -1 + '!')")
    assert r.stdout == "abcd\nababab\nababab\n!\n"
    r = go("print('b' < 'a')\nprint('abc' <= 'abd')")
    assert r.stdout == "False\nTrue\n"


def test_string_overflow():
    r = go("s = 'a' * 200000")
    assert r.status.code == "RuntimeError"
    assert r.status.kind == "StringOverflow"
    r = go("s = 'a' * 100000\ns = s + 'b'")
    assert r.status.code == "RuntimeError"
    assert r.status.kind == "StringOverflow"


def test_int_conversions():
    r = go("print(int(3.9), int(-3.9), int('  -42 '), int('+7'), int(5))")
    assert r.stdout == "3 -3 -42 7 5\n"


def test_str_len_builtins():
    r = go("print(len('abc'), str(42) + '!', str(True), str(1.5))")
    assert r.stdout == "3 42! True 1.5\n"


def test_float_display():
    r = go("print(0.1 + 0.2)\nprint(1.0)\nprint(10.0 / 4)")
    assert r.stdout == "0.30000000000000004\n1.0\n2.5\n"


def test_comments_cost_nothing():
    bare = "x = 1\nx += 1"
    commented = "# setup\nx = 1  # one\n# middle\nx += 1\n# done"
    a = go(bare)
    b = go(commented)
    assert a.steps_used == b.steps_used == 2
    assert a.final_env == b.final_env


def test_stmt_counts_and_trace():
    src = "x = 0\nfor i in range(4):\n    x += i"
    prog = parse(src).program
    seen = []
    r = go(src, trace=lambda st, env: seen.append((st.node_id, dict(env))))
    aug = prog.statements[1].body[0]
    assert r.stmt_counts[aug.node_id] == 4
    assert r.stmt_counts[prog.statements[0].node_id] == 1
    # Trace fires once per counted statement, with the live environment.
    aug_snapshots = [env for nid, env in seen if nid == aug.node_id]
    assert [env["i"] for env in aug_snapshots] == [0, 1, 2, 3]
    assert r.final_env == {"x": 6, "i": 3}


def test_steps_never_exceed_budget():
    for budget in (1, 2, 3, 5, 50):
        r = go(IV_SNIPPET, inputs=["x"] * 100, budget=budget)
        assert r.steps_used <= budget
