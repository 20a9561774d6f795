"""Bounded tree-walking interpreter for NovLang.

This is the engine's ground-truth oracle: every behavioral claim made
elsewhere (loop counts, counterexample experiments, remedy transparency)
is checked by running programs through here. Runs are deterministic, take
their input from a queue rather than real stdin, and always terminate —
either normally or with an explicit status (budget/input exhaustion,
a runtime error, a failed assertion, or truncated output).

Values are checked 64-bit Ints, Floats, Strs, and Bools. A step is one
statement execution or one loop-condition evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .lang.ast import (
    Assert, Assign, AugAssign, Binary, BoolLit, BoolOp, Break, Call, Comment,
    Compare, Continue, Expr, ExprStmt, FloatLit, ForRange, FuncDef, If, IntLit,
    Name, Pass, Program, Return, SourceSpan, Stmt, StrLit, Unary, While,
)
from .lang.printer import format_float

MAX_INT = 2**63 - 1
MIN_INT = -(2**63)
MAX_CALL_DEPTH = 64
MAX_STR_LEN = 100_000

# RuntimeError kinds (ExecStatus.kind when code == "RuntimeError").
DIVISION_BY_ZERO = "DivisionByZero"
INT_OVERFLOW = "IntOverflow"
TYPE_MISMATCH = "TypeMismatch"
BAD_INT_PARSE = "BadIntParse"
UNKNOWN_NAME = "UnknownName"
RECURSION_LIMIT = "RecursionLimit"
STRING_OVERFLOW = "StringOverflow"


@dataclass(frozen=True)
class ExecConfig:
    """Knobs for one bounded run."""

    step_budget: int = 100_000
    input_queue: Sequence[str] = ()
    max_output_bytes: int = 65_536

    def __post_init__(self) -> None:
        if self.step_budget < 1:
            raise ValueError("step_budget must be >= 1")


@dataclass(frozen=True)
class ExecStatus:
    """How a run ended.

    code is one of Completed, BudgetExhausted, RuntimeError, InputExhausted,
    AssertionFailed, OutputTruncated. kind/span/message are populated where
    they make sense (RuntimeError carries kind+span, InputExhausted a span,
    AssertionFailed span+message).
    """

    code: str
    kind: str | None = None
    span: SourceSpan | None = None
    message: str | None = None

    def __str__(self) -> str:
        parts = [self.code]
        if self.kind:
            parts.append(self.kind)
        if self.message:
            parts.append(repr(self.message))
        return ":".join(parts)


COMPLETED = ExecStatus("Completed")
BUDGET_EXHAUSTED = ExecStatus("BudgetExhausted")
OUTPUT_TRUNCATED = ExecStatus("OutputTruncated")


@dataclass
class ExecResult:
    status: ExecStatus
    stdout: str
    loop_counts: dict[int, int]
    steps_used: int
    final_env: dict[str, object]
    stmt_counts: dict[int, int] = field(default_factory=dict)
    inputs_consumed: int = 0

    @property
    def ok(self) -> bool:
        return self.status.code == "Completed"


def display(value: object) -> str:
    """Render a NovLang value the way print/str do."""
    if type(value) is bool:
        return "True" if value else "False"
    if type(value) is int:
        return str(value)
    if type(value) is float:
        return format_float(value)
    if type(value) is str:
        return value
    raise TypeError(f"not a NovLang value: {value!r}")


def type_name(value: object) -> str:
    if type(value) is bool:
        return "Bool"
    if type(value) is int:
        return "Int"
    if type(value) is float:
        return "Float"
    if type(value) is str:
        return "Str"
    if value is _VOID:
        return "nothing (the function returned no value)"
    return type(value).__name__


class _Halt(Exception):
    """Unwinds the whole run with a final status."""

    def __init__(self, status: ExecStatus) -> None:
        self.status = status


class _BreakSignal(Exception):
    pass


class _ContinueSignal(Exception):
    pass


class _ReturnSignal(Exception):
    def __init__(self, value: object) -> None:
        self.value = value


class _Void:
    """Result of a call to a function that never hit ``return <expr>``."""

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return "<void>"


_VOID = _Void()

TraceFn = Callable[[Stmt, Mapping[str, object]], None]


class _Interp:
    def __init__(self, program: Program, config: ExecConfig,
                 trace: TraceFn | None = None) -> None:
        self.program = program
        self.config = config
        self.trace = trace
        self.globals: dict[str, object] = {}
        self.scopes: list[dict[str, object]] = [self.globals]
        self.functions: dict[str, FuncDef] = {}
        self.call_depth = 0
        self.steps_used = 0
        self.out_parts: list[str] = []
        self.out_bytes = 0
        self.queue = list(config.input_queue)
        self.inputs_consumed = 0
        self.loop_counts: dict[int, int] = {}
        self.stmt_counts: dict[int, int] = {}

    # -- plumbing --

    def _err(self, kind: str, span: SourceSpan, message: str) -> _Halt:
        return _Halt(ExecStatus("RuntimeError", kind=kind, span=span,
                                message=message))

    def _charge(self) -> None:
        if self.steps_used >= self.config.step_budget:
            raise _Halt(BUDGET_EXHAUSTED)
        self.steps_used += 1

    def _emit(self, text: str) -> None:
        budget = self.config.max_output_bytes - self.out_bytes
        size = len(text.encode("utf-8"))
        if size <= budget:
            self.out_parts.append(text)
            self.out_bytes += size
            return
        # Keep the prefix that fits, then stop the run.
        kept: list[str] = []
        for ch in text:
            n = len(ch.encode("utf-8"))
            if n > budget:
                break
            kept.append(ch)
            budget -= n
        self.out_parts.append("".join(kept))
        self.out_bytes = self.config.max_output_bytes - budget
        raise _Halt(OUTPUT_TRUNCATED)

    # -- entry point --

    def run(self) -> ExecResult:
        try:
            self._exec_body(self.program.statements)
            status = COMPLETED
        except _Halt as halt:
            status = halt.status
        return ExecResult(
            status=status,
            stdout="".join(self.out_parts),
            loop_counts=dict(self.loop_counts),
            steps_used=self.steps_used,
            final_env=dict(self.globals),
            stmt_counts=dict(self.stmt_counts),
            inputs_consumed=self.inputs_consumed,
        )

    # -- statements --

    def _exec_body(self, stmts: list[Stmt]) -> None:
        for st in stmts:
            self._exec_stmt(st)

    def _exec_stmt(self, st: Stmt) -> None:
        if isinstance(st, Comment):
            return  # annotations are free: no step, no count
        if isinstance(st, (While, ForRange)):
            # Loops charge per condition evaluation instead of at dispatch.
            self.stmt_counts[st.node_id] = self.stmt_counts.get(st.node_id, 0) + 1
            if self.trace is not None:
                self.trace(st, self.scopes[-1])
            if isinstance(st, While):
                self._exec_while(st)
            else:
                self._exec_for(st)
            return
        self._charge()
        self.stmt_counts[st.node_id] = self.stmt_counts.get(st.node_id, 0) + 1
        if self.trace is not None:
            self.trace(st, self.scopes[-1])
        if isinstance(st, Assign):
            self.scopes[-1][st.target] = self._val(st.value)
        elif isinstance(st, AugAssign):
            old = self._load(st.target, st.target_span)
            new = self._binary_op(st.op, old, self._val(st.value), st.span)
            self.scopes[-1][st.target] = new
        elif isinstance(st, ExprStmt):
            self._eval(st.value)
        elif isinstance(st, If):
            for arm in st.arms:
                if self._cond(arm.condition):
                    self._exec_body(arm.body)
                    return
            if st.else_body is not None:
                self._exec_body(st.else_body)
        elif isinstance(st, Break):
            raise _BreakSignal()
        elif isinstance(st, Continue):
            raise _ContinueSignal()
        elif isinstance(st, Pass):
            pass
        elif isinstance(st, Return):
            raise _ReturnSignal(self._val(st.value) if st.value is not None
                                else _VOID)
        elif isinstance(st, FuncDef):
            self.functions[st.name] = st
        elif isinstance(st, Assert):
            if not self._cond(st.condition):
                msg = display(self._val(st.message)) if st.message is not None else ""
                raise _Halt(ExecStatus("AssertionFailed", span=st.span,
                                       message=msg))
        else:  # pragma: no cover - parser emits no other statement kinds
            raise AssertionError(f"unhandled statement {type(st).__name__}")

    def _exec_while(self, st: While) -> None:
        self.loop_counts.setdefault(st.node_id, 0)
        while True:
            self._charge()  # one loop-condition evaluation
            if not self._cond(st.condition):
                return
            self.loop_counts[st.node_id] += 1
            try:
                self._exec_body(st.body)
            except _BreakSignal:
                return
            except _ContinueSignal:
                continue

    def _exec_for(self, st: ForRange) -> None:
        self.loop_counts.setdefault(st.node_id, 0)
        self._charge()  # header evaluation
        start = self._range_arg(st.start)
        stop = self._range_arg(st.stop)
        step = self._range_arg(st.step)
        if step == 0:
            raise self._err(TYPE_MISMATCH, st.step.span,
                            "range() step must not be zero")
        current = start
        while True:
            self._charge()  # one iteration check
            if step > 0:
                more = current < stop
            else:
                more = current > stop
            if not more:
                return
            self.loop_counts[st.node_id] += 1
            self.scopes[-1][st.var] = current
            try:
                self._exec_body(st.body)
            except _BreakSignal:
                return
            except _ContinueSignal:
                pass
            current += step

    def _range_arg(self, e: Expr) -> int:
        v = self._val(e)
        if type(v) is not int:
            raise self._err(TYPE_MISMATCH, e.span,
                            f"range() arguments must be Int, got {type_name(v)}")
        return v

    # -- names --

    def _load(self, name: str, span: SourceSpan) -> object:
        for scope in (self.scopes[-1], self.globals):
            if name in scope:
                return scope[name]
        raise self._err(UNKNOWN_NAME, span,
                        f"name '{name}' is read before any assignment")

    # -- expressions --

    def _val(self, e: Expr) -> object:
        """Evaluate and require an actual value (no void results)."""
        v = self._eval(e)
        if v is _VOID:
            assert isinstance(e, Call)
            raise self._err(TYPE_MISMATCH, e.span,
                            f"{e.func}() returned no value")
        return v

    def _cond(self, e: Expr) -> bool:
        v = self._val(e)
        if type(v) is not bool:
            raise self._err(TYPE_MISMATCH, e.span,
                            f"condition must be a Bool, got {type_name(v)}")
        return v

    def _eval(self, e: Expr) -> object:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, FloatLit):
            return e.value
        if isinstance(e, StrLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, Name):
            return self._load(e.ident, e.span)
        if isinstance(e, Unary):
            return self._unary(e)
        if isinstance(e, Binary):
            return self._binary_op(e.op, self._val(e.lhs), self._val(e.rhs),
                                   e.span)
        if isinstance(e, Compare):
            return self._compare(e)
        if isinstance(e, BoolOp):
            short = e.op == "or"
            for operand in e.operands:
                v = self._val(operand)
                if type(v) is not bool:
                    raise self._err(TYPE_MISMATCH, operand.span,
                                    f"'{e.op}' needs Bool operands, got "
                                    f"{type_name(v)}")
                if v is short:
                    return short
            return not short
        if isinstance(e, Call):
            return self._call(e)
        raise AssertionError(f"unhandled expression {type(e).__name__}")

    def _unary(self, e: Unary) -> object:
        v = self._val(e.operand)
        if e.op == "-":
            if type(v) is int:
                return self._check_int(-v, e.span)
            if type(v) is float:
                return -v
            raise self._err(TYPE_MISMATCH, e.span,
                            f"unary '-' needs Int or Float, got {type_name(v)}")
        if type(v) is not bool:
            raise self._err(TYPE_MISMATCH, e.span,
                            f"'not' needs a Bool, got {type_name(v)}")
        return not v

    def _check_int(self, n: int, span: SourceSpan) -> int:
        if not (MIN_INT <= n <= MAX_INT):
            raise self._err(INT_OVERFLOW, span, "Int result does not fit in 64 bits")
        return n

    def _binary_op(self, op: str, a: object, b: object,
                   span: SourceSpan) -> object:
        ta, tb = type(a), type(b)
        numeric = (int, float)
        if ta in numeric and tb in numeric and ta is not bool and tb is not bool:
            if op == "/":
                if b == 0:
                    raise self._err(DIVISION_BY_ZERO, span, "division by zero")
                return a / b
            if ta is float or tb is float:
                if op in ("//", "%") and b == 0:
                    raise self._err(DIVISION_BY_ZERO, span, "division by zero")
                if op == "+":
                    return a + b
                if op == "-":
                    return a - b
                if op == "*":
                    return a * b
                if op == "//":
                    return float(a // b)
                return a % b
            # Int op Int, checked
            if op == "+":
                return self._check_int(a + b, span)
            if op == "-":
                return self._check_int(a - b, span)
            if op == "*":
                return self._check_int(a * b, span)
            if b == 0:
                raise self._err(DIVISION_BY_ZERO, span, "division by zero")
            if op == "//":
                return self._check_int(a // b, span)
            return self._check_int(a % b, span)
        if ta is str and tb is str and op == "+":
            if len(a) + len(b) > MAX_STR_LEN:
                raise self._err(STRING_OVERFLOW, span,
                                f"Str result longer than {MAX_STR_LEN} characters")
            return a + b
        if op == "*" and {ta, tb} == {str, int} and bool not in (ta, tb):
            text, count = (a, b) if ta is str else (b, a)
            if count > 0 and len(text) * count > MAX_STR_LEN:
                raise self._err(STRING_OVERFLOW, span,
                                f"Str result longer than {MAX_STR_LEN} characters")
            return text * max(0, count)
        raise self._err(TYPE_MISMATCH, span,
                        f"'{op}' does not apply to {type_name(a)} and "
                        f"{type_name(b)}")

    def _compare(self, e: Compare) -> bool:
        a = self._val(e.lhs)
        b = self._val(e.rhs)
        ta, tb = type(a), type(b)
        comparable = ta is tb or (ta is not bool and tb is not bool
                                  and ta in (int, float) and tb in (int, float))
        if e.op == "==":
            return bool(a == b) if comparable else False
        if e.op == "!=":
            return bool(a != b) if comparable else True
        orderable = comparable and (ta is not bool) and (
            ta in (int, float) or ta is str)
        if not orderable:
            raise self._err(TYPE_MISMATCH, e.span,
                            f"'{e.op}' cannot order {type_name(a)} and "
                            f"{type_name(b)}")
        if e.op == "<":
            return a < b
        if e.op == "<=":
            return a <= b
        if e.op == ">":
            return a > b
        return a >= b

    # -- calls --

    def _call(self, e: Call) -> object:
        if e.func == "input":
            return self._builtin_input(e)
        if e.func == "print":
            self._emit(" ".join(display(self._val(a)) for a in e.args) + "\n")
            return _VOID
        if e.func == "int":
            return self._builtin_int(e)
        if e.func == "str":
            self._need_args(e, 1)
            return display(self._val(e.args[0]))
        if e.func == "len":
            self._need_args(e, 1)
            v = self._val(e.args[0])
            if type(v) is not str:
                raise self._err(TYPE_MISMATCH, e.span,
                                f"len() needs a Str, got {type_name(v)}")
            return len(v)
        if e.func == "range":
            raise self._err(TYPE_MISMATCH, e.span,
                            "range() is only valid as a for-loop header")
        return self._call_user(e)

    def _need_args(self, e: Call, n: int) -> None:
        if len(e.args) != n:
            raise self._err(TYPE_MISMATCH, e.span,
                            f"{e.func}() takes {n} argument(s), got {len(e.args)}")

    def _builtin_input(self, e: Call) -> str:
        if len(e.args) > 1:
            raise self._err(TYPE_MISMATCH, e.span,
                            f"input() takes at most 1 argument, got {len(e.args)}")
        if e.args:
            prompt = self._val(e.args[0])
            if type(prompt) is not str:
                raise self._err(TYPE_MISMATCH, e.args[0].span,
                                f"input() prompt must be a Str, got "
                                f"{type_name(prompt)}")
            # The prompt is not echoed to the transcript.
        if not self.queue:
            raise _Halt(ExecStatus("InputExhausted", span=e.span))
        self.inputs_consumed += 1
        return self.queue.pop(0)

    def _builtin_int(self, e: Call) -> int:
        self._need_args(e, 1)
        v = self._val(e.args[0])
        if type(v) is int:
            return v
        if type(v) is float:
            if v != v or v in (float("inf"), float("-inf")):
                raise self._err(BAD_INT_PARSE, e.span,
                                f"cannot convert {display(v)} to Int")
            return self._check_int(int(v), e.span)
        if type(v) is str:
            text = v.strip()
            body = text[1:] if text[:1] in ("+", "-") else text
            if not body or not body.isascii() or not body.isdigit():
                raise self._err(BAD_INT_PARSE, e.span,
                                f"int() cannot parse {v!r}")
            return self._check_int(int(text), e.span)
        raise self._err(TYPE_MISMATCH, e.span,
                        f"int() needs an Int, Float, or Str, got {type_name(v)}")

    def _call_user(self, e: Call) -> object:
        fn = self.functions.get(e.func)
        if fn is None:
            raise self._err(UNKNOWN_NAME, e.span,
                            f"function '{e.func}' is not defined here")
        if len(e.args) != len(fn.params):
            raise self._err(TYPE_MISMATCH, e.span,
                            f"{e.func}() takes {len(fn.params)} argument(s), "
                            f"got {len(e.args)}")
        if self.call_depth >= MAX_CALL_DEPTH:
            raise self._err(RECURSION_LIMIT, e.span,
                            f"call depth exceeded {MAX_CALL_DEPTH}")
        frame = {p.name: self._val(a) for p, a in zip(fn.params, e.args)}
        self.scopes.append(frame)
        self.call_depth += 1
        try:
            self._exec_body(fn.body)
            return _VOID
        except _ReturnSignal as ret:
            return ret.value
        finally:
            self.call_depth -= 1
            self.scopes.pop()


def run(program: Program, config: ExecConfig | None = None,
        trace: TraceFn | None = None) -> ExecResult:
    """Execute ``program`` under ``config`` and report how it went.

    Never raises for program behavior; everything is expressed in
    ``ExecResult.status``. ``trace`` (if given) is called as
    ``trace(stmt, env)`` right before each counted statement executes,
    with the innermost scope — handy for recording observed values.
    """
    return _Interp(program, config or ExecConfig(), trace).run()
