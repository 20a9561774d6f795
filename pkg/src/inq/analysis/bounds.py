"""Iteration-bound ladder for loops.

The ladder tries progressively weaker arguments and stops at the first
one that applies:

1. ``for`` over a constant-foldable range: exact count by arithmetic.
2. ``while`` driven by a single induction variable (constant initial
   value assigned in the directly preceding statement, one unconditional
   constant additive step in the body, linear comparison against a
   constant, no break/return): exact closed form. Direction mismatches
   and steps that skip an equality target are reported Infinite. The
   preceding-sibling requirement makes the closed form hold per arrival
   even when the whole loop sits inside another loop, because the
   initializer re-runs before every arrival.
3. Condition is a tautology under the header environment and the body
   cannot exit: Infinite.
4. Condition is a contradiction at the header: Exact(0).
5. Closed programs (no input() anywhere): observe one bounded run —
   a Completed run gives Exact when the loop was arrived at no more than
   once, and a sound Range(0, total) when an enclosing loop re-entered
   it; an exhausted budget gives AtLeast for single-arrival loops. Runs
   that end in a runtime error decide nothing and fall through.
6. Otherwise Unknown, narrowed to a Range when the body provably exits
   unconditionally (at most one iteration) or when interval analysis
   bounds a ``for`` range's extent.

Counts mean body entries per arrival at the loop statement: "how many
times will this loop iterate" when control reaches it.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..interp import ExecConfig, run
from ..lang.ast import (
    Assign, AugAssign, Binary, Break, Call, Comment, Compare, Continue, Expr,
    ForRange, FuncDef, If, IntLit, Name, Program, Return, Stmt, Unary, While,
    walk,
)
from .cfg import Cfg, build_cfg
from .conditions import ConditionClass, classify_condition
from .domains import IntRange
from .intervals import IntervalResult, abstract_eval, interval_analysis

BOUND_BUDGET = 100_000


class NotALoop(ValueError):
    """Raised when the node id passed to loop_bound is not a loop."""


@dataclass(frozen=True)
class IterationBound:
    kind: str                 # exact | at-least | range | infinite | unknown
    lo: int | None = None
    hi: int | None = None

    @classmethod
    def exact(cls, n: int) -> "IterationBound":
        return cls("exact", n, n)

    @classmethod
    def at_least(cls, n: int) -> "IterationBound":
        return cls("at-least", n, None)

    @classmethod
    def bounded(cls, lo: int, hi: int | None) -> "IterationBound":
        if hi is not None and lo == hi:
            return cls.exact(lo)
        if hi is None:
            return cls.at_least(lo) if lo > 0 else cls.unknown()
        return cls("range", lo, hi)

    @classmethod
    def infinite(cls) -> "IterationBound":
        return cls("infinite")

    @classmethod
    def unknown(cls) -> "IterationBound":
        return cls("unknown")

    def contains(self, observed: int) -> bool:
        """Is a concrete completed-run body-entry count consistent?"""
        if self.kind == "exact":
            return observed == self.lo
        if self.kind == "at-least":
            return observed >= self.lo
        if self.kind == "range":
            return self.lo <= observed <= self.hi
        if self.kind == "infinite":
            return False
        return True

    def describe(self) -> str:
        if self.kind == "exact":
            return f"exactly {self.lo}"
        if self.kind == "at-least":
            return f"at least {self.lo}"
        if self.kind == "range":
            return f"between {self.lo} and {self.hi}"
        if self.kind == "infinite":
            return "forever"
        return "an unknown number of"


def const_fold(e: Expr) -> int | None:
    """Fold an Int-valued literal expression; None when not constant."""
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Unary) and e.op == "-":
        inner = const_fold(e.operand)
        return None if inner is None else -inner
    if isinstance(e, Binary):
        a, b = const_fold(e.lhs), const_fold(e.rhs)
        if a is None or b is None:
            return None
        if e.op == "+":
            out = a + b
        elif e.op == "-":
            out = a - b
        elif e.op == "*":
            out = a * b
        elif e.op == "//":
            if b == 0:
                return None
            out = a // b
        elif e.op == "%":
            if b == 0:
                return None
            out = a % b
        else:
            return None
        return out if -(2 ** 63) + 1 <= out <= 2 ** 63 - 1 else None
    return None


def loop_bound(program: Program, loop: int, *,
               cfg: Cfg | None = None,
               intervals: IntervalResult | None = None) -> IterationBound:
    node = next((n for n in walk(program) if n.node_id == loop), None)
    if not isinstance(node, (While, ForRange)):
        raise NotALoop(f"node {loop} is not a loop")
    cfg = cfg or build_cfg(program)
    intervals = intervals or interval_analysis(program, cfg)

    header_env = intervals.before.get(loop)
    if header_env is None:
        return IterationBound.exact(0)  # analysis proved the loop dead

    if isinstance(node, ForRange):
        exact = _for_range_exact(node)
        if exact is not None:
            return exact
    else:
        closed = _while_closed_form(program, node)
        if closed is not None:
            return closed
        klass = classify_condition(node.condition, header_env)
        if klass is ConditionClass.TAUTOLOGY and not _body_can_exit(node.body):
            return IterationBound.infinite()
        if klass is ConditionClass.CONTRADICTION:
            return IterationBound.exact(0)

    if _is_closed_program(program):
        result = run(program, ExecConfig(step_budget=BOUND_BUDGET))
        total = result.loop_counts.get(loop, 0)
        arrivals = result.stmt_counts.get(loop, 0)
        if result.status.code == "Completed":
            if arrivals <= 1:
                return IterationBound.exact(total)
            return IterationBound.bounded(0, total)
        if result.status.code == "BudgetExhausted" and arrivals == 1:
            return IterationBound.at_least(total)

    if isinstance(node, ForRange):
        return _for_range_interval(node, header_env)
    if _caps_single_pass(node.body):
        lo = 1 if classify_condition(node.condition, header_env) is \
            ConditionClass.TAUTOLOGY else 0
        return IterationBound.bounded(lo, 1)
    return IterationBound.unknown()


# -- rung 1 --

def _range_count(start: int, stop: int, step: int) -> int:
    if step > 0:
        return max(0, -(-(stop - start) // step))
    return max(0, -(-(start - stop) // -step))


def _for_range_exact(node: ForRange) -> IterationBound | None:
    start = const_fold(node.start)
    stop = const_fold(node.stop)
    step = const_fold(node.step)
    if start is None or stop is None or step is None:
        return None
    if step == 0:
        return IterationBound.exact(0)  # header errors; body never entered
    count = _range_count(start, stop, step)
    if _caps_single_pass(node.body):
        return IterationBound.exact(min(count, 1))
    if _body_can_exit(node.body):
        # A break/return can cut the pass short, but the first body entry
        # always happens before any body statement runs.
        return IterationBound.bounded(min(count, 1), count)
    return IterationBound.exact(count)


# -- rung 2 --

def _while_closed_form(program: Program,
                       node: While) -> IterationBound | None:
    comp = _linear_comparison(node.condition)
    if comp is None:
        return None
    var, op, limit = comp
    step = _single_step(node.body, var)
    if step is None or _body_can_exit(node.body):
        return None
    init = _constant_init(program, node, var)
    if init is None:
        return None
    return _closed_form(init, op, limit, step)


def _linear_comparison(cond: Expr) -> tuple[str, str, int] | None:
    if not isinstance(cond, Compare):
        return None
    flip = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==",
            "!=": "!="}
    if isinstance(cond.lhs, Name):
        limit = const_fold(cond.rhs)
        if limit is not None:
            return cond.lhs.ident, cond.op, limit
    if isinstance(cond.rhs, Name):
        limit = const_fold(cond.lhs)
        if limit is not None:
            return cond.rhs.ident, flip[cond.op], limit
    return None


def _single_step(body: list[Stmt], var: str) -> int | None:
    """Constant net step when the body has exactly one write: a top-level
    additive update of var. None otherwise."""
    writes = [st for st in _all_writes(body) if _write_target(st) == var]
    if len(writes) != 1 or writes[0] not in body:
        return None
    return _additive_step(writes[0], var)


def _all_writes(body: list[Stmt]) -> list[Stmt]:
    out: list[Stmt] = []
    for node in body:
        for sub in walk(node):
            if isinstance(sub, (Assign, AugAssign, ForRange)):
                out.append(sub)
    return out


def _write_target(st: Stmt) -> str | None:
    if isinstance(st, (Assign, AugAssign)):
        return st.target
    if isinstance(st, ForRange):
        return st.var
    return None


def _additive_step(st: Stmt, var: str) -> int | None:
    if isinstance(st, AugAssign):
        amount = const_fold(st.value)
        if amount is None or st.op not in ("+", "-"):
            return None
        return amount if st.op == "+" else -amount
    if isinstance(st, Assign) and isinstance(st.value, Binary):
        b = st.value
        if b.op == "+":
            for name_side, const_side in ((b.lhs, b.rhs), (b.rhs, b.lhs)):
                if isinstance(name_side, Name) and name_side.ident == var:
                    amount = const_fold(const_side)
                    if amount is not None:
                        return amount
        elif b.op == "-" and isinstance(b.lhs, Name) and b.lhs.ident == var:
            amount = const_fold(b.rhs)
            if amount is not None:
                return -amount
    return None


def _constant_init(program: Program, node: While, var: str) -> int | None:
    """The constant assigned to var by the statement directly before the
    loop (comments skipped). Adjacency matters: structured control flow
    re-runs that initializer before every arrival at the loop."""
    siblings = _enclosing_list(program, node)
    if siblings is None:
        return None
    index = next(i for i, st in enumerate(siblings) if st is node)
    for prev in reversed(siblings[:index]):
        if isinstance(prev, Comment):
            continue
        if isinstance(prev, Assign) and prev.target == var:
            return const_fold(prev.value)
        return None
    return None


def _enclosing_list(program: Program, node: Stmt) -> list[Stmt] | None:
    stack: list[list[Stmt]] = [program.statements]
    while stack:
        stmts = stack.pop()
        if any(st is node for st in stmts):
            return stmts
        for st in stmts:
            if isinstance(st, If):
                stack.extend(arm.body for arm in st.arms)
                if st.else_body:
                    stack.append(st.else_body)
            elif isinstance(st, (While, ForRange, FuncDef)):
                stack.append(st.body)
    return None


def _closed_form(init: int, op: str, limit: int,
                 step: int) -> IterationBound | None:
    def ceil_div(a: int, b: int) -> int:
        return -(-a // b)

    if op == "<" or op == "<=":
        bound = limit if op == "<" else limit + 1
        if init >= bound:
            return IterationBound.exact(0)
        if step <= 0:
            return IterationBound.infinite()
        return IterationBound.exact(ceil_div(bound - init, step))
    if op == ">" or op == ">=":
        bound = limit if op == ">" else limit - 1
        if init <= bound:
            return IterationBound.exact(0)
        if step >= 0:
            return IterationBound.infinite()
        return IterationBound.exact(ceil_div(init - bound, -step))
    if op == "==":
        if init != limit:
            return IterationBound.exact(0)
        return IterationBound.infinite() if step == 0 else \
            IterationBound.exact(1)
    # "!=": terminates only when the step lands exactly on the limit.
    if init == limit:
        return IterationBound.exact(0)
    if step != 0 and (limit - init) % step == 0 and \
            (limit - init) // step > 0:
        return IterationBound.exact((limit - init) // step)
    return IterationBound.infinite()


# -- rungs 3 and 6 helpers --

def _body_can_exit(body: list[Stmt]) -> bool:
    return _scan_exit(body, breaks_count=True)


def _scan_exit(stmts: list[Stmt], breaks_count: bool) -> bool:
    for st in stmts:
        if isinstance(st, Return):
            return True
        if isinstance(st, Break) and breaks_count:
            return True
        if isinstance(st, If):
            for arm in st.arms:
                if _scan_exit(arm.body, breaks_count):
                    return True
            if st.else_body and _scan_exit(st.else_body, breaks_count):
                return True
        elif isinstance(st, (While, ForRange)):
            # A break in a nested loop exits only that loop.
            if _scan_exit(st.body, breaks_count=False):
                return True
    return False


def _caps_single_pass(body: list[Stmt]) -> bool:
    """True when every pass through the body reaches a top-level break or
    return: control runs the prefix linearly unless a continue (not
    shielded by a nested loop) jumps back to the header first."""
    for st in body:
        if isinstance(st, (Break, Return)):
            return True
        if _reaches_continue(st):
            return False
    return False


def _reaches_continue(st: Stmt) -> bool:
    if isinstance(st, Continue):
        return True
    if isinstance(st, If):
        bodies = [arm.body for arm in st.arms]
        if st.else_body:
            bodies.append(st.else_body)
        return any(_reaches_continue(s) for b in bodies for s in b)
    # Nested loops absorb their own continues; FuncDef bodies cannot
    # contain a bare continue at all.
    return False


def _is_closed_program(program: Program) -> bool:
    return not any(isinstance(n, Call) and n.func == "input"
                   for n in walk(program))


def _for_range_interval(node: ForRange, env: dict) -> IterationBound:
    start = abstract_eval(node.start, env)
    stop = abstract_eval(node.stop, env)
    step = abstract_eval(node.step, env)
    if not (isinstance(start, IntRange) and isinstance(stop, IntRange) and
            isinstance(step, IntRange) and step.iv.is_const()):
        return IterationBound.unknown()
    c = step.iv.lo
    if c == 0:
        return IterationBound.exact(0)
    if c > 0:
        lo_pair = (start.iv.hi, stop.iv.lo)   # fewest: late start, early stop
        hi_pair = (start.iv.lo, stop.iv.hi)
    else:
        lo_pair = (start.iv.lo, stop.iv.hi)
        hi_pair = (start.iv.hi, stop.iv.lo)
    lo = 0
    if lo_pair[0] is not None and lo_pair[1] is not None:
        lo = _range_count(lo_pair[0], lo_pair[1], c)
    hi: int | None = None
    if hi_pair[0] is not None and hi_pair[1] is not None:
        hi = _range_count(hi_pair[0], hi_pair[1], c)
    if _caps_single_pass(node.body):
        lo, hi = min(lo, 1), 1 if hi is None else min(hi, 1)
    elif _body_can_exit(node.body):
        lo = min(lo, 1)
    return IterationBound.bounded(lo, hi)
