"""Interval abstract interpretation over the CFG.

Forward fixpoint over the AbstractValue lattice with per-variable widening
at loop headers (a variable that grows on 3 consecutive header visits is
widened to ±infinity on its growing side) followed by two narrowing
passes, which recover bounded loop-exit intervals that plain widening
would lose. True/false edges refine comparisons against literals; an edge
whose refinement is contradictory contributes nothing, so provably dead
branches stay unreachable in the result.

Environments map variable name -> AbstractValue; a None environment means
"no execution reaches this point".
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lang.ast import (
    Assign, AugAssign, Binary, BoolLit, BoolOp, Call, Compare, Expr, FloatLit,
    ForRange, If, IfArm, IntLit, Name, Program, Stmt, StrLit, Unary, While,
    walk,
)
from .cfg import Cfg, Edge
from .domains import (
    BOTH_BOOLS, BoolSet, FLOAT_TOP, IntRange, Interval, MAX_STRSET, StrSet,
    TOP, TOP_STR, join_values, value_covers, widen_values,
)

Env = dict[str, object]

WIDEN_AFTER = 3  # consecutive growing header visits before widening
NARROWING_PASSES = 2


@dataclass
class IntervalResult:
    before: dict[int, Env | None]  # stmt/arm NodeId -> env at entry
    after: dict[int, Env | None]   # stmt/arm NodeId -> env on completion/exit
    iterations: int = 0

    def value_after(self, node_id: int, var: str):
        env = self.after.get(node_id)
        return TOP if env is None else env.get(var, TOP)

    def value_before(self, node_id: int, var: str):
        env = self.before.get(node_id)
        return TOP if env is None else env.get(var, TOP)


# -- abstract expression evaluation --

def abstract_eval(e: Expr, env: Env):
    if isinstance(e, IntLit):
        return IntRange.const(e.value)
    if isinstance(e, FloatLit):
        return FLOAT_TOP
    if isinstance(e, StrLit):
        return StrSet.of(e.value)
    if isinstance(e, BoolLit):
        return BoolSet.of(e.value)
    if isinstance(e, Name):
        return env.get(e.ident, TOP)
    if isinstance(e, Unary):
        v = abstract_eval(e.operand, env)
        if e.op == "-":
            return IntRange(v.iv.neg()) if isinstance(v, IntRange) else (
                FLOAT_TOP if v is FLOAT_TOP else TOP)
        if isinstance(v, BoolSet):
            return BoolSet(frozenset(not b for b in v.values)) if v.values \
                else v
        return BOTH_BOOLS
    if isinstance(e, Binary):
        return _abstract_binary(e.op, abstract_eval(e.lhs, env),
                                abstract_eval(e.rhs, env))
    if isinstance(e, Compare):
        return compare_values(e.op, abstract_eval(e.lhs, env),
                              abstract_eval(e.rhs, env))
    if isinstance(e, BoolOp):
        outcomes = [abstract_eval(op, env) for op in e.operands]
        sets = [v.values if isinstance(v, BoolSet) else frozenset((True, False))
                for v in outcomes]
        absorb = e.op == "or"  # `or` is True if any operand is True
        if any(s == frozenset((absorb,)) for s in sets):
            return BoolSet.of(absorb)
        if all(s == frozenset((not absorb,)) for s in sets):
            return BoolSet.of(not absorb)
        return BOTH_BOOLS
    if isinstance(e, Call):
        return _abstract_call(e, env)
    return TOP


def _abstract_binary(op: str, a, b):
    if op == "/":
        numeric = (IntRange, type(FLOAT_TOP))
        if isinstance(a, numeric) and isinstance(b, numeric):
            return FLOAT_TOP
        return TOP
    if isinstance(a, IntRange) and isinstance(b, IntRange):
        if op == "+":
            return IntRange(a.iv.add(b.iv))
        if op == "-":
            return IntRange(a.iv.sub(b.iv))
        if op == "*":
            return IntRange(a.iv.mul(b.iv))
        if op == "//":
            return IntRange(a.iv.floordiv(b.iv))
        return IntRange(a.iv.mod(b.iv))
    if a is FLOAT_TOP or b is FLOAT_TOP:
        other = b if a is FLOAT_TOP else a
        if isinstance(other, (IntRange, type(FLOAT_TOP))):
            return FLOAT_TOP
        return TOP
    if isinstance(a, StrSet) and isinstance(b, StrSet) and op == "+":
        if not a.is_top and not b.is_top and \
                len(a.values) * len(b.values) <= MAX_STRSET:
            return StrSet(frozenset(x + y for x in a.values for y in b.values))
        return TOP_STR
    if op == "*" and (isinstance(a, StrSet) and isinstance(b, IntRange) or
                      isinstance(a, IntRange) and isinstance(b, StrSet)):
        return TOP_STR
    return TOP


def compare_values(op: str, a, b) -> BoolSet:
    """Abstract truth of a comparison; {True,False} when undetermined."""
    if isinstance(a, IntRange) and isinstance(b, IntRange):
        return _compare_intervals(op, a.iv, b.iv)
    if isinstance(a, StrSet) and isinstance(b, StrSet):
        if a.is_top or b.is_top:
            return BOTH_BOOLS
        outcomes = {_str_cmp(op, x, y) for x in a.values for y in b.values}
        return BoolSet(frozenset(outcomes))
    if isinstance(a, BoolSet) and isinstance(b, BoolSet) and op in ("==", "!="):
        if not a.values or not b.values:
            return BOTH_BOOLS
        outcomes = {(x == y) == (op == "==") for x in a.values
                    for y in b.values}
        return BoolSet(frozenset(outcomes))
    # Cross-type equality is decidedly False/True; everything else unknown.
    crossable = (IntRange, StrSet, BoolSet)
    if isinstance(a, crossable) and isinstance(b, crossable) \
            and type(a) is not type(b) and op in ("==", "!="):
        return BoolSet.of(op == "!=")
    return BOTH_BOOLS


def _compare_intervals(op: str, a: Interval, b: Interval) -> BoolSet:
    if op in ("==", "!="):
        disjoint = a.meet(b) is None
        if disjoint:
            return BoolSet.of(op == "!=")
        if a.is_const() and b.is_const() and a.lo == b.lo:
            return BoolSet.of(op == "==")
        return BOTH_BOOLS
    if op in ("<", ">="):
        always = a.hi is not None and b.lo is not None and a.hi < b.lo
        never = a.lo is not None and b.hi is not None and a.lo >= b.hi
    else:  # "<=", ">"
        always = a.hi is not None and b.lo is not None and a.hi <= b.lo
        never = a.lo is not None and b.hi is not None and a.lo > b.hi
    if op in (">=", ">"):
        always, never = never, always
    if always:
        return BoolSet.of(True)
    if never:
        return BoolSet.of(False)
    return BOTH_BOOLS


def _str_cmp(op: str, x: str, y: str) -> bool:
    return {"==": x == y, "!=": x != y, "<": x < y, "<=": x <= y,
            ">": x > y, ">=": x >= y}[op]


def _abstract_call(e: Call, env: Env):
    if e.func == "input":
        return TOP_STR
    if e.func == "int" and len(e.args) == 1:
        v = abstract_eval(e.args[0], env)
        if isinstance(v, IntRange):
            return v
        if isinstance(v, StrSet) and not v.is_top:
            parsed = []
            for s in v.values:
                text = s.strip()
                body = text[1:] if text[:1] in ("+", "-") else text
                if not body or not body.isascii() or not body.isdigit():
                    return IntRange(Interval.top())
                parsed.append(int(text))
            if parsed:
                return IntRange(Interval(min(parsed), max(parsed)))
        return IntRange(Interval.top())
    if e.func == "str" and len(e.args) == 1:
        v = abstract_eval(e.args[0], env)
        if isinstance(v, IntRange) and v.iv.is_const():
            return StrSet.of(str(v.iv.lo))
        if isinstance(v, StrSet):
            return v
        if isinstance(v, BoolSet) and len(v.values) == 1:
            return StrSet.of("True" if True in v.values else "False")
        return TOP_STR
    if e.func == "len" and len(e.args) == 1:
        v = abstract_eval(e.args[0], env)
        if isinstance(v, StrSet) and not v.is_top and v.values:
            lens = [len(s) for s in v.values]
            return IntRange(Interval(min(lens), max(lens)))
        return IntRange(Interval(0, None))
    return TOP  # print (no value), range (error), user functions


# -- edge refinement --

def refine(env: Env, cond: Expr, want: bool) -> Env | None:
    """Constrain env by `cond == want`; None when that's contradictory."""
    if isinstance(cond, BoolLit):
        return env if cond.value == want else None
    if isinstance(cond, Name):
        v = env.get(cond.ident, TOP)
        if isinstance(v, BoolSet):
            if want not in v.values:
                return None
            out = dict(env)
            out[cond.ident] = BoolSet.of(want)
            return out
        return env
    if isinstance(cond, Unary) and cond.op == "not":
        return refine(env, cond.operand, not want)
    if isinstance(cond, BoolOp):
        # Refine only on the short-circuit-free side: every operand of a
        # true `and` holds; every operand of a false `or` fails.
        if (cond.op == "and") == want:
            cur: Env | None = env
            for operand in cond.operands:
                if cur is None:
                    return None
                cur = refine(cur, operand, want)
            return cur
        return env
    if isinstance(cond, Compare):
        return _refine_compare(env, cond, want)
    return env


def _refine_compare(env: Env, cond: Compare, want: bool) -> Env | None:
    op = cond.op if want else _NEGATE[cond.op]
    sides = ((cond.lhs, cond.rhs, False), (cond.rhs, cond.lhs, True))
    out = env
    for name_side, lit_side, flipped in sides:
        if not isinstance(name_side, Name):
            continue
        actual_op = _FLIP[op] if flipped else op
        out2 = _refine_name(out, name_side.ident, actual_op, lit_side)
        if out2 is None:
            return None
        out = out2
    return out


_NEGATE = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}
_FLIP = {"==": "==", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


def _refine_name(env: Env, var: str, op: str, other: Expr) -> Env | None:
    current = env.get(var, TOP)
    if isinstance(other, IntLit):
        lit = other.value
        if isinstance(current, StrSet) or isinstance(current, BoolSet):
            # Cross-type: == never holds, != always does.
            if op == "==":
                return None
            return env
        bound = {
            "<": Interval(None, lit - 1), "<=": Interval(None, lit),
            ">": Interval(lit + 1, None), ">=": Interval(lit, None),
            "==": Interval(lit, lit), "!=": None,
        }[op]
        if not isinstance(current, IntRange):
            if op == "!=":
                return env
            out = dict(env)
            out[var] = IntRange(bound)
            return out
        if op == "!=":
            iv = current.iv
            if iv.is_const() and iv.lo == lit:
                return None
            # Shave the endpoint when the literal sits exactly on it.
            if iv.lo == lit:
                iv = Interval(lit + 1, iv.hi)
            elif iv.hi == lit:
                iv = Interval(iv.lo, lit - 1)
            out = dict(env)
            out[var] = IntRange(iv)
            return out
        met = current.iv.meet(bound)
        if met is None:
            return None
        out = dict(env)
        out[var] = IntRange(met)
        return out
    if isinstance(other, StrLit) and op in ("==", "!="):
        lit = other.value
        if isinstance(current, (IntRange, BoolSet)):
            return None if op == "==" else env
        if op == "==":
            if isinstance(current, StrSet) and not current.is_top:
                if lit not in current.values:
                    return None
            out = dict(env)
            out[var] = StrSet.of(lit)
            return out
        if isinstance(current, StrSet) and not current.is_top:
            remaining = current.values - {lit}
            if not remaining:
                return None
            out = dict(env)
            out[var] = StrSet(remaining)
            return out
        return env
    if isinstance(other, BoolLit) and op in ("==", "!="):
        return refine(env, Name(var, span=other.span),
                      other.value == (op == "=="))
    return env


# -- the fixpoint --

class _Solver:
    def __init__(self, program: Program, cfg: Cfg) -> None:
        self.cfg = cfg
        self.node_stmt: dict[int, Stmt | IfArm] = {
            n.node_id: n for n in walk(program)
            if isinstance(n, (Stmt, IfArm))}
        self.entry_envs: dict[int, Env] = {cfg.entry: {}}
        for name, blk in cfg.func_entries.items():
            self.entry_envs[blk] = {}  # params unknown -> absent = TOP reads
        self.in_env: dict[int, Env | None] = {}
        self.out_env: dict[int, Env | None] = {}
        self.grow: dict[tuple[int, str], int] = {}
        self.iterations = 0

    def edge_env(self, e: Edge) -> Env | None:
        src_out = self.out_env.get(e.src)
        if src_out is None:
            return None
        blk = self.cfg.blocks[e.src]
        if not blk.stmts or e.kind not in ("true-branch", "false-branch"):
            return src_out
        term = self.node_stmt[blk.stmts[-1]]
        want = e.kind == "true-branch"
        if isinstance(term, While):
            return refine(src_out, term.condition, want)
        if isinstance(term, If):
            return refine(src_out, term.arms[0].condition, want)
        if isinstance(term, IfArm):
            return refine(src_out, term.condition, want)
        if isinstance(term, ForRange):
            if not want:
                return src_out
            return self._bind_loop_var(term, src_out)
        return src_out

    def _bind_loop_var(self, st: ForRange, env: Env) -> Env | None:
        start = abstract_eval(st.start, env)
        stop = abstract_eval(st.stop, env)
        step = abstract_eval(st.step, env)
        value = IntRange(Interval.top())
        if isinstance(start, IntRange) and isinstance(stop, IntRange) and \
                isinstance(step, IntRange) and step.iv.is_const():
            c = step.iv.lo
            if c > 0:
                lo, hi = start.iv.lo, (None if stop.iv.hi is None
                                       else stop.iv.hi - 1)
            elif c < 0:
                lo = None if stop.iv.lo is None else stop.iv.lo + 1
                hi = start.iv.hi
            else:
                lo = hi = None
            if lo is not None and hi is not None and lo > hi:
                return None  # body provably never entered
            value = IntRange(Interval(lo, hi))
        out = dict(env)
        out[st.var] = value
        return out

    def transfer_block(self, bid: int, env: Env) -> Env:
        out = dict(env)
        for nid in self.cfg.blocks[bid].stmts:
            self.transfer_stmt(self.node_stmt[nid], out)
        return out

    @staticmethod
    def transfer_stmt(st: Stmt | IfArm, env: Env) -> None:
        if isinstance(st, Assign):
            env[st.target] = abstract_eval(st.value, env)
        elif isinstance(st, AugAssign):
            env[st.target] = _abstract_binary(
                st.op, env.get(st.target, TOP), abstract_eval(st.value, env))

    def join_in(self, bid: int) -> Env | None:
        contribs: list[Env] = []
        if bid in self.entry_envs:
            contribs.append(self.entry_envs[bid])
        for e in self.cfg.preds[bid]:
            env = self.edge_env(e)
            if env is not None:
                contribs.append(env)
        if not contribs:
            return None
        out: Env = {}
        keys = set()
        for env in contribs:
            keys |= set(env)
        for k in keys:
            vals = [env[k] for env in contribs if k in env]
            acc = vals[0]
            for v in vals[1:]:
                acc = join_values(acc, v)
            out[k] = acc
        return out

    def solve(self) -> None:
        work = list(self.entry_envs)
        visits = 0
        max_visits = (len(self.cfg.blocks) + 1) * 200
        while work:
            visits += 1
            if visits > max_visits:  # pragma: no cover - safety net
                raise RuntimeError("interval fixpoint failed to stabilize")
            bid = work.pop(0)
            new_in = self.join_in(bid)
            if new_in is None:
                continue
            old_in = self.in_env.get(bid)
            if bid in self.cfg.loop_headers and old_in is not None:
                new_in = self._header_merge(bid, old_in, new_in)
            if old_in == new_in and bid in self.out_env:
                continue
            self.iterations += 1  # a state-changing visit
            self.in_env[bid] = new_in
            out = self.transfer_block(bid, new_in)
            if out != self.out_env.get(bid):
                self.out_env[bid] = out
                for e in self.cfg.succs[bid]:
                    if e.dst not in work:
                        work.append(e.dst)

    def _header_merge(self, bid: int, old: Env, new: Env) -> Env:
        merged: Env = {}
        for var in set(old) | set(new):
            a, b = old.get(var), new.get(var)
            joined = join_values(a, b)
            if isinstance(a, IntRange) and isinstance(joined, IntRange) \
                    and joined != a:
                key = (bid, var)
                self.grow[key] = self.grow.get(key, 0) + 1
                if self.grow[key] >= WIDEN_AFTER:
                    joined = widen_values(a, joined)
            merged[var] = joined
        return merged

    def narrow(self) -> None:
        order = [b.id for b in self.cfg.blocks if b.id in self.in_env]
        for _ in range(NARROWING_PASSES):
            for bid in order:
                new_in = self.join_in(bid)
                if new_in is None:
                    continue
                self.in_env[bid] = new_in
                self.out_env[bid] = self.transfer_block(bid, new_in)


def interval_analysis(program: Program, cfg: Cfg) -> IntervalResult:
    solver = _Solver(program, cfg)
    solver.solve()
    solver.narrow()
    before: dict[int, Env | None] = {}
    after: dict[int, Env | None] = {}
    for blk in cfg.blocks:
        env = solver.in_env.get(blk.id)
        for nid in blk.stmts:
            st = solver.node_stmt[nid]
            before[nid] = None if env is None else dict(env)
            if env is not None and not isinstance(st, (If, IfArm, While,
                                                       ForRange)):
                env = dict(env)
                solver.transfer_stmt(st, env)
            after[nid] = None if env is None else dict(env)
    # Loops: "after" means the exit state — the false edge out of the
    # header joined with every break site's state.
    for node in walk(program):
        if not isinstance(node, (While, ForRange)):
            continue
        hdr_out = solver.out_env.get(cfg.node_block[node.node_id])
        exits: list[Env] = []
        if hdr_out is not None:
            if isinstance(node, While):
                ex = refine(hdr_out, node.condition, False)
            else:
                ex = hdr_out
            if ex is not None:
                exits.append(ex)
        for br in _breaks_of(node):
            env = solver.out_env.get(cfg.node_block.get(br.node_id, -1))
            if env is not None:
                exits.append(env)
        after[node.node_id] = _join_envs(exits)
    result = IntervalResult(before=before, after=after,
                            iterations=solver.iterations)
    return result


def _join_envs(envs: list[Env]) -> Env | None:
    if not envs:
        return None
    keys = set()
    for env in envs:
        keys |= set(env)
    out: Env = {}
    for k in keys:
        vals = [env[k] for env in envs if k in env]
        acc = vals[0]
        for v in vals[1:]:
            acc = join_values(acc, v)
        out[k] = acc
    return out


def _breaks_of(loop) -> list:
    """Break statements belonging to this loop (not to nested loops)."""
    from ..lang.ast import Break
    found: list = []

    def scan(stmts) -> None:
        for st in stmts:
            if isinstance(st, Break):
                found.append(st)
            elif isinstance(st, If):
                for arm in st.arms:
                    scan(arm.body)
                if st.else_body:
                    scan(st.else_body)
            # While/ForRange own their breaks; FuncDef can't hold a bare one.

    scan(loop.body)
    return found
