"""Finite-model classification of branch/loop conditions.

A condition in the decidable fragment — boolean combinations of
comparisons between names and Int/Str/Bool literals, or between two names
of the same known abstract type — is evaluated over a small candidate
grid. If every combination is true the condition is a Tautology, if every
one is false it is a Contradiction, otherwise it is Contingent. Anything
outside the fragment (floats, arithmetic, calls) is Undecided.

The candidate construction is the definition of the check, so it is
spelled out here precisely:

* Variables linked by name-vs-name comparisons form a cluster and share
  one pool per type.
* Int pool: every Int literal compared against the cluster, each such
  literal minus one and plus one, and a sentinel ``max(literals) + 2``
  (1 when there are no literals). Clusters with two or more variables get
  a second sentinel one above the first so unequal assignments exist.
* Str pool: every Str literal plus one fresh string (a run of ``~`` one
  longer than the longest literal); clusters with two or more variables
  get a second fresh string one longer still.
* Bool pool: ``{False, True}``.
* The abstract environment then filters each variable's pool down to the
  values it can actually hold; if that empties the pool, the environment's
  own finite bounds/members are used instead.

Evaluation follows runtime semantics: ``==``/``!=`` across types are
False/True, ordering across types or a non-Bool in a boolean position
would raise — any such combination makes the whole condition Undecided.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

from ..lang.ast import (
    BoolLit, BoolOp, Compare, Expr, IntLit, Name, StrLit, Unary,
)
from .domains import BoolSet, IntRange, StrSet, TOP, value_covers

MAX_COMBINATIONS = 50_000


class ConditionClass(enum.Enum):
    TAUTOLOGY = "tautology"
    CONTRADICTION = "contradiction"
    CONTINGENT = "contingent"
    UNDECIDED = "undecided"


class _OutsideFragment(Exception):
    pass


class _EvalTypeError(Exception):
    pass


def classify_condition(condition: Expr, env: dict | None = None) -> ConditionClass:
    env = env or {}
    try:
        grid = build_candidate_grid(condition, env)
    except _OutsideFragment:
        return ConditionClass.UNDECIDED
    names = sorted(grid)
    pools = [grid[n] for n in names]
    total = 1
    for pool in pools:
        total *= len(pool)
        if total > MAX_COMBINATIONS:
            return ConditionClass.UNDECIDED
    # The whole grid is scanned: a combination that would raise at
    # runtime poisons the verdict even if both outcomes were already seen.
    saw_true = saw_false = False
    for combo in itertools.product(*pools) if names else ((),):
        binding = dict(zip(names, combo))
        try:
            outcome = _eval(condition, binding)
        except _EvalTypeError:
            return ConditionClass.UNDECIDED
        if outcome:
            saw_true = True
        else:
            saw_false = True
    if saw_true and saw_false:
        return ConditionClass.CONTINGENT
    if saw_true:
        return ConditionClass.TAUTOLOGY
    if saw_false:
        return ConditionClass.CONTRADICTION
    return ConditionClass.UNDECIDED  # pragma: no cover - grid never empty


@dataclass
class _VarInfo:
    int_lits: set[int] = field(default_factory=set)
    str_lits: set[str] = field(default_factory=set)
    bool_use: bool = False       # appears where a Bool is required
    compared: bool = False       # appears in any comparison
    peers: set[str] = field(default_factory=set)  # name-vs-name partners


def build_candidate_grid(condition: Expr, env: dict) -> dict[str, list]:
    """Candidate pool per variable; raises when outside the fragment."""
    info: dict[str, _VarInfo] = {}
    _collect(condition, info, bool_position=True)

    clusters = _clusters(info)
    grid: dict[str, list] = {}
    for cluster in clusters:
        int_lits: set[int] = set()
        str_lits: set[str] = set()
        for v in cluster:
            int_lits |= info[v].int_lits
            str_lits |= info[v].str_lits
        multi = len(cluster) > 1

        int_pool: list[int] = []
        if int_lits or _any_env_is(env, cluster, IntRange):
            base: set[int] = set()
            for lit in int_lits:
                base.update((lit - 1, lit, lit + 1))
            sentinel = max(int_lits) + 2 if int_lits else 1
            base.add(sentinel)
            if multi:
                base.add(sentinel + 1)
            int_pool = sorted(base)
        str_pool: list[str] = []
        if str_lits or _any_env_is(env, cluster, StrSet):
            longest = max((len(s) for s in str_lits), default=0)
            fresh = ["~" * (longest + 1)]
            if multi:
                fresh.append("~" * (longest + 2))
            str_pool = sorted(str_lits) + fresh
        bool_pool: list[bool] = []
        if any(info[v].bool_use for v in cluster) or \
                _any_env_is(env, cluster, BoolSet) or \
                not (int_pool or str_pool):
            bool_pool = [False, True]

        for v in cluster:
            pool = int_pool + str_pool + bool_pool
            known = env.get(v, TOP)
            filtered = [c for c in pool if value_covers(known, c)]
            if not filtered:
                filtered = _env_members(known)
            if not filtered:
                raise _OutsideFragment  # e.g. env says Float
            grid[v] = filtered
    return grid


def _any_env_is(env: dict, cluster: frozenset[str], variant: type) -> bool:
    return any(isinstance(env.get(v), variant) for v in cluster)


def _env_members(known) -> list:
    if isinstance(known, IntRange):
        out = set()
        if known.iv.lo is not None:
            out.add(known.iv.lo)
        if known.iv.hi is not None:
            out.add(known.iv.hi)
        return sorted(out)
    if isinstance(known, StrSet) and not known.is_top:
        return sorted(known.values)
    if isinstance(known, BoolSet):
        return sorted(known.values)
    return []


def _collect(e: Expr, info: dict[str, _VarInfo], bool_position: bool) -> None:
    if isinstance(e, BoolLit):
        return
    if isinstance(e, Name):
        entry = info.setdefault(e.ident, _VarInfo())
        if bool_position:
            entry.bool_use = True
        return
    if isinstance(e, Unary) and e.op == "not":
        _collect(e.operand, info, bool_position=True)
        return
    if isinstance(e, BoolOp):
        for operand in e.operands:
            _collect(operand, info, bool_position=True)
        return
    if isinstance(e, Compare):
        lhs, rhs = e.lhs, e.rhs
        if isinstance(lhs, Name) and isinstance(rhs, Name):
            a = info.setdefault(lhs.ident, _VarInfo())
            b = info.setdefault(rhs.ident, _VarInfo())
            a.compared = b.compared = True
            a.peers.add(rhs.ident)
            b.peers.add(lhs.ident)
            return
        for name_side, lit_side in ((lhs, rhs), (rhs, lhs)):
            if isinstance(name_side, Name):
                entry = info.setdefault(name_side.ident, _VarInfo())
                entry.compared = True
                lit = _literal(lit_side)
                if isinstance(lit, bool):
                    entry.bool_use = True
                elif isinstance(lit, int):
                    entry.int_lits.add(lit)
                else:
                    entry.str_lits.add(lit)
                return
        _literal(lhs)
        _literal(rhs)  # literal-vs-literal: degenerate but evaluable
        return
    raise _OutsideFragment


def _literal(e: Expr):
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, StrLit):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, Unary) and e.op == "-" and isinstance(e.operand, IntLit):
        return -e.operand.value
    raise _OutsideFragment


def _clusters(info: dict[str, _VarInfo]) -> list[frozenset[str]]:
    seen: set[str] = set()
    out: list[frozenset[str]] = []
    for v in info:
        if v in seen:
            continue
        group = {v}
        frontier = [v]
        while frontier:
            cur = frontier.pop()
            for peer in info[cur].peers:
                if peer not in group:
                    group.add(peer)
                    frontier.append(peer)
        seen |= group
        out.append(frozenset(group))
    return out


def _eval(e: Expr, binding: dict) -> bool:
    v = _eval_value(e, binding)
    if type(v) is not bool:
        raise _EvalTypeError
    return v


def _eval_value(e: Expr, binding: dict):
    if isinstance(e, Name):
        return binding[e.ident]
    if isinstance(e, (IntLit, StrLit, BoolLit)):
        return e.value
    if isinstance(e, Unary):
        if e.op == "not":
            return not _eval(e.operand, binding)
        inner = _eval_value(e.operand, binding)
        if type(inner) is int:
            return -inner
        raise _EvalTypeError
    if isinstance(e, BoolOp):
        if e.op == "and":
            return all(_eval(op, binding) for op in e.operands)
        return any(_eval(op, binding) for op in e.operands)
    if isinstance(e, Compare):
        lhs = _eval_value(e.lhs, binding)
        rhs = _eval_value(e.rhs, binding)
        same = type(lhs) is type(rhs)
        if e.op == "==":
            return lhs == rhs if same else False
        if e.op == "!=":
            return lhs != rhs if same else True
        if not same or type(lhs) is bool:
            raise _EvalTypeError
        return {"<": lhs < rhs, "<=": lhs <= rhs,
                ">": lhs > rhs, ">=": lhs >= rhs}[e.op]
    raise _OutsideFragment
