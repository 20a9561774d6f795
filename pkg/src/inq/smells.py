"""Novice-misconception smell catalog.

Nine fixed rules over the analysis results. Every diagnostic carries the
analysis evidence that justifies it, so downstream question generation
can grade answers against facts rather than heuristics. Output order is
deterministic: span start, then rule id.

question-worthy rules (generate questions):
  S01 loop condition is a tautology and the body cannot exit -> infinite
  S02 contradictory condition: a loop or if-arm body never runs
  S03 unconditional break/return opens the loop body: at most one pass
  S04 while-condition variables never assigned inside the body
  S05 if-condition always/never true where it is evaluated
  S06 Str-vs-Int ==/!= comparison: outcome is decided by the types
  S07 variable read before any assignment can reach it
info rules (annotation only):
  S08 bare comparison/boolean expression statement has no effect
  S09 `/` result compared with == against an Int literal
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import ConditionClass, ProgramAnalyses, analyze_program
from .analysis.bounds import _body_can_exit as body_can_exit
from .analysis.domains import IntRange, StrSet
from .lang.ast import (
    Binary, BoolOp, Break, Call, Comment, Compare, Expr, ExprStmt, ForRange,
    If, IfArm, IntLit, Name, Program, Return, SourceSpan, StrLit, While, walk,
)

CATEGORIES = ("loops", "conditionals", "variables", "types", "io")

RULE_CATEGORY = {
    "S01": "loops", "S02": "conditionals", "S03": "loops", "S04": "loops",
    "S05": "conditionals", "S06": "types", "S07": "variables",
    "S08": "conditionals", "S09": "types",
}
INFO_RULES = frozenset(("S08", "S09"))


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    span: SourceSpan
    node: int
    category: str
    severity: str  # "question-worthy" | "info"
    message: str
    evidence: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        assert self.category in CATEGORIES
        if self.severity == "question-worthy":
            assert self.evidence, "question-worthy diagnostics need evidence"


def _diag(rule: str, span: SourceSpan, node: int, message: str,
          **evidence: str) -> Diagnostic:
    return Diagnostic(
        rule_id=rule, span=span, node=node,
        category=RULE_CATEGORY[rule],
        severity="info" if rule in INFO_RULES else "question-worthy",
        message=message, evidence=dict(evidence))


def detect(program: Program,
           analyses: ProgramAnalyses | None = None) -> list[Diagnostic]:
    analyses = analyses or analyze_program(program)
    out: list[Diagnostic] = []
    for node in walk(program):
        if isinstance(node, While):
            out.extend(_check_while(node, analyses))
        elif isinstance(node, ForRange):
            out.extend(_check_for(node, analyses))
        elif isinstance(node, If):
            out.extend(_check_if(node, analyses))
        elif isinstance(node, ExprStmt):
            out.extend(_check_expr_stmt(node))
        elif isinstance(node, Compare):
            out.extend(_check_compare(node, analyses))
    for site in analyses.reaching.unassigned_reads():
        var = analyses.reaching.use_var[site]
        span = analyses.reaching.use_span[site]
        out.append(_diag(
            "S07", span, site,
            f"'{var}' is read here, but no assignment to it can have "
            "happened yet",
            reaching_defs="none"))
    out.sort(key=lambda d: (d.span.start_offset, d.rule_id))
    return out


def _check_while(node: While, analyses: ProgramAnalyses) -> list[Diagnostic]:
    found: list[Diagnostic] = []
    bound = analyses.bound(node.node_id)
    klass = analyses.condition_class(node.node_id)
    if bound.kind == "infinite":
        found.append(_diag(
            "S01", node.header_span, node.node_id,
            "this loop can never exit: its condition stays true and "
            "nothing in the body breaks out",
            bound="infinite", condition=klass.value))
    if klass is ConditionClass.CONTRADICTION:
        found.append(_diag(
            "S02", node.header_span, node.node_id,
            "this loop body never runs: the condition is false every "
            "time it is checked",
            bound=bound.kind, condition=klass.value))
    found.extend(_check_loop_shape(node, analyses, bound))
    cond_vars = _stuck_condition_vars(node, analyses)
    if cond_vars and not body_can_exit(node.body):
        found.append(_diag(
            "S04", node.header_span, node.node_id,
            "the loop condition depends on "
            f"{_var_list(cond_vars)}, and the body never changes "
            + ("it" if len(cond_vars) == 1 else "any of them"),
            bound=bound.kind, unchanged=",".join(sorted(cond_vars))))
    return found


def _check_for(node: ForRange, analyses: ProgramAnalyses) -> list[Diagnostic]:
    found: list[Diagnostic] = []
    bound = analyses.bound(node.node_id)
    reachable = analyses.intervals.before.get(node.node_id) is not None
    if reachable and bound.kind == "exact" and bound.lo == 0:
        found.append(_diag(
            "S02", node.header_span, node.node_id,
            "this loop body never runs: the range is empty",
            bound="exact-0"))
    found.extend(_check_loop_shape(node, analyses, bound))
    return found


def _check_loop_shape(node, analyses, bound) -> list[Diagnostic]:
    first = next((s for s in node.body if not isinstance(s, Comment)), None)
    if isinstance(first, (Break, Return)):
        word = "breaks" if isinstance(first, Break) else "returns"
        return [_diag(
            "S03", node.header_span, node.node_id,
            f"the body {word} immediately, so the loop makes at most "
            "one pass",
            bound=bound.kind if bound.kind != "unknown" else "at-most-1")]
    return []


def _stuck_condition_vars(node: While,
                          analyses: ProgramAnalyses) -> set[str]:
    """Condition variables, or empty if the body updates any of them.

    The rule is all-or-nothing: one updated variable is enough for the
    condition to make progress, so `while i < n:` with only `i` moving
    must not be flagged. A call in the condition (input(), a helper)
    can change the outcome between checks all by itself, so those
    conditions are never considered stuck.
    """
    if any(isinstance(n, Call) for n in walk(node.condition)):
        return set()
    cond_vars = {n.ident for n in walk(node.condition)
                 if isinstance(n, Name)}
    if not cond_vars:
        return set()
    body_ids = {sub.node_id for st in node.body for sub in walk(st)}
    reaching = analyses.reaching
    for use_id, var in reaching.use_var.items():
        if var in cond_vars and \
                analyses.cfg.expr_site.get(use_id) == node.node_id:
            if any(d in body_ids for d in reaching.uses.get(use_id, ())):
                return set()
    return cond_vars


def _check_if(node: If, analyses: ProgramAnalyses) -> list[Diagnostic]:
    found: list[Diagnostic] = []
    for arm in node.arms:
        klass = analyses.condition_class(arm.node_id)
        if klass is ConditionClass.CONTRADICTION:
            found.append(_diag(
                "S02", arm.header_span, arm.node_id,
                "this branch never runs: its condition is false every "
                "time it is checked",
                condition=klass.value))
            found.append(_diag(
                "S05", arm.header_span, arm.node_id,
                "this condition is never true here",
                condition=klass.value))
        elif klass is ConditionClass.TAUTOLOGY:
            found.append(_diag(
                "S05", arm.header_span, arm.node_id,
                "this condition is always true here, so the branch "
                "always runs when reached",
                condition=klass.value))
    return found


def _check_expr_stmt(node: ExprStmt) -> list[Diagnostic]:
    if isinstance(node.value, (Compare, BoolOp)):
        return [_diag(
            "S08", node.span, node.node_id,
            "this comparison is computed and thrown away — it does not "
            "change anything")]
    return []


def _check_compare(node: Compare,
                   analyses: ProgramAnalyses) -> list[Diagnostic]:
    found: list[Diagnostic] = []
    if node.op in ("==", "!="):
        sides = (_side_type(node.lhs, node, analyses),
                 _side_type(node.rhs, node, analyses))
        if {"int", "str"} == {t for t in sides if t}:
            outcome = "False" if node.op == "==" else "True"
            found.append(_diag(
                "S06", node.span, node.node_id,
                f"comparing Str with Int: this is always {outcome}, the "
                "values are never equal across types",
                outcome=outcome, types="str-vs-int"))
    if node.op == "==" and (
            _is_true_division(node.lhs) and isinstance(node.rhs, IntLit) or
            _is_true_division(node.rhs) and isinstance(node.lhs, IntLit)):
        found.append(_diag(
            "S09", node.span, node.node_id,
            "`/` always produces a Float; comparing it to an Int with == "
            "is fragile — consider `//`"))
    return found


def _side_type(e: Expr, compare: Compare,
               analyses: ProgramAnalyses) -> str | None:
    if isinstance(e, IntLit):
        return "int"
    if isinstance(e, StrLit):
        return "str"
    if isinstance(e, Name):
        value = analyses.env_at_expr(compare.node_id).get(e.ident)
        if isinstance(value, IntRange):
            return "int"
        if isinstance(value, StrSet):
            return "str"
    return None


def _is_true_division(e: Expr) -> bool:
    return isinstance(e, Binary) and e.op == "/"


def _var_list(names: set[str]) -> str:
    ordered = sorted(names)
    if len(ordered) == 1:
        return f"'{ordered[0]}'"
    return ", ".join(f"'{n}'" for n in ordered[:-1]) + f" and '{ordered[-1]}'"
