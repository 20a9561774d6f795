"""Static analyses over parsed programs.

`analyze_program` runs the whole stack once (control flow, reaching
definitions, intervals) and hands back a ProgramAnalyses bundle whose
per-loop bounds and per-condition classifications are memoized, so smell
detection and question generation never recompute a fixpoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lang.ast import ForRange, IfArm, Program, While, walk
from .bounds import IterationBound, NotALoop, const_fold, loop_bound
from .cfg import Cfg, build_cfg, dominators
from .conditions import ConditionClass, classify_condition
from .domains import (
    BOTH_BOOLS, BoolSet, FLOAT_TOP, IntRange, Interval, StrSet, TOP, TOP_STR,
    join_values, value_covers,
)
from .intervals import IntervalResult, interval_analysis
from .reaching import ReachingResult, reaching_definitions

__all__ = [
    "BOTH_BOOLS", "BoolSet", "Cfg", "ConditionClass", "FLOAT_TOP",
    "IntRange", "Interval", "IntervalResult", "IterationBound", "NotALoop",
    "ProgramAnalyses", "ReachingResult", "StrSet", "TOP", "TOP_STR",
    "analyze_program", "build_cfg", "classify_condition", "const_fold",
    "dominators", "interval_analysis", "join_values", "loop_bound",
    "reaching_definitions", "value_covers",
]


@dataclass
class ProgramAnalyses:
    program: Program
    cfg: Cfg
    reaching: ReachingResult
    intervals: IntervalResult
    _bounds: dict[int, IterationBound] = field(default_factory=dict)
    _classes: dict[int, ConditionClass] = field(default_factory=dict)

    def bound(self, loop_id: int) -> IterationBound:
        if loop_id not in self._bounds:
            self._bounds[loop_id] = loop_bound(
                self.program, loop_id, cfg=self.cfg,
                intervals=self.intervals)
        return self._bounds[loop_id]

    def condition_class(self, node_id: int) -> ConditionClass:
        """Classification of a While or IfArm condition under the abstract
        environment that holds where the condition is evaluated."""
        if node_id not in self._classes:
            node = self._node(node_id)
            if not isinstance(node, (While, IfArm)):
                raise ValueError(f"node {node_id} has no condition")
            env = self.intervals.before.get(node_id)
            if env is None and isinstance(node, IfArm):
                # A first arm's condition is evaluated at its If statement.
                parent = self._arm_parent(node_id)
                if parent is not None:
                    env = self.intervals.before.get(parent)
            self._classes[node_id] = classify_condition(node.condition,
                                                        env or {})
        return self._classes[node_id]

    def _arm_parent(self, arm_id: int) -> int | None:
        from ..lang.ast import If
        for n in walk(self.program):
            if isinstance(n, If) and any(a.node_id == arm_id
                                         for a in n.arms):
                return n.node_id
        return None

    def stmt_of_expr(self, expr_id: int) -> int | None:
        """NodeId of the statement that evaluates the given expression."""
        return self.cfg.expr_site.get(expr_id)

    def env_at_expr(self, expr_id: int) -> dict:
        site = self.stmt_of_expr(expr_id)
        if site is None:
            return {}
        return self.intervals.before.get(site) or {}

    def _node(self, node_id: int):
        for n in walk(self.program):
            if n.node_id == node_id:
                return n
        return None


def analyze_program(program: Program) -> ProgramAnalyses:
    cfg = build_cfg(program)
    return ProgramAnalyses(
        program=program,
        cfg=cfg,
        reaching=reaching_definitions(program, cfg),
        intervals=interval_analysis(program, cfg),
    )
