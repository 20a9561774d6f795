"""Reaching definitions (forward may-analysis) over the CFG.

Definition sites are Assign/AugAssign statements, ForRange loop variables,
and function parameters (a Param node counts as a definition bound at
function entry). Use sites are Name expression nodes, plus AugAssign
statements for the read of their own target.

Function bodies are analyzed with an entry state holding their parameter
bindings plus every top-level definition (a call may happen after any of
them; writes inside functions are always local, so only top-level code
defines globals). A use whose reaching set comes out empty is a
read-before-assignment candidate — that feeds smell S07.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lang.ast import (
    Assert, Assign, AugAssign, ExprStmt, ForRange, FuncDef, If, IfArm, Name,
    Program, Return, Stmt, While, walk,
)
from .cfg import Cfg

State = dict[str, frozenset[int]]


@dataclass
class ReachingResult:
    uses: dict[int, frozenset[int]]  # use-site NodeId -> reaching def NodeIds
    use_var: dict[int, str]          # use-site NodeId -> variable name
    use_span: dict[int, object]      # use-site NodeId -> SourceSpan
    defs_of: dict[str, set[int]] = field(default_factory=dict)

    def unassigned_reads(self) -> list[int]:
        """Use sites no definition (or parameter) can reach, in id order."""
        return sorted(nid for nid, defs in self.uses.items() if not defs)


def _join(states: list[State]) -> State:
    out: State = {}
    for st in states:
        for var, defs in st.items():
            out[var] = out.get(var, frozenset()) | defs
    return out


class _Pass:
    """One transfer walk over a block; records uses when ``record`` is set."""

    def __init__(self, result: ReachingResult | None) -> None:
        self.result = result

    def use(self, site: int, var: str, span, state: State) -> None:
        if self.result is not None:
            self.result.uses[site] = state.get(var, frozenset())
            self.result.use_var[site] = var
            self.result.use_span[site] = span

    def expr_uses(self, expr, state: State) -> None:
        if expr is None:
            return
        for node in walk(expr):
            if isinstance(node, Name):
                self.use(node.node_id, node.ident, node.span, state)

    def transfer(self, st: Stmt | IfArm, state: State) -> None:
        if isinstance(st, Assign):
            self.expr_uses(st.value, state)
            state[st.target] = frozenset((st.node_id,))
        elif isinstance(st, AugAssign):
            self.use(st.node_id, st.target, st.target_span, state)
            self.expr_uses(st.value, state)
            state[st.target] = frozenset((st.node_id,))
        elif isinstance(st, ExprStmt):
            self.expr_uses(st.value, state)
        elif isinstance(st, If):
            self.expr_uses(st.arms[0].condition, state)
        elif isinstance(st, IfArm):
            self.expr_uses(st.condition, state)
        elif isinstance(st, While):
            self.expr_uses(st.condition, state)
        elif isinstance(st, ForRange):
            self.expr_uses(st.start, state)
            self.expr_uses(st.stop, state)
            self.expr_uses(st.step, state)
            state[st.var] = frozenset((st.node_id,))
        elif isinstance(st, Return):
            self.expr_uses(st.value, state)
        elif isinstance(st, Assert):
            self.expr_uses(st.condition, state)
            self.expr_uses(st.message, state)
        # Break/Continue/Pass/FuncDef define and use nothing here.


def reaching_definitions(program: Program, cfg: Cfg) -> ReachingResult:
    node_stmt: dict[int, Stmt | IfArm] = {}
    for node in walk(program):
        if isinstance(node, (Stmt, IfArm)):
            node_stmt[node.node_id] = node

    # Seed states: program entry is empty; each function entry gets params
    # plus the top-level (non-island) definitions as may-defs.
    island_blocks = _function_blocks(cfg)
    top_defs: State = {}
    for node in walk(program):
        inside_func = cfg.block_of(node.node_id) in island_blocks
        if isinstance(node, (Assign, AugAssign)) and not inside_func:
            top_defs.setdefault(node.target, frozenset())
            top_defs[node.target] |= {node.node_id}
        elif isinstance(node, ForRange) and not inside_func:
            top_defs.setdefault(node.var, frozenset())
            top_defs[node.var] |= {node.node_id}

    entry_state: dict[int, State] = {cfg.entry: {}}
    for node in walk(program):
        if isinstance(node, FuncDef):
            seed = dict(top_defs)
            for p in node.params:
                seed[p.name] = frozenset((p.node_id,))
            entry_state[cfg.func_entries[node.name]] = seed

    ins: dict[int, State] = {}
    outs: dict[int, State] = {}
    work = list(entry_state)
    while work:
        bid = work.pop(0)
        sources = [outs[e.src] for e in cfg.preds[bid] if e.src in outs]
        if bid in entry_state:
            sources.append(entry_state[bid])
        state = _join(sources)
        if bid in ins and state == ins[bid] and bid in outs:
            continue
        ins[bid] = {k: v for k, v in state.items()}
        walker = _Pass(None)
        for nid in cfg.blocks[bid].stmts:
            walker.transfer(node_stmt[nid], state)
        if bid not in outs or outs[bid] != state:
            outs[bid] = state
            for e in cfg.succs[bid]:
                if e.dst not in work:
                    work.append(e.dst)

    result = ReachingResult(uses={}, use_var={}, use_span={})
    for node in walk(program):
        if isinstance(node, (Assign, AugAssign)):
            result.defs_of.setdefault(node.target, set()).add(node.node_id)
        elif isinstance(node, ForRange):
            result.defs_of.setdefault(node.var, set()).add(node.node_id)
    recorder = _Pass(result)
    for blk in cfg.blocks:
        if blk.id not in cfg.reachable or blk.id not in ins:
            continue
        state = {k: v for k, v in ins[blk.id].items()}
        for nid in blk.stmts:
            recorder.transfer(node_stmt[nid], state)
    return result


def _function_blocks(cfg: Cfg) -> set[int]:
    seen: set[int] = set()
    work = list(cfg.func_entries.values())
    while work:
        cur = work.pop()
        if cur in seen:
            continue
        seen.add(cur)
        work.extend(e.dst for e in cfg.succs[cur])
    return seen
