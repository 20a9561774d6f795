"""Control-flow graph construction for NovLang programs.

Blocks hold NodeIds of executable statements (comments are skipped).
Loop headers are their own blocks containing just the While/ForRange node;
the loop's condition/iteration check notionally evaluates there. Edge
kinds: fallthrough, true-branch, false-branch, loop-back. break is wired
to the loop's continuation, continue back to the header.

Function bodies are disconnected islands with their own entry blocks
(intraprocedural analysis); `reachable` covers the program entry plus
every function entry, so it means "structurally executable", not
"reachable from a call site".
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lang.ast import (
    Assert, Assign, AugAssign, Break, Comment, Continue, Expr, ExprStmt,
    ForRange, FuncDef, If, Node, Pass, Program, Return, Stmt, While, walk,
)


@dataclass
class Block:
    id: int
    stmts: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str  # "fallthrough" | "true-branch" | "false-branch" | "loop-back"


@dataclass
class Cfg:
    blocks: list[Block]
    edges: list[Edge]
    entry: int
    loop_headers: dict[int, int]  # block id -> loop statement NodeId
    node_block: dict[int, int]    # statement/arm NodeId -> block id
    expr_site: dict[int, int]     # expression NodeId -> evaluating stmt NodeId
    func_entries: dict[str, int]  # function name -> entry block id
    reachable: set[int]
    succs: dict[int, list[Edge]]
    preds: dict[int, list[Edge]]

    def block_of(self, node_id: int) -> int | None:
        return self.node_block.get(node_id)


# A cursor tracks "where flow stands" while building:
#   ("block", Block)      — an open block statements can append to
#   ("pending", [(src block id, kind), ...]) — edges waiting for a target
#   ("dead", None)        — flow cannot arrive here (after break/return)
_DEAD = ("dead", None)


@dataclass
class _LoopCtx:
    header: int
    breaks: list[int] = field(default_factory=list)


class _Builder:
    def __init__(self) -> None:
        self.blocks: list[Block] = []
        self.edges: list[Edge] = []
        self.loop_headers: dict[int, int] = {}
        self.node_block: dict[int, int] = {}
        self.expr_site: dict[int, int] = {}
        self.func_entries: dict[str, int] = {}

    def new_block(self) -> Block:
        blk = Block(len(self.blocks))
        self.blocks.append(blk)
        return blk

    def edge(self, src: int, dst: int, kind: str) -> None:
        self.edges.append(Edge(src, dst, kind))

    def _materialize(self, cursor) -> Block:
        """Turn a cursor into an open block, wiring pending edges into it."""
        tag, payload = cursor
        if tag == "block":
            return payload
        blk = self.new_block()
        if tag == "pending":
            for src, kind in payload:
                self.edge(src, blk.id, kind)
        return blk

    def _fresh_after(self, cursor) -> Block:
        """A new block that control falls into from the cursor position."""
        tag, payload = cursor
        blk = self.new_block()
        if tag == "block":
            self.edge(payload.id, blk.id, "fallthrough")
        elif tag == "pending":
            for src, kind in payload:
                self.edge(src, blk.id, kind)
        return blk

    @staticmethod
    def _exits_of(cursor) -> list[tuple[int, str]]:
        tag, payload = cursor
        if tag == "block":
            return [(payload.id, "fallthrough")]
        if tag == "pending":
            return list(payload)
        return []

    def _note_exprs(self, site: int, *exprs: Expr | None) -> None:
        for e in exprs:
            if e is None:
                continue
            for node in walk(e):
                self.expr_site[node.node_id] = site

    def _put(self, cursor, st: Stmt) -> Block:
        blk = self._materialize(cursor)
        blk.stmts.append(st.node_id)
        self.node_block[st.node_id] = blk.id
        return blk

    def flow(self, stmts: list[Stmt], cursor, loop: _LoopCtx | None):
        for st in stmts:
            if isinstance(st, Comment):
                continue
            if isinstance(st, (Assign, AugAssign, ExprStmt, Pass, Assert,
                               Return, Break, Continue, FuncDef)):
                blk = self._put(cursor, st)
                cursor = ("block", blk)
                if isinstance(st, Assign) or isinstance(st, AugAssign):
                    self._note_exprs(st.node_id, st.value)
                elif isinstance(st, ExprStmt):
                    self._note_exprs(st.node_id, st.value)
                elif isinstance(st, Assert):
                    self._note_exprs(st.node_id, st.condition, st.message)
                elif isinstance(st, Return):
                    self._note_exprs(st.node_id, st.value)
                    cursor = _DEAD
                elif isinstance(st, Break):
                    assert loop is not None
                    loop.breaks.append(blk.id)
                    cursor = _DEAD
                elif isinstance(st, Continue):
                    assert loop is not None
                    self.edge(blk.id, loop.header, "loop-back")
                    cursor = _DEAD
                elif isinstance(st, FuncDef):
                    entry = self.new_block()
                    self.func_entries[st.name] = entry.id
                    self.flow(st.body, ("block", entry), None)
            elif isinstance(st, While):
                cursor = self._loop(st, cursor, st.condition)
            elif isinstance(st, ForRange):
                cursor = self._loop(st, cursor, None)
            elif isinstance(st, If):
                cursor = self._if(st, cursor, loop)
            else:  # pragma: no cover
                raise AssertionError(f"unhandled stmt {type(st).__name__}")
        return cursor

    def _start_header(self, cursor, st: Stmt) -> Block:
        tag, payload = cursor
        if tag == "block" and not payload.stmts:
            header = payload
        else:
            header = self._fresh_after(cursor)
        header.stmts.append(st.node_id)
        self.node_block[st.node_id] = header.id
        self.loop_headers[header.id] = st.node_id
        return header

    def _loop(self, st, cursor, condition):
        header = self._start_header(cursor, st)
        if condition is not None:
            self._note_exprs(st.node_id, condition)
        else:
            self._note_exprs(st.node_id, st.start, st.stop, st.step)
        ctx = _LoopCtx(header.id)
        end = self.flow(st.body, ("pending", [(header.id, "true-branch")]), ctx)
        for src, kind in self._exits_of(end):
            self.edge(src, header.id, "loop-back" if kind == "fallthrough"
                      else kind)
        exits = [(header.id, "false-branch")]
        exits.extend((b, "fallthrough") for b in ctx.breaks)
        return ("pending", exits)

    def _if(self, st: If, cursor, loop):
        exits: list[tuple[int, str]] = []
        false_edge: tuple[int, str] | None = None
        for k, arm in enumerate(st.arms):
            if k == 0:
                cond_blk = self._put(cursor, st)
            else:
                cond_blk = self.new_block()
                assert false_edge is not None
                self.edge(false_edge[0], cond_blk.id, false_edge[1])
                cond_blk.stmts.append(arm.node_id)
                self.node_block[arm.node_id] = cond_blk.id
            self._note_exprs(st.node_id if k == 0 else arm.node_id,
                             arm.condition)
            end = self.flow(arm.body,
                            ("pending", [(cond_blk.id, "true-branch")]), loop)
            exits.extend(self._exits_of(end))
            false_edge = (cond_blk.id, "false-branch")
        if st.else_body is not None:
            end = self.flow(st.else_body, ("pending", [false_edge]), loop)
            exits.extend(self._exits_of(end))
        else:
            exits.append(false_edge)
        return ("pending", exits)


def build_cfg(program: Program) -> Cfg:
    b = _Builder()
    entry = b.new_block()
    b.flow(program.statements, ("block", entry), None)
    succs: dict[int, list[Edge]] = {blk.id: [] for blk in b.blocks}
    preds: dict[int, list[Edge]] = {blk.id: [] for blk in b.blocks}
    for e in b.edges:
        succs[e.src].append(e)
        preds[e.dst].append(e)
    reachable: set[int] = set()
    work = [entry.id] + list(b.func_entries.values())
    while work:
        cur = work.pop()
        if cur in reachable:
            continue
        reachable.add(cur)
        work.extend(e.dst for e in succs[cur])
    return Cfg(blocks=b.blocks, edges=b.edges, entry=entry.id,
               loop_headers=b.loop_headers, node_block=b.node_block,
               expr_site=b.expr_site, func_entries=b.func_entries,
               reachable=reachable, succs=succs, preds=preds)


def dominators(cfg: Cfg) -> dict[int, set[int]]:
    """Block id -> set of dominating block ids (reachable-from-entry only)."""
    nodes = {blk for blk in cfg.reachable
             if blk == cfg.entry or _from_entry(cfg, blk)}
    doms = {n: set(nodes) for n in nodes}
    doms[cfg.entry] = {cfg.entry}
    changed = True
    while changed:
        changed = False
        for n in nodes:
            if n == cfg.entry:
                continue
            pred_doms = [doms[e.src] for e in cfg.preds[n] if e.src in nodes]
            new = ({n} | set.intersection(*pred_doms)) if pred_doms else {n}
            if new != doms[n]:
                doms[n] = new
                changed = True
    return doms


def _from_entry(cfg: Cfg, target: int) -> bool:
    seen = set()
    work = [cfg.entry]
    while work:
        cur = work.pop()
        if cur == target:
            return True
        if cur in seen:
            continue
        seen.add(cur)
        work.extend(e.dst for e in cfg.succs[cur])
    return False
