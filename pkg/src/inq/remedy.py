"""The prevention step: synthesize assertions and reminder comments,
insert them behind toggleable markers, and strip them back out without
ever touching a user line.

Marker grammar (bit-exact): two spaces, `#`, space, `[inq:`, eight
lowercase hex digits, `]`, end of line. The stripper is lexer-aware — a
look-alike inside a string literal is never a marker.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from .analysis import ProgramAnalyses
from .inquiry import node_paths
from .lang.ast import (
    Break, Comment, ForRange, IfArm, Node, Program, Stmt, While, walk,
)
from .lang.parser import parse
from .lang.printer import pretty_print
from .smells import Diagnostic

MARKER_TAIL = re.compile(r"  # \[inq:([0-9a-f]{8})\]$")


class StaleAnchor(ValueError):
    """The document no longer contains the remedy's anchor node."""


@dataclass(frozen=True)
class Remedy:
    kind: str       # "Assertion" | "Comment"
    anchor: int     # NodeId in the document the remedy was synthesized for
    placement: str  # "before" | "after" | "loop-exit"
    text: str       # one line, without indentation or marker
    marker_id: str  # 8 lowercase hex digits

    def __post_init__(self) -> None:
        assert self.kind in ("Assertion", "Comment")
        assert self.placement in ("before", "after", "loop-exit")
        assert "\n" not in self.text
        assert re.fullmatch(r"[0-9a-f]{8}", self.marker_id)


def synthesize(diagnostic: Diagnostic,
               analyses: ProgramAnalyses) -> list[Remedy]:
    """At most two insertions per diagnostic, each a single line."""
    if diagnostic.severity != "question-worthy":
        return []
    program = analyses.program
    rule = diagnostic.rule_id
    make = _Maker(program)
    if rule == "S01":
        return [make.comment(diagnostic.node, "before",
                             _s01_text(program, diagnostic))]
    if rule == "S04":
        names = diagnostic.evidence["unchanged"].split(",")
        listed = ", ".join(f"'{n}'" for n in names)
        return [make.comment(
            diagnostic.node, "before",
            f"# This loop cannot finish: the body never changes {listed}")]
    if rule == "S02":
        node = _node(program, diagnostic.node)
        if isinstance(node, ForRange):
            text = "# Dead code: this range is empty, the body never runs"
        else:
            text = "# Dead code: this condition is never true here"
        return [make.comment(diagnostic.node, "before", text)]
    if rule == "S05":
        if diagnostic.evidence.get("condition") == "contradiction":
            text = "# Dead code: this condition is never true here"
        else:
            text = "# This condition is always true here"
        return [make.comment(diagnostic.node, "before", text)]
    if rule == "S03":
        pack = exit_assertion(analyses, diagnostic.node)
        if pack:
            return pack
        node = _node(program, diagnostic.node)
        first = next(s for s in node.body if not isinstance(s, Comment))
        word = "break" if isinstance(first, Break) else "return"
        return [make.comment(
            diagnostic.node, "before",
            f"# At most one pass: '{word}' exits the loop immediately")]
    if rule == "S07":
        site = analyses.cfg.expr_site.get(diagnostic.node)
        if site is None:
            return []
        var = analyses.reaching.use_var[diagnostic.node]
        return [make.comment(
            site, "before",
            f"# '{var}' has no value yet when this line runs")]
    # S06 gets its teaching from the question/explanation flow; a comment
    # would only restate the explanation.
    return []


def exit_assertion(analyses: ProgramAnalyses, loop_id: int) -> list[Remedy]:
    """Loop-exit assertion pack for a finite loop with an induction
    variable whose exit interval is finite: a one-line comment plus
    `assert a <= v and v <= b`. Empty when any ingredient is missing."""
    program = analyses.program
    node = _node(program, loop_id)
    if not isinstance(node, (While, ForRange)):
        return []
    bound = analyses.bound(loop_id)
    if bound.kind not in ("exact", "range") or bound.hi is None:
        return []
    var = _induction_var(node)
    if var is None:
        return []
    interval = analyses.intervals.value_after(loop_id, var)
    from .analysis.domains import IntRange
    if not isinstance(interval, IntRange) or interval.iv.lo is None or \
            interval.iv.hi is None:
        return []
    a, b = interval.iv.lo, interval.iv.hi
    make = _Maker(program)
    return [
        make.comment(loop_id, "loop-exit",
                     f"# After the loop, {var} is between {a} and {b}"),
        make.remedy("Assertion", loop_id, "loop-exit",
                    f"assert {a} <= {var} and {var} <= {b}"),
    ]


def _induction_var(node: While | ForRange) -> str | None:
    if isinstance(node, ForRange):
        return node.var
    from .analysis.bounds import _linear_comparison, _single_step
    comp = _linear_comparison(node.condition)
    if comp is None:
        return None
    var = comp[0]
    return var if _single_step(node.body, var) is not None else None


def _s01_text(program: Program, diagnostic: Diagnostic) -> str:
    node = _node(program, diagnostic.node)
    from .lang.ast import BoolOp, Compare
    cond = node.condition
    if isinstance(cond, BoolOp) and cond.op == "or" and all(
            isinstance(op, Compare) and op.op == "!="
            for op in cond.operands):
        return "# This loop cannot exit: 'or' of two != tests is always true"
    return "# This loop cannot exit: its condition is always true"


class _Maker:
    """Stamps remedies with content-derived marker ids: hash of the
    document's canonical text, the anchor's structural path, and the
    remedy line. Fresh synthesis over a changed document (including one
    that already carries remedies) therefore never repeats an id."""

    def __init__(self, program: Program) -> None:
        self._canon = pretty_print(program)
        self._paths = node_paths(program)

    def remedy(self, kind: str, anchor: int, placement: str,
               text: str) -> Remedy:
        if kind == "Assertion":
            check = parse(text + "\n")
            assert not check.errors and len(check.program.statements) == 1, \
                f"assertion does not parse: {text!r}"
        seed = f"{self._canon}|{self._paths.get(anchor)}|{placement}|{text}"
        marker = hashlib.sha256(seed.encode("utf-8")).hexdigest()[:8]
        return Remedy(kind=kind, anchor=anchor, placement=placement,
                      text=text, marker_id=marker)

    def comment(self, anchor: int, placement: str, text: str) -> Remedy:
        return self.remedy("Comment", anchor, placement, text)


def apply(source: str, remedies: list[Remedy]) -> str:
    """Insert each remedy line, indented to its anchor and suffixed with
    its marker. Raises StaleAnchor when an anchor is gone."""
    if not remedies:
        return source
    result = parse(source)
    if result.errors:
        raise ValueError("source does not parse; cannot anchor remedies")
    program = result.program
    nodes = {n.node_id: n for n in walk(program)}
    # Two diagnostics can prescribe the same line at the same spot (a dead
    # arm is both S02 and S05): identical remedies collapse to one. A
    # repeated id with different content, or one already in the document,
    # is a caller bug.
    unique: dict[str, Remedy] = {}
    for remedy in remedies:
        prior = unique.get(remedy.marker_id)
        if prior is not None and prior != remedy:
            raise ValueError("duplicate remedy marker")
        unique[remedy.marker_id] = remedy
    if any(f"[inq:{m}]" in source for m in unique):
        raise ValueError("remedy marker already present in document")
    lines = source.split("\n")
    plan: list[tuple[int, int, str]] = []  # (line index, order, text)
    for order, remedy in enumerate(unique.values()):
        node = nodes.get(remedy.anchor)
        if node is None:
            raise StaleAnchor(f"no node {remedy.anchor} in this document")
        index, indent = _insertion_point(node, remedy.placement)
        plan.append((index, order,
                     " " * indent + remedy.text
                     + f"  # [inq:{remedy.marker_id}]"))
    for index, _, text in sorted(plan, key=lambda p: (-p[0], -p[1])):
        lines.insert(index, text)
    out = "\n".join(lines)
    assert not parse(out).errors, "remedied source must still parse"
    return out


def _insertion_point(node: Node, placement: str) -> tuple[int, int]:
    if placement in ("after", "loop-exit"):
        if placement == "loop-exit" and not isinstance(node,
                                                       (While, ForRange)):
            raise StaleAnchor("loop-exit anchor is not a loop anymore")
        last = max(n.span.end_line for n in walk(node))
        return last, node.span.start_col - 1
    if isinstance(node, IfArm):
        # The arm's body is the region being marked; its header line
        # cannot legally be preceded by a comment between arms.
        first = node.body[0]
        return first.span.start_line - 1, first.span.start_col - 1
    if not isinstance(node, Stmt):
        raise StaleAnchor(f"cannot anchor before a {type(node).__name__}")
    return node.span.start_line - 1, node.span.start_col - 1


def strip_markers(source: str, show: bool) -> str:
    """show=True is the identity; show=False removes every marked line."""
    if show:
        return source
    lines = source.split("\n")
    return "\n".join(line for line in lines if not _is_marked(line))


def toggle_line_count(source: str) -> int:
    """How many lines the hide-toggle would remove (UI affordance)."""
    return sum(1 for line in source.split("\n") if _is_marked(line))


def _is_marked(line: str) -> bool:
    tail = MARKER_TAIL.search(line)
    if tail is None:
        return False
    comment_start = _comment_start(line)
    return comment_start is not None and comment_start <= tail.start() + 2


def _comment_start(line: str) -> int | None:
    """Offset of the first `#` outside a string literal, if any."""
    quote: str | None = None
    i = 0
    while i < len(line):
        ch = line[i]
        if quote is not None:
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                quote = None
        elif ch in ("'", '"'):
            quote = ch
        elif ch == "#":
            return i
        i += 1
    return None


def _node(program: Program, node_id: int) -> Node:
    return next(n for n in walk(program) if n.node_id == node_id)
