"""AST for NovLang.

Every node carries a source span and a node id. Node ids are assigned in
pre-order after parsing, so an unmodified program always gets the same ids
back when re-parsed. Comments are ordinary statements (and optional trailing
attachments) so that inserted reminder lines survive round trips.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

BUILTINS = frozenset({"input", "print", "int", "str", "len", "range"})

AUG_OPS = ("+", "-", "*", "//", "%")
BIN_OPS = ("+", "-", "*", "/", "//", "%")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class SourceSpan:
    """Half-open character range [start_offset, end_offset) with 1-based line/col."""

    start_offset: int
    end_offset: int
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def contains(self, other: "SourceSpan") -> bool:
        return self.start_offset <= other.start_offset and other.end_offset <= self.end_offset

    def text(self, source: str) -> str:
        return source[self.start_offset:self.end_offset]


DUMMY_SPAN = SourceSpan(0, 0, 1, 1, 1, 1)


@dataclass
class Node:
    span: SourceSpan = field(default=DUMMY_SPAN, kw_only=True)
    node_id: int = field(default=-1, kw_only=True)


# --- expressions ---

@dataclass
class Expr(Node):
    pass


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class FloatLit(Expr):
    value: float


@dataclass
class StrLit(Expr):
    value: str


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class Name(Expr):
    ident: str


@dataclass
class Unary(Expr):
    op: str  # "-" or "not"
    operand: Expr


@dataclass
class Binary(Expr):
    op: str  # one of BIN_OPS
    lhs: Expr
    rhs: Expr


@dataclass
class Compare(Expr):
    op: str  # one of CMP_OPS
    lhs: Expr
    rhs: Expr


@dataclass
class BoolOp(Expr):
    op: str  # "and" or "or"
    operands: list[Expr]


@dataclass
class Call(Expr):
    func: str
    args: list[Expr]


# --- statements ---

@dataclass
class Stmt(Node):
    # Trailing comment on the statement's (header) line, raw text incl. "#".
    trailing_comment: str | None = field(default=None, kw_only=True)


@dataclass
class Assign(Stmt):
    target: str
    value: Expr
    target_span: SourceSpan = field(default=DUMMY_SPAN, kw_only=True)


@dataclass
class AugAssign(Stmt):
    target: str
    op: str  # one of AUG_OPS
    value: Expr
    target_span: SourceSpan = field(default=DUMMY_SPAN, kw_only=True)


@dataclass
class ExprStmt(Stmt):
    value: Expr


@dataclass
class IfArm(Node):
    condition: Expr
    body: list[Stmt]
    header_span: SourceSpan = field(default=DUMMY_SPAN, kw_only=True)


@dataclass
class If(Stmt):
    arms: list[IfArm]
    else_body: list[Stmt] | None


@dataclass
class While(Stmt):
    condition: Expr
    body: list[Stmt]
    header_span: SourceSpan = field(default=DUMMY_SPAN, kw_only=True)


@dataclass
class ForRange(Stmt):
    """``for var in range(...)``.

    start/stop/step are always present; omitted arguments get synthesized
    literal defaults (0 / 1) with zero-width spans. ``range_arity`` remembers
    how many arguments were written so printing reproduces the source form.
    """

    var: str
    start: Expr
    stop: Expr
    step: Expr
    body: list[Stmt]
    range_arity: int = field(default=3, kw_only=True)
    var_span: SourceSpan = field(default=DUMMY_SPAN, kw_only=True)
    header_span: SourceSpan = field(default=DUMMY_SPAN, kw_only=True)


@dataclass
class Break(Stmt):
    pass


@dataclass
class Continue(Stmt):
    pass


@dataclass
class Pass(Stmt):
    pass


@dataclass
class Return(Stmt):
    value: Expr | None


@dataclass
class Param(Node):
    name: str


@dataclass
class FuncDef(Stmt):
    name: str
    params: list[Param]
    body: list[Stmt]
    header_span: SourceSpan = field(default=DUMMY_SPAN, kw_only=True)


@dataclass
class Assert(Stmt):
    condition: Expr
    message: Expr | None


@dataclass
class Comment(Stmt):
    text: str  # raw text including the leading "#"


@dataclass
class Program(Node):
    statements: list[Stmt]


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.span.start_line}:{self.span.start_col}: {self.message}"


# --- traversal helpers ---

def child_nodes(node: Node) -> list[Node]:
    """Direct child nodes, in source order."""
    out: list[Node] = []
    for f in fields(node):
        if f.name in ("span", "node_id", "header_span", "target_span", "var_span",
                      "trailing_comment", "range_arity"):
            continue
        v = getattr(node, f.name)
        if isinstance(v, Node):
            out.append(v)
        elif isinstance(v, list):
            out.extend(x for x in v if isinstance(x, Node))
    return out


def walk(node: Node):
    """Pre-order traversal of node and all descendants."""
    yield node
    for child in child_nodes(node):
        yield from walk(child)


def assign_node_ids(program: Program) -> dict[int, Node]:
    """Number every node in pre-order; returns the id -> node index."""
    index: dict[int, Node] = {}
    for i, node in enumerate(walk(program)):
        node.node_id = i
        index[i] = node
    return index


def node_index(program: Program) -> dict[int, Node]:
    return {n.node_id: n for n in walk(program)}


_IGNORED_IN_EQ = ("span", "node_id", "header_span", "target_span", "var_span")


def structurally_equal(a: Node | None, b: Node | None) -> bool:
    """Equality ignoring spans and node ids (comments and range arity count)."""
    if a is None or b is None:
        return a is b
    if type(a) is not type(b):
        return False
    for f in fields(a):
        if f.name in _IGNORED_IN_EQ:
            continue
        va, vb = getattr(a, f.name), getattr(b, f.name)
        if isinstance(va, Node) or isinstance(vb, Node):
            if not structurally_equal(va, vb):
                return False
        elif isinstance(va, list):
            if not isinstance(vb, list) or len(va) != len(vb):
                return False
            for xa, xb in zip(va, vb):
                if isinstance(xa, Node):
                    if not structurally_equal(xa, xb):
                        return False
                elif xa != xb:
                    return False
        elif va != vb:
            return False
    return True


def check_span_containment(program: Program) -> list[tuple[int, int]]:
    """Return (parent_id, child_id) pairs whose spans violate containment."""
    bad: list[tuple[int, int]] = []
    for node in walk(program):
        for child in child_nodes(node):
            if not node.span.contains(child.span):
                bad.append((node.node_id, child.node_id))
    return bad
