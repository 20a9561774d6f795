"""Pretty-printer: Program -> canonical NovLang text.

Canonical form is 4-space indents, LF line endings, single-quoted strings
where possible, and minimal parentheses. Comments (standalone and trailing)
are reproduced verbatim, so parse -> pretty_print -> parse is structurally
the identity.
"""
from __future__ import annotations

from decimal import Decimal

from .ast import (
    Assert, Assign, AugAssign, Binary, BoolLit, BoolOp, Break, Call, Comment,
    Compare, Continue, Expr, ExprStmt, FloatLit, ForRange, FuncDef, If, IfArm,
    IntLit, Name, Pass, Program, Return, Stmt, StrLit, Unary, While,
)

INDENT = "    "

# Binding strength; parens are inserted when a child binds looser than its context.
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_ADD = 5
_PREC_MUL = 6
_PREC_UNARY = 7
_PREC_ATOM = 9

_BIN_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL,
             "//": _PREC_MUL, "%": _PREC_MUL}


def pretty_print(program: Program) -> str:
    lines: list[str] = []
    _emit_body(program.statements, 0, lines)
    return "".join(line + "\n" for line in lines)


def stmt_source(stmt: Stmt) -> str:
    """Canonical text of a single statement subtree, unindented."""
    lines: list[str] = []
    _emit_stmt(stmt, 0, lines)
    return "\n".join(lines)


def expr_source(e: Expr) -> str:
    """Canonical text of an expression."""
    return _expr(e)


def node_source(node) -> str:
    """Canonical text of any AST node (program, statement, if-arm, or
    expression). If-arms print with an `if` keyword regardless of their
    position, which is fine for fingerprinting."""
    if isinstance(node, Program):
        return pretty_print(node)
    if isinstance(node, IfArm):
        lines = [f"if {_expr(node.condition)}:"]
        _emit_body(node.body, 1, lines)
        return "\n".join(lines)
    if isinstance(node, Stmt):
        return stmt_source(node)
    return _expr(node)


def _emit_body(stmts: list[Stmt], depth: int, lines: list[str]) -> None:
    for stmt in stmts:
        _emit_stmt(stmt, depth, lines)


def _line(depth: int, text: str, stmt: Stmt) -> str:
    if stmt.trailing_comment:
        text = f"{text}  {stmt.trailing_comment}"
    return INDENT * depth + text


def _emit_stmt(stmt: Stmt, depth: int, lines: list[str]) -> None:
    if isinstance(stmt, Assign):
        lines.append(_line(depth, f"{stmt.target} = {_expr(stmt.value)}", stmt))
    elif isinstance(stmt, AugAssign):
        lines.append(_line(depth, f"{stmt.target} {stmt.op}= {_expr(stmt.value)}", stmt))
    elif isinstance(stmt, ExprStmt):
        lines.append(_line(depth, _expr(stmt.value), stmt))
    elif isinstance(stmt, If):
        for i, arm in enumerate(stmt.arms):
            kw = "if" if i == 0 else "elif"
            header = f"{kw} {_expr(arm.condition)}:"
            if i == 0:
                lines.append(_line(depth, header, stmt))
            else:
                lines.append(INDENT * depth + header)
            _emit_body(arm.body, depth + 1, lines)
        if stmt.else_body is not None:
            lines.append(INDENT * depth + "else:")
            _emit_body(stmt.else_body, depth + 1, lines)
    elif isinstance(stmt, While):
        lines.append(_line(depth, f"while {_expr(stmt.condition)}:", stmt))
        _emit_body(stmt.body, depth + 1, lines)
    elif isinstance(stmt, ForRange):
        if stmt.range_arity == 1:
            args = _expr(stmt.stop)
        elif stmt.range_arity == 2:
            args = f"{_expr(stmt.start)}, {_expr(stmt.stop)}"
        else:
            args = f"{_expr(stmt.start)}, {_expr(stmt.stop)}, {_expr(stmt.step)}"
        lines.append(_line(depth, f"for {stmt.var} in range({args}):", stmt))
        _emit_body(stmt.body, depth + 1, lines)
    elif isinstance(stmt, Break):
        lines.append(_line(depth, "break", stmt))
    elif isinstance(stmt, Continue):
        lines.append(_line(depth, "continue", stmt))
    elif isinstance(stmt, Pass):
        lines.append(_line(depth, "pass", stmt))
    elif isinstance(stmt, Return):
        text = "return" if stmt.value is None else f"return {_expr(stmt.value)}"
        lines.append(_line(depth, text, stmt))
    elif isinstance(stmt, FuncDef):
        params = ", ".join(p.name for p in stmt.params)
        lines.append(_line(depth, f"def {stmt.name}({params}):", stmt))
        _emit_body(stmt.body, depth + 1, lines)
    elif isinstance(stmt, Assert):
        text = f"assert {_expr(stmt.condition)}"
        if stmt.message is not None:
            text += f", {_expr(stmt.message)}"
        lines.append(_line(depth, text, stmt))
    elif isinstance(stmt, Comment):
        lines.append(_line(depth, stmt.text, stmt))
    else:
        raise TypeError(f"unprintable statement {type(stmt).__name__}")


def _expr(e: Expr) -> str:
    text, _ = _render(e)
    return text


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, IntLit):
        return str(e.value), _PREC_ATOM
    if isinstance(e, FloatLit):
        return format_float(e.value), _PREC_ATOM
    if isinstance(e, StrLit):
        return format_str(e.value), _PREC_ATOM
    if isinstance(e, BoolLit):
        return ("True" if e.value else "False"), _PREC_ATOM
    if isinstance(e, Name):
        return e.ident, _PREC_ATOM
    if isinstance(e, Call):
        args = ", ".join(_expr(a) for a in e.args)
        return f"{e.func}({args})", _PREC_ATOM
    if isinstance(e, Unary):
        if e.op == "not":
            return f"not {_child(e.operand, _PREC_NOT)}", _PREC_NOT
        return f"-{_child(e.operand, _PREC_UNARY)}", _PREC_UNARY
    if isinstance(e, Binary):
        prec = _BIN_PREC[e.op]
        lhs = _child(e.lhs, prec)
        rhs = _child(e.rhs, prec, right=True)
        return f"{lhs} {e.op} {rhs}", prec
    if isinstance(e, Compare):
        lhs = _child(e.lhs, _PREC_CMP + 1)
        rhs = _child(e.rhs, _PREC_CMP + 1)
        return f"{lhs} {e.op} {rhs}", _PREC_CMP
    if isinstance(e, BoolOp):
        prec = _PREC_OR if e.op == "or" else _PREC_AND
        parts = [_child(op, prec, right=(i > 0)) for i, op in enumerate(e.operands)]
        return f" {e.op} ".join(parts), prec
    raise TypeError(f"unprintable expression {type(e).__name__}")


def _child(e: Expr, parent_prec: int, right: bool = False) -> str:
    text, prec = _render(e)
    # Same-precedence BoolOp children were necessarily parenthesized in the
    # source (the parser flattens bare chains), so keep their parens.
    if prec < parent_prec or (prec == parent_prec and (right or isinstance(e, BoolOp))):
        return f"({text})"
    return text


def format_float(value: float) -> str:
    """Positional decimal form that re-lexes as FLOAT and round-trips exactly.

    Literals are always finite, but runtime values may not be; inf/nan get
    Python-style spellings (they only ever appear in transcripts).
    """
    if value != value:
        return "nan"
    if value in (float("inf"), float("-inf")):
        return repr(value)
    text = repr(value)
    if "e" in text or "E" in text or "." not in text:
        text = format(Decimal(value), "f")
        if "." not in text:
            text += ".0"
    return text


def format_str(value: str) -> str:
    quote = "'" if "'" not in value or '"' in value else '"'
    out = [quote]
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == quote:
            out.append("\\" + quote)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    out.append(quote)
    return "".join(out)
