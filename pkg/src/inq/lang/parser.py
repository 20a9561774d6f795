"""Recursive-descent parser for NovLang with end-of-line error recovery.

On a syntax error the parser records a ParseError and resynchronizes at the
next NEWLINE, so a single run collects every error in the file. A program is
only returned when the error list is empty; node ids are assigned in
pre-order once parsing succeeds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    Assert, Assign, AugAssign, Binary, BoolLit, BoolOp, Break, BUILTINS, Call,
    Comment, Compare, Continue, Expr, ExprStmt, FloatLit, ForRange, FuncDef, If,
    IfArm, IntLit, Name, Param, ParseError, Pass, Program, Return, SourceSpan,
    Stmt, StrLit, Unary, While, assign_node_ids, walk,
)
from .lexer import Token, tokenize

_AUG_KINDS = {"+=": "+", "-=": "-", "*=": "*", "//=": "//", "%=": "%"}
_CMP_KINDS = ("==", "!=", "<", "<=", ">", ">=")

_EXPR_START = ("NAME", "INT", "FLOAT", "STRING", "True", "False", "not", "-", "(")


@dataclass
class ParseResult:
    program: Program | None
    errors: list[ParseError]
    warnings: list[ParseError] = field(default_factory=list)
    source: str = ""

    @property
    def ok(self) -> bool:
        return not self.errors


class _Recover(Exception):
    """Internal: unwind to the statement loop after recording an error."""


class Parser:
    def __init__(self, tokens: list[Token], errors: list[ParseError]):
        self.toks = tokens
        self.i = 0
        self.errors = errors
        self.loop_depth = 0
        self.func_depth = 0

    # -- token plumbing --

    def _cur(self) -> Token:
        return self.toks[self.i]

    def _at(self, *kinds: str) -> bool:
        return self._cur().kind in kinds

    def _advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def _expect(self, kind: str, what: str | None = None) -> Token:
        if self._at(kind):
            return self._advance()
        self._fail(what or f"'{kind}'", expected=(kind,))

    def _fail(self, what: str, expected: tuple[str, ...] = ()) -> None:
        tok = self._cur()
        found = tok.kind if tok.kind in ("NEWLINE", "INDENT", "DEDENT", "EOF") else repr(tok.text)
        self.errors.append(ParseError(tok.span(), f"expected {what}, found {found}", expected))
        raise _Recover()

    def _sync_to_newline(self) -> None:
        depth = 0
        while not self._at("EOF"):
            kind = self._cur().kind
            if kind == "INDENT":
                depth += 1
            elif kind == "DEDENT":
                if depth == 0:
                    return
                depth -= 1
            elif kind == "NEWLINE" and depth == 0:
                self._advance()
                # A block after a failed compound header belongs to the same
                # error; swallow it rather than reporting "unexpected indent".
                if self._at("INDENT"):
                    self._advance()
                    self._skip_block_after_indent()
                return
            self._advance()

    # -- statements --

    def parse_program(self) -> Program:
        start = self._cur()
        stmts = self._statement_list(top=True)
        end = self.toks[self.i - 1] if self.i else start
        span = SourceSpan(0, end.end_offset, 1, 1, end.line, end.col + len(end.text))
        return Program(stmts, span=span)

    def _statement_list(self, top: bool = False) -> list[Stmt]:
        stmts: list[Stmt] = []
        while not self._at("EOF") and not (not top and self._at("DEDENT")):
            if top and self._at("DEDENT"):
                self._advance()  # stray dedent from lexer resync
                continue
            try:
                stmt = self._statement()
                if stmt is not None:
                    stmts.append(stmt)
            except _Recover:
                self._sync_to_newline()
        return stmts

    def _statement(self) -> Stmt | None:
        tok = self._cur()
        kind = tok.kind
        if kind == "COMMENT":
            self._advance()
            node = Comment(tok.text, span=tok.span())
            if self._at("NEWLINE"):
                self._advance()
            return node
        if kind == "NEWLINE":
            self._advance()
            return None
        if kind == "INDENT":
            self.errors.append(ParseError(tok.span(), "unexpected indent"))
            self._advance()
            self._skip_block_after_indent()
            return None
        if kind == "if":
            return self._if_stmt()
        if kind == "while":
            return self._while_stmt()
        if kind == "for":
            return self._for_stmt()
        if kind == "def":
            return self._func_def()
        return self._simple_stmt()

    def _skip_block_after_indent(self) -> None:
        depth = 1
        while depth and not self._at("EOF"):
            if self._at("INDENT"):
                depth += 1
            elif self._at("DEDENT"):
                depth -= 1
            self._advance()

    def _simple_stmt(self) -> Stmt:
        tok = self._cur()
        kind = tok.kind
        if kind == "break":
            self._advance()
            if self.loop_depth == 0:
                self.errors.append(ParseError(tok.span(), "'break' outside a loop"))
            node: Stmt = Break(span=tok.span())
        elif kind == "continue":
            self._advance()
            if self.loop_depth == 0:
                self.errors.append(ParseError(tok.span(), "'continue' outside a loop"))
            node = Continue(span=tok.span())
        elif kind == "pass":
            self._advance()
            node = Pass(span=tok.span())
        elif kind == "return":
            self._advance()
            if self.func_depth == 0:
                self.errors.append(ParseError(tok.span(), "'return' outside a function"))
            value = None
            if self._at(*_EXPR_START):
                value = self._expression()
            end_span = value.span if value is not None else tok.span()
            node = Return(value, span=_join(tok.span(), end_span))
        elif kind == "assert":
            self._advance()
            cond = self._expression()
            message = None
            if self._at(","):
                self._advance()
                message = self._expression()
            end_span = (message or cond).span
            node = Assert(cond, message, span=_join(tok.span(), end_span))
        elif kind == "NAME" and self.toks[self.i + 1].kind == "=":
            name_tok = self._advance()
            self._advance()  # '='
            value = self._expression()
            node = Assign(name_tok.text, value, span=_join(name_tok.span(), value.span),
                          target_span=name_tok.span())
        elif kind == "NAME" and self.toks[self.i + 1].kind in _AUG_KINDS:
            name_tok = self._advance()
            op_tok = self._advance()
            value = self._expression()
            node = AugAssign(name_tok.text, _AUG_KINDS[op_tok.kind], value,
                             span=_join(name_tok.span(), value.span),
                             target_span=name_tok.span())
        elif kind in _EXPR_START:
            value = self._expression()
            node = ExprStmt(value, span=value.span)
        else:
            self._fail("a statement")
            raise AssertionError("unreachable")
        node.trailing_comment = self._maybe_trailing_comment()
        self._end_of_line()
        return node

    def _maybe_trailing_comment(self) -> str | None:
        if self._at("COMMENT"):
            return self._advance().text
        return None

    def _end_of_line(self) -> None:
        if self._at("NEWLINE"):
            self._advance()
        elif not self._at("EOF", "DEDENT"):
            self._fail("end of line", expected=("NEWLINE",))

    # -- compound statements --

    def _block(self) -> list[Stmt]:
        self._expect("NEWLINE", "end of line after ':'")
        self._expect("INDENT", "an indented block")
        stmts = self._statement_list()
        if self._at("DEDENT"):
            self._advance()
        return stmts

    def _header(self, kw_tok: Token, cond_end: SourceSpan) -> tuple[SourceSpan, str | None]:
        """Consume ':' (plus optional trailing comment); returns header span."""
        colon = self._expect(":")
        trailing = self._maybe_trailing_comment()
        return _join(kw_tok.span(), colon.span()), trailing

    def _if_stmt(self) -> Stmt:
        kw = self._advance()
        arms: list[IfArm] = []
        cond = self._expression()
        header, trailing = self._header(kw, cond.span)
        body = self._block()
        arms.append(IfArm(cond, body, span=_join(kw.span(), _last_span(body, header)),
                          header_span=header))
        else_body: list[Stmt] | None = None
        while self._at("elif"):
            ekw = self._advance()
            cond = self._expression()
            eheader, _ = self._header(ekw, cond.span)
            body = self._block()
            arms.append(IfArm(cond, body, span=_join(ekw.span(), _last_span(body, eheader)),
                              header_span=eheader))
        if self._at("else"):
            ekw = self._advance()
            self._expect(":")
            self._maybe_trailing_comment()
            else_body = self._block()
        end = _last_span(else_body, arms[-1].span) if else_body else arms[-1].span
        node = If(arms, else_body, span=_join(kw.span(), end))
        node.trailing_comment = trailing
        return node

    def _while_stmt(self) -> Stmt:
        kw = self._advance()
        if not self._at(*_EXPR_START):
            self._fail("expression", expected=_EXPR_START)
        cond = self._expression()
        header, trailing = self._header(kw, cond.span)
        self.loop_depth += 1
        try:
            body = self._block()
        finally:
            self.loop_depth -= 1
        node = While(cond, body, span=_join(kw.span(), _last_span(body, header)),
                     header_span=header)
        node.trailing_comment = trailing
        return node

    def _for_stmt(self) -> Stmt:
        kw = self._advance()
        var_tok = self._expect("NAME", "a loop variable name")
        self._expect("in")
        range_tok = self._expect("NAME", "'range'")
        if range_tok.text != "range":
            self.errors.append(ParseError(range_tok.span(),
                                          "for loops iterate over range(...) only"))
            raise _Recover()
        lparen = self._expect("(")
        args = [self._expression()]
        while self._at(","):
            self._advance()
            args.append(self._expression())
        rparen = self._expect(")")
        if len(args) > 3:
            self.errors.append(ParseError(_join(args[3].span, args[-1].span),
                                          "range() takes at most 3 arguments"))
            raise _Recover()
        arity = len(args)
        synth_at = SourceSpan(lparen.end_offset, lparen.end_offset, lparen.line,
                              lparen.col + 1, lparen.line, lparen.col + 1)
        if arity == 1:
            start: Expr = IntLit(0, span=synth_at)
            stop, step = args[0], IntLit(1, span=synth_at)
        elif arity == 2:
            start, stop, step = args[0], args[1], IntLit(1, span=synth_at)
        else:
            start, stop, step = args
        header, trailing = self._header(kw, rparen.span())
        self.loop_depth += 1
        try:
            body = self._block()
        finally:
            self.loop_depth -= 1
        node = ForRange(var_tok.text, start, stop, step, body, range_arity=arity,
                        span=_join(kw.span(), _last_span(body, header)),
                        var_span=var_tok.span(), header_span=header)
        node.trailing_comment = trailing
        return node

    def _func_def(self) -> Stmt:
        kw = self._advance()
        name_tok = self._expect("NAME", "a function name")
        self._expect("(")
        params: list[Param] = []
        if self._at("NAME"):
            tok = self._advance()
            params.append(Param(tok.text, span=tok.span()))
            while self._at(","):
                self._advance()
                tok = self._expect("NAME", "a parameter name")
                params.append(Param(tok.text, span=tok.span()))
        self._expect(")")
        header, trailing = self._header(kw, kw.span())
        self.func_depth += 1
        outer_loops = self.loop_depth
        self.loop_depth = 0
        try:
            body = self._block()
        finally:
            self.loop_depth = outer_loops
            self.func_depth -= 1
        node = FuncDef(name_tok.text, params, body,
                       span=_join(kw.span(), _last_span(body, header)), header_span=header)
        node.trailing_comment = trailing
        return node

    # -- expressions --

    def _expression(self) -> Expr:
        return self._or_expr()

    def _or_expr(self) -> Expr:
        first = self._and_expr()
        if not self._at("or"):
            return first
        operands = [first]
        while self._at("or"):
            self._advance()
            operands.append(self._and_expr())
        return BoolOp("or", operands, span=_join(operands[0].span, operands[-1].span))

    def _and_expr(self) -> Expr:
        first = self._not_expr()
        if not self._at("and"):
            return first
        operands = [first]
        while self._at("and"):
            self._advance()
            operands.append(self._not_expr())
        return BoolOp("and", operands, span=_join(operands[0].span, operands[-1].span))

    def _not_expr(self) -> Expr:
        if self._at("not"):
            tok = self._advance()
            operand = self._not_expr()
            return Unary("not", operand, span=_join(tok.span(), operand.span))
        return self._comparison()

    def _comparison(self) -> Expr:
        lhs = self._arith()
        if self._at(*_CMP_KINDS):
            op = self._advance()
            rhs = self._arith()
            if self._at(*_CMP_KINDS):
                self._fail("a single comparison (chaining like a < b < c is not supported)")
            return Compare(op.kind, lhs, rhs, span=_join(lhs.span, rhs.span))
        return lhs

    def _arith(self) -> Expr:
        node = self._term()
        while self._at("+", "-"):
            op = self._advance()
            rhs = self._term()
            node = Binary(op.kind, node, rhs, span=_join(node.span, rhs.span))
        return node

    def _term(self) -> Expr:
        node = self._factor()
        while self._at("*", "/", "//", "%"):
            op = self._advance()
            rhs = self._factor()
            node = Binary(op.kind, node, rhs, span=_join(node.span, rhs.span))
        return node

    def _factor(self) -> Expr:
        if self._at("-"):
            tok = self._advance()
            operand = self._factor()
            return Unary("-", operand, span=_join(tok.span(), operand.span))
        return self._atom()

    def _atom(self) -> Expr:
        tok = self._cur()
        if tok.kind == "INT":
            self._advance()
            return IntLit(tok.value, span=tok.span())
        if tok.kind == "FLOAT":
            self._advance()
            return FloatLit(tok.value, span=tok.span())
        if tok.kind == "STRING":
            self._advance()
            return StrLit(tok.value, span=tok.span())
        if tok.kind in ("True", "False"):
            self._advance()
            return BoolLit(tok.kind == "True", span=tok.span())
        if tok.kind == "NAME":
            self._advance()
            if self._at("("):
                self._advance()
                args: list[Expr] = []
                if not self._at(")"):
                    args.append(self._expression())
                    while self._at(","):
                        self._advance()
                        args.append(self._expression())
                rparen = self._expect(")")
                return Call(tok.text, args, span=_join(tok.span(), rparen.span()))
            return Name(tok.text, span=tok.span())
        if tok.kind == "(":
            self._advance()
            inner = self._expression()
            self._expect(")")
            return inner
        self._fail("expression", expected=_EXPR_START)
        raise AssertionError("unreachable")


def _join(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    return SourceSpan(a.start_offset, b.end_offset, a.start_line, a.start_col,
                      b.end_line, b.end_col)


def _last_span(body: list[Stmt] | None, fallback: SourceSpan) -> SourceSpan:
    return body[-1].span if body else fallback


def _resolve_calls(program: Program) -> list[ParseError]:
    """Post-parse pass: unknown call targets become warnings, not failures."""
    defined = {n.name for n in walk(program) if isinstance(n, FuncDef)}
    warnings = []
    for node in walk(program):
        if isinstance(node, Call) and node.func not in BUILTINS and node.func not in defined:
            warnings.append(ParseError(node.span, f"call to unknown function '{node.func}'"))
    return warnings


def parse(source: str) -> ParseResult:
    """Parse NovLang source; errors (with recovery) or a fully indexed Program."""
    tokens, lex_errors = tokenize(source)
    parser = Parser(tokens, list(lex_errors))
    program = parser.parse_program()
    if parser.errors:
        parser.errors.sort(key=lambda e: (e.span.start_offset, e.message))
        return ParseResult(None, parser.errors, [], source)
    assign_node_ids(program)
    warnings = _resolve_calls(program)
    from .lexer import normalize_source
    return ParseResult(program, [], warnings, normalize_source(source))


def parse_program(source: str) -> Program:
    """Parse and return the Program, raising ValueError on any parse error."""
    result = parse(source)
    if not result.ok:
        first = result.errors[0]
        raise ValueError(f"parse error at {first}")
    assert result.program is not None
    return result.program
