"""Indentation-aware lexer for NovLang.

Produces NAME/INT/FLOAT/STRING/COMMENT tokens, keyword and operator tokens
whose kind is their own spelling, and NEWLINE/INDENT/DEDENT/EOF structure
tokens. Tabs in indentation are rejected; CRLF input is normalized to LF
before offsets are assigned.
"""
from __future__ import annotations

from dataclasses import dataclass

from .ast import ParseError, SourceSpan

KEYWORDS = frozenset({
    "if", "elif", "else", "while", "for", "in", "def", "return",
    "break", "continue", "pass", "assert", "and", "or", "not",
    "True", "False",
})

# Longest-first so "//=" wins over "//" and "/".
OPERATORS = (
    "//=", "==", "!=", "<=", ">=", "+=", "-=", "*=", "%=", "//",
    "<", ">", "=", "+", "-", "*", "/", "%", "(", ")", ",", ":",
)

_ESCAPES = {"\\": "\\", "'": "'", '"': '"', "n": "\n", "t": "\t"}

MAX_INT_LITERAL = 2**63 - 1


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int
    line: int
    col: int
    value: object = None  # decoded value for INT/FLOAT/STRING

    @property
    def end_offset(self) -> int:
        return self.offset + len(self.text)

    def span(self) -> SourceSpan:
        return SourceSpan(self.offset, self.end_offset, self.line, self.col,
                          self.line, self.col + len(self.text))


def normalize_source(source: str) -> str:
    return source.replace("\r\n", "\n").replace("\r", "\n")


class Lexer:
    def __init__(self, source: str):
        self.src = normalize_source(source)
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []
        self.errors: list[ParseError] = []
        self.indents = [0]
        self.paren_depth = 0

    # -- low level --

    def _peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.src[i] if i < len(self.src) else ""

    def _error(self, msg: str, offset: int, length: int = 1) -> None:
        end = min(offset + length, len(self.src))
        line, col = self._line_col(offset)
        eline, ecol = self._line_col(end)
        self.errors.append(ParseError(SourceSpan(offset, end, line, col, eline, ecol), msg))

    def _line_col(self, offset: int) -> tuple[int, int]:
        before = self.src[:offset]
        line = before.count("\n") + 1
        col = offset - (before.rfind("\n") + 1) + 1
        return line, col

    def _emit(self, kind: str, text: str, offset: int, value: object = None) -> None:
        line, col = self._line_col(offset)
        self.tokens.append(Token(kind, text, offset, line, col, value))

    # -- line structure --

    def _handle_indent(self) -> None:
        start = self.pos
        width = 0
        while self._peek() in (" ", "\t"):
            if self._peek() == "\t":
                self._error("tab character in indentation (use spaces)", self.pos)
            width += 1
            self.pos += 1
        # blank or comment-free empty lines produce no tokens at all
        if self._peek() in ("\n", ""):
            return
        if width > self.indents[-1]:
            self.indents.append(width)
            self._emit("INDENT", "", start + width)
        else:
            while width < self.indents[-1]:
                self.indents.pop()
                self._emit("DEDENT", "", start + width)
            if width != self.indents[-1]:
                self._error("unindent does not match any outer block", start + width)
                self.indents.append(width)  # resync at the odd level

    def tokenize(self) -> tuple[list[Token], list[ParseError]]:
        at_line_start = True
        while self.pos < len(self.src):
            if at_line_start and self.paren_depth == 0:
                self._handle_indent()
                at_line_start = False
                continue
            ch = self._peek()
            if ch == "\n":
                if self.paren_depth == 0:
                    # suppress NEWLINE for blank lines
                    if self.tokens and self.tokens[-1].kind not in ("NEWLINE", "INDENT", "DEDENT"):
                        self._emit("NEWLINE", "\n", self.pos)
                self.pos += 1
                at_line_start = True
                continue
            if ch in (" ", "\t"):
                if ch == "\t":
                    self._error("tab character outside indentation", self.pos)
                self.pos += 1
                continue
            if ch == "#":
                start = self.pos
                while self._peek() not in ("\n", ""):
                    self.pos += 1
                self._emit("COMMENT", self.src[start:self.pos], start)
                continue
            if ch.isdigit():
                self._lex_number()
                continue
            if ch.isalpha() or ch == "_":
                self._lex_name()
                continue
            if ch in ("'", '"'):
                self._lex_string()
                continue
            for op in OPERATORS:
                if self.src.startswith(op, self.pos):
                    if op == "(":
                        self.paren_depth += 1
                    elif op == ")":
                        self.paren_depth = max(0, self.paren_depth - 1)
                    self._emit(op, op, self.pos)
                    self.pos += len(op)
                    break
            else:
                self._error(f"unexpected character {ch!r}", self.pos)
                self.pos += 1
        # close the final line and any open blocks
        if self.tokens and self.tokens[-1].kind not in ("NEWLINE", "INDENT", "DEDENT"):
            self._emit("NEWLINE", "", self.pos)
        while len(self.indents) > 1:
            self.indents.pop()
            self._emit("DEDENT", "", self.pos)
        self._emit("EOF", "", self.pos)
        return self.tokens, self.errors

    # -- token scanners --

    def _lex_number(self) -> None:
        start = self.pos
        while self._peek().isdigit():
            self.pos += 1
        if self._peek() == "." and self._peek(1).isdigit():
            self.pos += 1
            while self._peek().isdigit():
                self.pos += 1
            text = self.src[start:self.pos]
            self._emit("FLOAT", text, start, float(text))
            return
        text = self.src[start:self.pos]
        value = int(text)
        if value > MAX_INT_LITERAL:
            self._error("integer literal does not fit in 64 bits", start, len(text))
            value = MAX_INT_LITERAL
        self._emit("INT", text, start, value)

    def _lex_name(self) -> None:
        start = self.pos
        while self._peek().isalnum() or self._peek() == "_":
            self.pos += 1
        text = self.src[start:self.pos]
        kind = text if text in KEYWORDS else "NAME"
        self._emit(kind, text, start)

    def _lex_string(self) -> None:
        start = self.pos
        quote = self._peek()
        self.pos += 1
        chars: list[str] = []
        while True:
            ch = self._peek()
            if ch in ("", "\n"):
                self._error("unterminated string literal", start, self.pos - start)
                break
            if ch == "\\":
                esc = self._peek(1)
                if esc in _ESCAPES:
                    chars.append(_ESCAPES[esc])
                    self.pos += 2
                    continue
                self._error(f"unknown escape sequence \\{esc}", self.pos, 2)
                self.pos += 2
                continue
            self.pos += 1
            if ch == quote:
                break
            chars.append(ch)
        self._emit("STRING", self.src[start:self.pos], start, "".join(chars))


def tokenize(source: str) -> tuple[list[Token], list[ParseError]]:
    return Lexer(source).tokenize()


def token_kinds(source: str) -> list[str]:
    """Kind sequence used by the re-lex identity checks."""
    toks, _ = tokenize(source)
    return [t.kind for t in toks]
