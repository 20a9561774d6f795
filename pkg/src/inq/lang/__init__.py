"""NovLang language core: lexer, parser, AST, and pretty-printer."""
from .ast import (
    Assert, Assign, AugAssign, BoolLit, BoolOp, Break, BUILTINS, Call, Comment,
    Compare, Continue, Expr, ExprStmt, FloatLit, ForRange, FuncDef, If, IfArm,
    IntLit, Name, Node, Param, ParseError, Pass, Program, Return, SourceSpan,
    Stmt, StrLit, Unary, While, assign_node_ids, check_span_containment,
    child_nodes, node_index, structurally_equal, walk,
)
from .lexer import Token, normalize_source, token_kinds, tokenize
from .parser import ParseResult, parse, parse_program
from .printer import pretty_print

__all__ = [
    "Assert", "Assign", "AugAssign", "BoolLit", "BoolOp", "Break", "BUILTINS",
    "Call", "Comment", "Compare", "Continue", "Expr", "ExprStmt", "FloatLit",
    "ForRange", "FuncDef", "If", "IfArm", "IntLit", "Name", "Node", "Param",
    "ParseError", "ParseResult", "Pass", "Program", "Return", "SourceSpan",
    "Stmt", "StrLit", "Token", "Unary", "While", "assign_node_ids",
    "check_span_containment", "child_nodes", "node_index", "normalize_source",
    "parse", "parse_program", "pretty_print", "structurally_equal",
    "token_kinds", "tokenize", "walk",
]
