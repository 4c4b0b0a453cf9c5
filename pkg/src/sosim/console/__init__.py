"""Logo-style command mini-language: lexer, parser, evaluator, REPL session."""

from .errors import ConsoleError, EvalError, LexError, ParseError
from .lexer import Token, tokenize
from .parser import parse, parse_program, pretty
from .interp import Session, eval_program

__all__ = [
    "ConsoleError", "EvalError", "LexError", "ParseError",
    "Token", "tokenize", "parse", "parse_program", "pretty",
    "Session", "eval_program",
]
