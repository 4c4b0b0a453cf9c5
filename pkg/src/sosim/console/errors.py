"""Console errors; every one carries a 1-based source position."""

from __future__ import annotations


class ConsoleError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.message = message
        self.line = line
        self.col = col


class LexError(ConsoleError):
    pass


class ParseError(ConsoleError):
    pass


class EvalError(ConsoleError):
    pass
