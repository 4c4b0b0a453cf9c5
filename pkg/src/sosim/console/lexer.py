"""Longest-match lexer for the command language.

Words are ``[a-zA-Z][a-zA-Z0-9-]*`` (hyphens bind into the word, so write
``power - 1`` with spaces); numbers are decimal with an optional fraction;
comments run from ``;`` to end of line.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LexError

_OPERATORS = ("<=", ">=", "!=", "<", ">", "=", "+", "-", "*", "/", "(", ")")


def _is_alpha(ch: str) -> bool:
    return "a" <= ch <= "z" or "A" <= ch <= "Z"


def _is_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


@dataclass(frozen=True)
class Token:
    kind: str  # word | number | string | lbracket | rbracket | op
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def advance(span: str):
        nonlocal line, col
        for ch in span:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(ch)
            i += 1
            continue
        if ch == ";":
            j = text.find("\n", i)
            j = n if j == -1 else j
            advance(text[i:j])
            i = j
            continue
        start_line, start_col = line, col
        if ch == "[":
            tokens.append(Token("lbracket", "[", start_line, start_col))
            advance(ch)
            i += 1
            continue
        if ch == "]":
            tokens.append(Token("rbracket", "]", start_line, start_col))
            advance(ch)
            i += 1
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j == -1:
                raise LexError("unterminated string", start_line, start_col)
            raw = text[i : j + 1]
            tokens.append(Token("string", raw, start_line, start_col))
            advance(raw)
            i = j + 1
            continue
        if _is_digit(ch):
            j = i
            while j < n and _is_digit(text[j]):
                j += 1
            if j < n and text[j] == "." and j + 1 < n and _is_digit(text[j + 1]):
                j += 1
                while j < n and _is_digit(text[j]):
                    j += 1
            raw = text[i:j]
            tokens.append(Token("number", raw, start_line, start_col))
            advance(raw)
            i = j
            continue
        if _is_alpha(ch):
            j = i
            while j < n and (_is_alpha(text[j]) or _is_digit(text[j]) or text[j] == "-"):
                j += 1
            raw = text[i:j]
            tokens.append(Token("word", raw, start_line, start_col))
            advance(raw)
            i = j
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token("op", op, start_line, start_col))
                advance(op)
                i += len(op)
                break
        else:
            raise LexError(f"illegal character {ch!r}", start_line, start_col)
    return tokens
