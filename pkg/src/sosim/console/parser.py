"""Recursive-descent parser and pretty-printer for the command language.

Grammar (statements, then expressions by falling precedence):

    program  := stmt+
    stmt     := "ask" setexpr block
              | "set" WORD expr
              | "let" WORD expr
              | ("crt" | "create-<plural>") expr block?
              | "fd" expr
              | "setxy" expr expr
              | expr                      ; bare expression reports its value
    block    := "[" stmt* "]"
    setexpr  := ("turtles" | "patches" | <plural breed>)
                ("with" "[" expr "]" | "in-radius" unary)*
    expr     := or (or < and < comparison < additive < multiplicative < unary)
    unary    := ("-" | "not") unary | primary
    primary  := NUMBER | STRING | "(" expr ")" | "random" unary
              | "count" setexpr | "min-one-of" setexpr "[" expr "]"
              | setexpr | <color word> | WORD

Color words resolve to their numeric value at parse time.  Every node keeps
its source position; positions are excluded from structural equality so a
parse/pretty-print/parse round trip yields an equal tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import colors
from .errors import ParseError
from .lexer import Token, tokenize

DEFAULT_BREED_PLURALS = frozenset({"nodes", "towers", "sensors", "walkers"})


def _span_field():
    return field(default=(0, 0), compare=False)


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Str:
    value: str
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Var:
    name: str
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Un:
    op: str  # "-" or "not"
    operand: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Rand:
    arg: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Count:
    aset: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class MinOneOf:
    aset: object
    key: object
    span: tuple[int, int] = _span_field()


# --- agentset expressions ----------------------------------------------------

@dataclass(frozen=True)
class BreedSet:
    name: str  # "turtles", "patches", or a plural breed word
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class With:
    base: object
    pred: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class InRadius:
    base: object
    radius: object
    span: tuple[int, int] = _span_field()


# --- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Ask:
    aset: object
    block: tuple
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class SetStmt:
    name: str
    expr: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class LetStmt:
    name: str
    expr: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Create:
    breed: str  # singular breed name; "crt" maps to the default breed "node"
    count: object
    block: tuple | None
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Fd:
    step: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Setxy:
    x: object
    y: object
    span: tuple[int, int] = _span_field()


@dataclass(frozen=True)
class Report:
    expr: object
    span: tuple[int, int] = _span_field()


_CMP_OPS = {"<", ">", "<=", ">=", "=", "!="}
_STMT_WORDS = {"ask", "set", "let", "crt", "fd", "setxy"}
_RESERVED_WORDS = _STMT_WORDS | {"and", "or", "not", "with", "in-radius"}


def singular(plural: str) -> str:
    return plural[:-1] if plural.endswith("s") else plural


class _Parser:
    def __init__(self, tokens: list[Token], breeds: frozenset[str]):
        self.tokens = tokens
        self.pos = 0
        self.breeds = breeds  # plural breed words

    # -- token plumbing --

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", *self._end_pos())
        self.pos += 1
        return tok

    def _end_pos(self) -> tuple[int, int]:
        if self.tokens:
            last = self.tokens[-1]
            return last.line, last.col + len(last.text)
        return 1, 1

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"expected {what}", *self._end_pos())
        if tok.kind != kind:
            raise ParseError(f"expected {what}, found {tok.text!r}", tok.line, tok.col)
        self.pos += 1
        return tok

    def _is_set_word(self, tok: Token) -> bool:
        return tok.kind == "word" and (
            tok.text in ("turtles", "patches") or tok.text in self.breeds)

    # -- statements --

    def program(self) -> tuple:
        stmts = []
        while self.peek() is not None:
            stmts.append(self.stmt())
        if not stmts:
            raise ParseError("empty program", 1, 1)
        return tuple(stmts)

    def stmt(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("expected a statement", *self._end_pos())
        span = (tok.line, tok.col)
        if tok.kind == "word":
            if tok.text == "ask":
                self.next()
                aset = self.setexpr()
                block = self.block()
                return Ask(aset, block, span)
            if tok.text == "set":
                self.next()
                name = self.expect("word", "a variable name after 'set'")
                return SetStmt(name.text, self.expr(), span)
            if tok.text == "let":
                self.next()
                name = self.expect("word", "a variable name after 'let'")
                return LetStmt(name.text, self.expr(), span)
            if tok.text == "crt":
                self.next()
                count = self.expr()
                block = self.block() if self._at_block() else None
                return Create("node", count, block, span)
            if tok.text.startswith("create-") and len(tok.text) > 7:
                self.next()
                count = self.expr()
                block = self.block() if self._at_block() else None
                return Create(singular(tok.text[7:]), count, block, span)
            if tok.text == "fd":
                self.next()
                return Fd(self.expr(), span)
            if tok.text == "setxy":
                self.next()
                return Setxy(self.expr(), self.expr(), span)
        return Report(self.expr(), span)

    def _at_block(self) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "lbracket"

    def block(self) -> tuple:
        open_tok = self.expect("lbracket", "'['")
        stmts = []
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("expected ]", *self._end_pos())
            if tok.kind == "rbracket":
                self.next()
                return tuple(stmts)
            stmts.append(self.stmt())

    # -- agentsets --

    def setexpr(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("expected an agentset", *self._end_pos())
        if not self._is_set_word(tok):
            raise ParseError(f"expected an agentset, found {tok.text!r}", tok.line, tok.col)
        self.next()
        node = BreedSet(tok.text, (tok.line, tok.col))
        return self._set_postfix(node)

    def _set_postfix(self, node):
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "word":
                return node
            if tok.text == "with":
                self.next()
                self.expect("lbracket", "'[' after 'with'")
                pred = self.expr()
                self.expect("rbracket", "']'")
                node = With(node, pred, (tok.line, tok.col))
            elif tok.text == "in-radius":
                self.next()
                node = InRadius(node, self.unary(), (tok.line, tok.col))
            else:
                return node

    # -- expressions --

    def expr(self):
        return self.or_expr()

    def _binop_chain(self, sub, ops):
        node = sub()
        while True:
            tok = self.peek()
            if tok is None:
                return node
            text = tok.text
            if (tok.kind == "op" and text in ops) or (tok.kind == "word" and text in ops):
                self.next()
                right = sub()
                node = Bin(text, node, right, (tok.line, tok.col))
            else:
                return node

    def or_expr(self):
        return self._binop_chain(self.and_expr, {"or"})

    def and_expr(self):
        return self._binop_chain(self.cmp_expr, {"and"})

    def cmp_expr(self):
        return self._binop_chain(self.add_expr, _CMP_OPS)

    def add_expr(self):
        return self._binop_chain(self.mul_expr, {"+", "-"})

    def mul_expr(self):
        return self._binop_chain(self.unary, {"*", "/"})

    def unary(self):
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "-":
            self.next()
            return Un("-", self.unary(), (tok.line, tok.col))
        if tok is not None and tok.kind == "word" and tok.text == "not":
            self.next()
            return Un("not", self.unary(), (tok.line, tok.col))
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("expected an expression", *self._end_pos())
        span = (tok.line, tok.col)
        if tok.kind == "number":
            self.next()
            return Num(float(tok.text), span)
        if tok.kind == "string":
            self.next()
            return Str(tok.text[1:-1], span)
        if tok.kind == "op" and tok.text == "(":
            self.next()
            inner = self.expr()
            closing = self.peek()
            if closing is None or closing.kind != "op" or closing.text != ")":
                raise ParseError("expected )", *(self._end_pos() if closing is None
                                                 else (closing.line, closing.col)))
            self.next()
            return inner
        if tok.kind == "word":
            if tok.text == "random":
                self.next()
                return Rand(self.unary(), span)
            if tok.text == "count":
                self.next()
                return Count(self.setexpr(), span)
            if tok.text == "min-one-of":
                self.next()
                aset = self.setexpr()
                self.expect("lbracket", "'[' after min-one-of agentset")
                key = self.expr()
                self.expect("rbracket", "']'")
                return MinOneOf(aset, key, span)
            if self._is_set_word(tok):
                return self.setexpr()
            color = colors.resolve(tok.text)
            if color is not None:
                self.next()
                return Num(color, span)
            if tok.text in _RESERVED_WORDS:
                raise ParseError(f"unexpected {tok.text!r} in an expression",
                                 tok.line, tok.col)
            self.next()
            return Var(tok.text, span)
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)


def parse(tokens: list[Token], breeds=DEFAULT_BREED_PLURALS) -> tuple:
    """Parse a token list into a program (tuple of statements)."""
    return _Parser(tokens, frozenset(breeds)).program()


def parse_program(text: str, breeds=DEFAULT_BREED_PLURALS) -> tuple:
    return parse(tokenize(text), breeds)


# --- pretty printer ----------------------------------------------------------

_PRECEDENCE = {"or": 1, "and": 2, "<": 3, ">": 3, "<=": 3, ">=": 3, "=": 3,
               "!=": 3, "+": 4, "-": 4, "*": 5, "/": 5}
_UNARY_PREC = 6


def _expr_prec(node) -> int:
    if isinstance(node, Bin):
        return _PRECEDENCE[node.op]
    if isinstance(node, Un):
        return _UNARY_PREC
    return 9


def _wrap(node, parent_prec: int, right_side: bool = False) -> str:
    prec = _expr_prec(node)
    text = pretty_expr(node)
    if prec < parent_prec or (right_side and prec == parent_prec):
        return f"( {text} )"
    return text


def pretty_expr(node) -> str:
    if isinstance(node, Num):
        v = node.value
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        text = repr(v)
        return text if "e" not in text and "E" not in text else f"{v:.17f}"
    if isinstance(node, Str):
        return f'"{node.value}"'
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Bin):
        prec = _PRECEDENCE[node.op]
        return f"{_wrap(node.left, prec)} {node.op} {_wrap(node.right, prec, right_side=True)}"
    if isinstance(node, Un):
        return f"{node.op} {_wrap(node.operand, _UNARY_PREC)}"
    if isinstance(node, Rand):
        return f"random {_wrap(node.arg, _UNARY_PREC)}"
    if isinstance(node, Count):
        return f"count {pretty_expr(node.aset)}"
    if isinstance(node, MinOneOf):
        return f"min-one-of {pretty_expr(node.aset)} [ {pretty_expr(node.key)} ]"
    if isinstance(node, BreedSet):
        return node.name
    if isinstance(node, With):
        return f"{pretty_expr(node.base)} with [ {pretty_expr(node.pred)} ]"
    if isinstance(node, InRadius):
        return f"{pretty_expr(node.base)} in-radius {_wrap(node.radius, _UNARY_PREC)}"
    raise TypeError(f"not an expression node: {node!r}")


def pretty_stmt(node) -> str:
    if isinstance(node, Ask):
        return f"ask {pretty_expr(node.aset)} {_pretty_block(node.block)}"
    if isinstance(node, SetStmt):
        return f"set {node.name} {pretty_expr(node.expr)}"
    if isinstance(node, LetStmt):
        return f"let {node.name} {pretty_expr(node.expr)}"
    if isinstance(node, Create):
        head = "crt" if node.breed == "node" else f"create-{node.breed}s"
        out = f"{head} {pretty_expr(node.count)}"
        if node.block is not None:
            out += f" {_pretty_block(node.block)}"
        return out
    if isinstance(node, Fd):
        return f"fd {pretty_expr(node.step)}"
    if isinstance(node, Setxy):
        return f"setxy {_pretty_arg(node.x)} {_pretty_arg(node.y)}"
    if isinstance(node, Report):
        return pretty_expr(node.expr)
    raise TypeError(f"not a statement node: {node!r}")


def _pretty_arg(node) -> str:
    # Inner arguments of multi-argument forms are parenthesized when the
    # expression could swallow the following argument.
    if isinstance(node, (Bin, Un)):
        return f"( {pretty_expr(node)} )"
    return pretty_expr(node)


def _join_stmts(stmts, sep: str) -> str:
    parts = []
    for i, s in enumerate(stmts):
        text = pretty_stmt(s)
        # A bare report starting with "-" would extend the previous
        # statement's expression on re-parse; parens keep the boundary
        # without changing the tree.
        if i > 0 and text.startswith("-"):
            text = f"( {text} )"
        parts.append(text)
    return sep.join(parts)


def _pretty_block(block: tuple) -> str:
    if not block:
        return "[ ]"
    return "[ " + _join_stmts(block, " ") + " ]"


def pretty(program: tuple) -> str:
    """Canonical text for a program; re-parsing yields an equal tree."""
    return _join_stmts(program, "\n")
