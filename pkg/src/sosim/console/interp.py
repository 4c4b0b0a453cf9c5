"""Evaluator for the command language.

Programs run in observer context; ``ask`` switches to agent context for the
block.  Only the observer may ask a whole breed (or ``turtles``); an agent
may ask explicitly narrowed sets (``with`` / ``in-radius``).  Mutations go
through the same operations the protocols use, so a console ask shuffles
agents exactly like a behavior would.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import agentset
from ..world import AskError, SimError, SimState, UnknownVariableError
from .errors import ConsoleError, EvalError
from .lexer import tokenize
from . import parser as P

_AGENT_BUILTINS = ("who", "xcor", "ycor", "heading", "color")


@dataclass
class AgentSetValue:
    """An agentset surfacing as an expression value."""
    ids: tuple

    def __str__(self) -> str:
        return f"(agentset, {len(self.ids)} agents)"


@dataclass
class EvalContext:
    state: SimState
    rng: object
    agent_id: int | None = None  # None = observer
    scopes: list = field(default_factory=lambda: [{}])

    @property
    def observer(self) -> bool:
        return self.agent_id is None

    def child(self, agent_id: int | None) -> "EvalContext":
        return EvalContext(self.state, self.rng, agent_id, self.scopes + [{}])

    def lookup(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise KeyError(name)

    def has_local(self, name: str) -> bool:
        return any(name in scope for scope in self.scopes)

    def let(self, name: str, value) -> None:
        self.scopes[-1][name] = value


def _err(node, message: str) -> EvalError:
    line, col = node.span
    return EvalError(message, line, col)


def _num(node, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _err(node, "expected a number")
    return float(value)


def eval_expr(ctx: EvalContext, node):
    if isinstance(node, P.Num):
        return node.value
    if isinstance(node, P.Str):
        return node.value
    if isinstance(node, P.Var):
        return _read_var(ctx, node)
    if isinstance(node, P.Un):
        v = eval_expr(ctx, node.operand)
        if node.op == "-":
            return -_num(node, v)
        return not _truthy(v)
    if isinstance(node, P.Bin):
        return _eval_bin(ctx, node)
    if isinstance(node, P.Rand):
        n = _num(node, eval_expr(ctx, node.arg))
        if n < 1:
            raise _err(node, "random needs a positive bound")
        return float(ctx.rng.integers(0, int(n)))
    if isinstance(node, P.Count):
        return float(len(_eval_aset(ctx, node.aset)))
    if isinstance(node, P.MinOneOf):
        return _eval_min_one_of(ctx, node)
    if isinstance(node, (P.BreedSet, P.With, P.InRadius)):
        return AgentSetValue(_eval_aset(ctx, node).ids)
    raise _err(node, f"cannot evaluate {type(node).__name__}")


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, (int, float)):
        return v != 0
    raise SimError("expected a boolean")


def _eval_bin(ctx: EvalContext, node: P.Bin):
    if node.op in ("and", "or"):
        left = _truthy(eval_expr(ctx, node.left))
        if node.op == "and" and not left:
            return False
        if node.op == "or" and left:
            return True
        return _truthy(eval_expr(ctx, node.right))
    left = _num(node, eval_expr(ctx, node.left))
    right = _num(node, eval_expr(ctx, node.right))
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if right == 0:
            raise _err(node, "division by zero")
        return left / right
    if node.op == "<":
        return left < right
    if node.op == ">":
        return left > right
    if node.op == "<=":
        return left <= right
    if node.op == ">=":
        return left >= right
    if node.op == "=":
        return left == right
    if node.op == "!=":
        return left != right
    raise _err(node, f"unknown operator {node.op!r}")


def _read_var(ctx: EvalContext, node: P.Var):
    name = node.name
    if ctx.has_local(name):
        return ctx.lookup(name)
    if name in ("random-pxcor", "random-pycor"):
        c = ctx.state.config
        if name == "random-pxcor":
            return float(ctx.rng.integers(c.min_pxcor, c.max_pxcor + 1))
        return float(ctx.rng.integers(c.min_pycor, c.max_pycor + 1))
    if ctx.agent_id is not None:
        agent = ctx.state.agent(ctx.agent_id)
        if name == "who":
            return float(agent.id)
        if name == "xcor":
            return agent.x
        if name == "ycor":
            return agent.y
        if name == "heading":
            return agent.heading
        if name == "color":
            return agent.color
        try:
            return agent.vars[name]
        except UnknownVariableError:
            pass
        if name in ctx.state.globals:
            return ctx.state.globals[name]
        raise _err(node, f"unknown variable {name}")
    if name in ("who", "xcor", "ycor", "heading", "color"):
        raise _err(node, f"'{name}' is agent-only; use it inside an ask block")
    if name in ctx.state.globals:
        return ctx.state.globals[name]
    raise _err(node, f"unknown variable {name}")


def _eval_aset(ctx: EvalContext, node) -> agentset.AgentSet:
    if isinstance(node, P.BreedSet):
        if node.name == "patches":
            raise _err(node, "patches form a patch set, not an agentset")
        if node.name == "turtles":
            return agentset.breed_set(ctx.state, None)
        return agentset.breed_set(ctx.state, P.singular(node.name))
    if isinstance(node, P.With):
        base = _eval_aset(ctx, node.base)
        out = []
        for aid in base.ids:
            sub = ctx.child(aid)
            if _truthy_pred(sub, node.pred):
                out.append(aid)
        return agentset.AgentSet(tuple(out))
    if isinstance(node, P.InRadius):
        if ctx.observer:
            raise _err(node, "'in-radius' is agent-only; use it inside an ask block")
        r = _num(node, eval_expr(ctx, node.radius))
        if r < 0:
            raise _err(node, "in-radius needs a radius >= 0")
        base = _eval_aset(ctx, node.base)
        me = ctx.state.agent(ctx.agent_id)
        near = agentset.in_radius(ctx.state, me.position, r)
        near_ids = set(near.ids)
        return agentset.AgentSet(tuple(a for a in base.ids if a in near_ids))
    raise _err(node, "expected an agentset")


def _truthy_pred(ctx: EvalContext, pred) -> bool:
    v = eval_expr(ctx, pred)
    try:
        return _truthy(v)
    except SimError:
        raise _err(pred, "predicate must be a boolean")


def _eval_min_one_of(ctx: EvalContext, node: P.MinOneOf) -> float:
    aset = _eval_aset(ctx, node.aset)
    if len(aset) == 0:
        raise _err(node, "min-one-of over an empty agentset")
    best_id, best_key = None, None
    for aid in aset.ids:
        sub = ctx.child(aid)
        k = _num(node.key, eval_expr(sub, node.key))
        if best_key is None or k < best_key:
            best_key, best_id = k, aid
    return float(best_id)


def _is_bare_breed(node) -> bool:
    return isinstance(node, P.BreedSet)


def exec_stmt(ctx: EvalContext, node, results: list) -> None:
    state = ctx.state
    if isinstance(node, P.Ask):
        if isinstance(node.aset, P.BreedSet) and node.aset.name == "patches":
            _exec_patch_ask(ctx, node)
            return
        if not ctx.observer and _is_bare_breed(node.aset):
            raise _err(node, "only the observer can ask all turtles or a whole breed")
        aset = _eval_aset(ctx, node.aset)

        def action(agent):
            sub = ctx.child(agent.id)
            for stmt in node.block:
                exec_stmt(sub, stmt, results)

        try:
            agentset.ask(state, aset, action, rng=ctx.rng)
        except AskError as exc:
            if isinstance(exc.cause, ConsoleError):
                raise exc.cause
            raise _err(node, str(exc))
        return
    if isinstance(node, P.SetStmt):
        _exec_set(ctx, node)
        return
    if isinstance(node, P.LetStmt):
        ctx.let(node.name, eval_expr(ctx, node.expr))
        return
    if isinstance(node, P.Create):
        if not ctx.observer:
            raise _err(node, "only the observer can create agents")
        count = _num(node, eval_expr(ctx, node.count))
        if count < 0 or count != int(count):
            raise _err(node, "create needs a nonnegative integer count")
        try:
            ids = state.create_agents(node.breed, int(count), rng=ctx.rng)
        except SimError as exc:
            raise _err(node, str(exc))
        if node.block is not None:
            for aid in ids:
                sub = ctx.child(aid)
                for stmt in node.block:
                    exec_stmt(sub, stmt, results)
        return
    if isinstance(node, P.Fd):
        if ctx.observer:
            raise _err(node, "'fd' is agent-only; use it inside an ask block")
        step = _num(node, eval_expr(ctx, node.step))
        state.move_forward(ctx.agent_id, step)
        return
    if isinstance(node, P.Setxy):
        if ctx.observer:
            raise _err(node, "'setxy' is agent-only; use it inside an ask block")
        x = _num(node, eval_expr(ctx, node.x))
        y = _num(node, eval_expr(ctx, node.y))
        try:
            state.place(ctx.agent_id, x, y)
        except SimError as exc:
            raise _err(node, str(exc))
        return
    if isinstance(node, P.Report):
        results.append(eval_expr(ctx, node.expr))
        return
    raise _err(node, f"cannot execute {type(node).__name__}")


def _exec_patch_ask(ctx: EvalContext, node: P.Ask) -> None:
    # Patch asks support exactly the uniform recolor form:
    #   ask patches [ set pcolor <expr> ]
    block = node.block
    if len(block) != 1 or not isinstance(block[0], P.SetStmt) or block[0].name != "pcolor":
        raise _err(node, "patch asks support only 'set pcolor <value>'")
    value = _num(block[0], eval_expr(ctx, block[0].expr))
    ctx.state.set_all_pcolor(value)


def _exec_set(ctx: EvalContext, node: P.SetStmt) -> None:
    state = ctx.state
    value = eval_expr(ctx, node.expr)
    name = node.name
    if name == "pcolor":
        raise _err(node, "'pcolor' can only be set through 'ask patches'")
    if ctx.has_local(name):
        # 'set' rebinds an existing let variable in its innermost scope.
        for scope in reversed(ctx.scopes):
            if name in scope:
                scope[name] = value
                return
    if ctx.observer:
        if name in _AGENT_BUILTINS:
            raise _err(node, f"'{name}' is agent-only; use it inside an ask block")
        state.globals[name] = _num(node, value)
        return
    agent = state.agent(ctx.agent_id)
    if name == "color":
        agent.color = _num(node, value)
    elif name == "heading":
        agent.heading = _num(node, value)
    elif name == "xcor":
        try:
            agent.setxy(_num(node, value), agent.y)
        except SimError as exc:
            raise _err(node, str(exc))
    elif name == "ycor":
        try:
            agent.setxy(agent.x, _num(node, value))
        except SimError as exc:
            raise _err(node, str(exc))
    elif name == "who":
        raise _err(node, "'who' is read-only")
    elif name in state.globals and not state.has_var(name):
        state.globals[name] = _num(node, value)
    else:
        agent.vars[name] = _num(node, value)


def eval_program(state: SimState, program: tuple, rng=None) -> list:
    """Run a parsed program in observer context; returns reported values."""
    if rng is None:
        rng = state.rng_for("console")
    ctx = EvalContext(state, rng)
    results: list = []
    for stmt in program:
        exec_stmt(ctx, stmt, results)
    return results


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return str(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)
    return str(v)


class Session:
    """Parses and evaluates console input against one world."""

    def __init__(self, state: SimState):
        self.state = state

    def breed_plurals(self) -> frozenset:
        declared = {name + "s" for name in self.state._breed_names}
        return frozenset(declared | set(P.DEFAULT_BREED_PLURALS))

    def run(self, text: str) -> list:
        """Tokenize, parse, and evaluate; returns reported values.

        Raises ConsoleError subclasses carrying 1-based source positions.
        """
        program = P.parse(tokenize(text), self.breed_plurals())
        return eval_program(self.state, program)
