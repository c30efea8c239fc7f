"""Small expression language with forward-mode differentiation.

Grammar (EBNF, part of the stable interface):

    expr   = term , { ("+" | "-") , term } ;
    term   = unary , { ("*" | "/") , unary } ;
    unary  = "-" , unary | power ;
    power  = atom , [ "^" , unary ] ;
    atom   = NUMBER
           | IDENT
           | IDENT , "(" , expr , { "," , expr } , ")"
           | "(" , expr , ")" ;

Identifiers are point variables (declared by the caller, e.g. x1..x4 and t),
or named constants bound at parse time.  Functions: norm, dot, sin, cos,
exp, log.  Vectors combine linearly; norm and dot are the only reductions,
and sin/cos/exp/log/^ act on scalars only (with d = 1 the point variables
are scalars, so e.g. sin(x1) is legal there).

Evaluation is batched: every scalar is an ndarray over evaluation points,
and a vector is a tuple of scalar channels.  Forward-mode derivatives ride
along as a Dual carrying one tangent column per requested seed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

FUNCTIONS = ("norm", "dot", "sin", "cos", "exp", "log")


class ExprSyntaxError(ValueError):
    """Malformed source; carries the character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class ExprTypeError(ValueError):
    """Well-formed source with an ill-typed construct."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class EvalDomainError(ArithmeticError):
    """Evaluation left the real domain (log of a non-positive value etc.)."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Node:
    pos: int = field(compare=False)


@dataclass(frozen=True)
class Num(Node):
    value: float = 0.0


@dataclass(frozen=True)
class Var(Node):
    name: str = ""


@dataclass(frozen=True)
class Neg(Node):
    arg: "Node" = None


@dataclass(frozen=True)
class Bin(Node):
    op: str = ""
    left: "Node" = None
    right: "Node" = None


@dataclass(frozen=True)
class Call(Node):
    fn: str = ""
    args: tuple = ()


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[()+\-*/^,]))"
)


def _tokenize(source: str):
    tokens = []
    i = 0
    while i < len(source):
        m = _TOKEN.match(source, i)
        if m is None:
            stripped = source[i:].lstrip()
            if not stripped:
                break
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", len(source) - len(stripped))
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        i = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != text:
            raise ExprSyntaxError(f"expected {text!r}", pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = Bin(pos=pos, op=val, left=node, right=self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = Bin(pos=pos, op=val, left=node, right=self.unary())
            else:
                return node

    def unary(self) -> Node:
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(pos=pos, arg=self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return Bin(pos=pos, op="^", left=node, right=self.unary())
        return node

    def atom(self) -> Node:
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(pos=pos, value=float(val))
        if kind == "ident":
            nxt_kind, nxt_val, _ = self.peek()
            if nxt_kind == "op" and nxt_val == "(":
                self.advance()
                args = [self.expr()]
                while True:
                    k2, v2, p2 = self.peek()
                    if k2 == "op" and v2 == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect(")")
                return Call(pos=pos, fn=val, args=tuple(args))
            return Var(pos=pos, name=val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"expected a number, name or '(', got {val!r}" if val else "unexpected end of input", pos)


def parse(source: str) -> Node:
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Typing: "s" scalar, "v" vector


def typecheck(node: Node, var_types: dict[str, str]) -> str:
    """Return the type of node given variable types; raise ExprTypeError."""
    if isinstance(node, Num):
        return "s"
    if isinstance(node, Var):
        try:
            return var_types[node.name]
        except KeyError:
            raise ExprTypeError(f"unknown name {node.name!r}", node.pos) from None
    if isinstance(node, Neg):
        return typecheck(node.arg, var_types)
    if isinstance(node, Bin):
        lt = typecheck(node.left, var_types)
        rt = typecheck(node.right, var_types)
        if node.op in "+-":
            if lt != rt:
                raise ExprTypeError(f"cannot apply {node.op!r} to {_tn(lt)} and {_tn(rt)}", node.pos)
            return lt
        if node.op == "*":
            if lt == "v" and rt == "v":
                raise ExprTypeError("cannot multiply two vectors, use dot", node.pos)
            return "v" if "v" in (lt, rt) else "s"
        if node.op == "/":
            if rt == "v":
                raise ExprTypeError("cannot divide by a vector", node.pos)
            return lt
        if node.op == "^":
            if lt == "v" or rt == "v":
                raise ExprTypeError("powers act on scalars, use norm first", node.pos)
            return "s"
        raise AssertionError(node.op)
    if isinstance(node, Call):
        if node.fn not in FUNCTIONS:
            raise ExprTypeError(f"unknown function {node.fn!r}", node.pos)
        arg_types = [typecheck(a, var_types) for a in node.args]
        if node.fn == "norm":
            if len(node.args) != 1:
                raise ExprTypeError("norm takes one argument", node.pos)
            return "s"
        if node.fn == "dot":
            if len(node.args) != 2:
                raise ExprTypeError("dot takes two arguments", node.pos)
            if arg_types[0] != arg_types[1]:
                raise ExprTypeError("dot arguments must have matching shapes", node.pos)
            return "s"
        if len(node.args) != 1:
            raise ExprTypeError(f"{node.fn} takes one argument", node.pos)
        if arg_types[0] == "v":
            raise ExprTypeError(f"{node.fn} of a vector is undefined, apply it per component or use norm", node.pos)
        return "s"
    raise AssertionError(type(node))


def _tn(t: str) -> str:
    return "a vector" if t == "v" else "a scalar"


# ---------------------------------------------------------------------------
# Dual numbers (batched)


class Dual:
    """val: (batch,) floats; eps: (batch, m) tangents."""

    __slots__ = ("val", "eps")

    def __init__(self, val, eps):
        self.val = val
        self.eps = eps


def _val(x):
    return x.val if isinstance(x, Dual) else x


def _add(a, b):
    if isinstance(a, Dual) or isinstance(b, Dual):
        if not isinstance(a, Dual):
            return Dual(a + b.val, b.eps)
        if not isinstance(b, Dual):
            return Dual(a.val + b, a.eps)
        return Dual(a.val + b.val, a.eps + b.eps)
    return a + b


def _sub(a, b):
    return _add(a, _neg(b))


def _neg(a):
    if isinstance(a, Dual):
        return Dual(-a.val, -a.eps)
    return -a


def _mul(a, b):
    if isinstance(a, Dual) or isinstance(b, Dual):
        if not isinstance(a, Dual):
            return Dual(a * b.val, np.asarray(a)[..., None] * b.eps if np.ndim(a) else a * b.eps)
        if not isinstance(b, Dual):
            return Dual(a.val * b, np.asarray(b)[..., None] * a.eps if np.ndim(b) else b * a.eps)
        return Dual(a.val * b.val, a.val[..., None] * b.eps + b.val[..., None] * a.eps)
    return a * b


def _div(a, b):
    if isinstance(b, Dual):
        inv = Dual(1.0 / b.val, -b.eps / (b.val * b.val)[..., None])
        return _mul(a, inv)
    if isinstance(a, Dual):
        return Dual(a.val / b, a.eps / (np.asarray(b)[..., None] if np.ndim(b) else b))
    return a / b


def _pow(a, b):
    with np.errstate(all="ignore"):
        if not isinstance(a, Dual) and not isinstance(b, Dual):
            return np.power(a, b)
        if isinstance(a, Dual) and not isinstance(b, Dual):
            v = np.power(a.val, b)
            # power rule with the zero-base subgradient selection: at a = 0 the
            # factor c*a^(c-1) is taken as 0 whenever it is not finite
            fac = b * np.power(a.val, b - 1.0)
            fac = np.where(np.isfinite(fac), fac, 0.0)
            return Dual(v, np.asarray(fac)[..., None] * a.eps)
        # general a^b via exp(b log a); rare path, positive base required
        av = _val(a)
        v = np.power(av, _val(b))
        la = np.log(av)
        da = a.eps if isinstance(a, Dual) else 0.0
        db = b.eps if isinstance(b, Dual) else 0.0
        term = 0.0
        if isinstance(b, Dual):
            term = term + la[..., None] * db
        if isinstance(a, Dual):
            term = term + (_val(b) / av)[..., None] * da
        return Dual(v, np.asarray(v)[..., None] * term)


def _sin(a):
    if isinstance(a, Dual):
        return Dual(np.sin(a.val), np.cos(a.val)[..., None] * a.eps)
    return np.sin(a)


def _cos(a):
    if isinstance(a, Dual):
        return Dual(np.cos(a.val), -np.sin(a.val)[..., None] * a.eps)
    return np.cos(a)


def _exp(a):
    if isinstance(a, Dual):
        v = np.exp(a.val)
        return Dual(v, v[..., None] * a.eps)
    return np.exp(a)


def _log(a):
    with np.errstate(all="ignore"):
        if isinstance(a, Dual):
            return Dual(np.log(a.val), a.eps / a.val[..., None])
        return np.log(a)


def _abs(a):
    if isinstance(a, Dual):
        return Dual(np.abs(a.val), np.sign(a.val)[..., None] * a.eps)
    return np.abs(a)


def _norm(channels):
    """Euclidean norm of a channel list; derivative 0 at the origin."""
    vals = [_val(c) for c in channels]
    r = np.sqrt(sum(v * v for v in vals))
    if not any(isinstance(c, Dual) for c in channels):
        return r
    num = 0.0
    for c, v in zip(channels, vals):
        if isinstance(c, Dual):
            num = num + v[..., None] * c.eps
    with np.errstate(all="ignore"):
        eps = np.where(r[..., None] > 0.0, num / np.where(r[..., None] > 0.0, r[..., None], 1.0), 0.0)
    return Dual(r, eps)


def _dot(u, v):
    acc = None
    for a, b in zip(u, v):
        p = _mul(a, b)
        acc = p if acc is None else _add(acc, p)
    return acc


# ---------------------------------------------------------------------------
# Evaluation.  env maps a variable name to a scalar or a tuple of channels.


def evaluate(node: Node, env: dict):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        a = evaluate(node.arg, env)
        if isinstance(a, tuple):
            return tuple(_neg(c) for c in a)
        return _neg(a)
    if isinstance(node, Bin):
        a = evaluate(node.left, env)
        b = evaluate(node.right, env)
        if node.op == "+":
            if isinstance(a, tuple):
                return tuple(_add(x, y) for x, y in zip(a, b))
            return _add(a, b)
        if node.op == "-":
            if isinstance(a, tuple):
                return tuple(_sub(x, y) for x, y in zip(a, b))
            return _sub(a, b)
        if node.op == "*":
            if isinstance(a, tuple):
                return tuple(_mul(x, b) for x in a)
            if isinstance(b, tuple):
                return tuple(_mul(a, y) for y in b)
            return _mul(a, b)
        if node.op == "/":
            if isinstance(a, tuple):
                return tuple(_div(x, b) for x in a)
            return _div(a, b)
        if node.op == "^":
            return _pow(a, b)
        raise AssertionError(node.op)
    if isinstance(node, Call):
        args = [evaluate(a, env) for a in node.args]
        if node.fn == "norm":
            x = args[0]
            return _norm(x) if isinstance(x, tuple) else _abs(x)
        if node.fn == "dot":
            u, v = args
            if isinstance(u, tuple):
                return _dot(u, v)
            return _mul(u, v)
        return {"sin": _sin, "cos": _cos, "exp": _exp, "log": _log}[node.fn](args[0])
    raise AssertionError(type(node))


# ---------------------------------------------------------------------------
# Pretty printing (round-trips through parse)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def pretty(node: Node) -> str:
    s, _ = _pp(node)
    return s


def _pp(node: Node):
    if isinstance(node, Num):
        return repr(node.value), 5
    if isinstance(node, Var):
        return node.name, 5
    if isinstance(node, Neg):
        s, p = _pp(node.arg)
        if p < _PREC["neg"]:
            s = f"({s})"
        return f"-{s}", _PREC["neg"]
    if isinstance(node, Bin):
        ls, lp = _pp(node.left)
        rs, rp = _pp(node.right)
        p = _PREC[node.op]
        if lp < p or (node.op == "^" and lp == p):
            ls = f"({ls})"
        if rp < p or (node.op in "-/" and rp == p):
            rs = f"({rs})"
        return f"{ls} {node.op} {rs}" if node.op != "^" else f"{ls}^{rs}", p
    if isinstance(node, Call):
        return f"{node.fn}({', '.join(pretty(a) for a in node.args)})", 5
    raise AssertionError(type(node))
