"""Expression language for user-defined immersion components.

Grammar (whitespace insignificant, ASCII only)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" ["-" | "+"] INTEGER)*
    primary := NUMBER | VARIABLE | CONSTANT
             | FUNC "(" expr ")" | "atan2" "(" expr "," expr ")"
             | "(" expr ")"

``FUNC`` is one of sin, cos, exp, sqrt; constants are ``pi`` and ``e``.
Variables default to ``u`` and ``v``.  Exponents must be integer literals and
there is no implicit multiplication (``2u`` is an error).

Error offsets are 1-based columns; a premature end of input is reported one
past the last character.
"""

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import jets
from .errors import ParseError
from .jets import Jet3

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}


# ------------------------------------------------------------------ AST nodes
@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # neg, sin, cos, exp, sqrt
    arg: object


@dataclass(frozen=True)
class Binary:
    op: str  # + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Atan2:
    y: object
    x: object


ExprAst = (Num, Var, Const, Unary, Binary, Pow, Atan2)


# ------------------------------------------------------------------ tokenizer
_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, ident, op, end
    text: str
    offset: int  # 1-based


def _tokenize(text):
    for i, ch in enumerate(text):
        if ord(ch) > 127:
            raise ParseError(f"non-ASCII character {ch!r}", i + 1, "ASCII text")
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos + 1,
                             "number, name, operator or parenthesis")
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    toks.append(_Tok("end", "", len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text, variables):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables)

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.tok
        if tok.text != text or tok.kind != "op":
            raise ParseError(f"unexpected {_describe(tok)}", tok.offset, repr(text))
        return self.advance()

    def parse(self):
        if self.tok.kind == "end":
            raise ParseError("empty expression", self.tok.offset, "an expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {_describe(self.tok)}", self.tok.offset,
                             "operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            arg = self.unary()
            return Unary("neg", arg) if op == "-" else arg
        return self.power()

    def power(self):
        node = self.primary()
        while self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text in "+-":
                sign = -1 if self.advance().text == "-" else 1
            tok = self.tok
            if tok.kind != "num" or not tok.text.isdigit():
                raise ParseError(f"unexpected {_describe(tok)}", tok.offset,
                                 "integer exponent")
            self.advance()
            node = Pow(node, sign * int(tok.text))
        return node

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(name, arg)
            if name == "atan2":
                self.expect("(")
                y = self.expr()
                self.expect(",")
                x = self.expr()
                self.expect(")")
                return Atan2(y, x)
            if name in self.variables:
                return Var(name)
            if name in CONSTANTS:
                return Const(name)
            allowed = ", ".join(self.variables + tuple(CONSTANTS)) or "constants"
            raise ParseError(f"unknown name {name!r}", tok.offset, allowed)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {_describe(tok)}", tok.offset,
                         "number, variable, function or '('")


def _describe(tok):
    return "end of input" if tok.kind == "end" else repr(tok.text)


def parse(text, variables=("u", "v")):
    """Parse ``text`` into an expression tree.

    Raises
    ------
    ParseError
        With the 1-based offset of the problem and what was expected.
    """
    return _Parser(text, variables).parse()


# ------------------------------------------------------------------ printing
def to_text(node):
    """Canonical, fully parenthesised rendering that re-parses to ``node``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_text(node.arg)})"
        return f"{node.op}({to_text(node.arg)})"
    if isinstance(node, Binary):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)})^{node.exponent}"
    if isinstance(node, Atan2):
        return f"atan2({to_text(node.y)}, {to_text(node.x)})"
    raise TypeError(f"not an expression node: {node!r}")


# ------------------------------------------------------------------ evaluation
_UNARY = {"neg": lambda a: -a, "sin": jets.sin, "cos": jets.cos, "exp": jets.exp,
          "sqrt": jets.sqrt}
_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
}


def evaluate(node, env):
    """Evaluate on jets or plain arrays; ``env`` maps variable names to values."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Unary):
        return _UNARY[node.op](evaluate(node.arg, env))
    if isinstance(node, Binary):
        left = evaluate(node.left, env)
        right = evaluate(node.right, env)
        if node.op == "/" and not isinstance(right, Jet3):
            return left * jets.reciprocal(right)
        return _BINARY[node.op](left, right)
    if isinstance(node, Pow):
        return jets.pow_int(evaluate(node.base, env), node.exponent)
    if isinstance(node, Atan2):
        return jets.atan2(evaluate(node.y, env), evaluate(node.x, env))
    raise TypeError(f"not an expression node: {node!r}")


def eval_jet(node, p, order=3):
    """Order-``order`` jet of the expression at ``p = (u, v)``.

    Constant sub-expressions are promoted, so the result is always a
    :class:`~kahler.jets.Jet3` with the broadcast shape of ``u`` and ``v``.
    """
    u, v = np.broadcast_arrays(np.asarray(p[0], float), np.asarray(p[1], float))
    env = {"u": Jet3.lift(u, "var_u", order), "v": Jet3.lift(v, "var_v", order)}
    out = evaluate(node, env)
    if not isinstance(out, Jet3):
        out = Jet3.constant(np.broadcast_to(out, u.shape), order)
    return out


def eval_constant(text):
    """Value of a variable-free expression such as ``2*pi``."""
    return float(evaluate(parse(text, variables=()), {}))


# ------------------------------------------------------------------ surface files
SURFACE_KEYS = ("name", "x1", "y1", "x2", "y2", "domain_u", "domain_v",
                "periodic_u", "periodic_v")
_REQUIRED = ("x1", "y1", "x2", "y2", "domain_u", "domain_v")


@dataclass(frozen=True)
class SurfaceDefinition:
    """Parsed contents of a surface definition file."""

    name: str
    components: tuple  # four ExprAst
    texts: tuple  # the four source strings
    domain: tuple  # ((u0, u1), (v0, v1))
    periodic: tuple  # (bool, bool)


def _split_top_level_comma(text):
    depth = 0
    cuts = []
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            cuts.append(i)
    return cuts


def split_arguments(text):
    """Split ``text`` at commas outside parentheses."""
    pieces, start = [], 0
    for cut in _split_top_level_comma(text):
        pieces.append(text[start:cut])
        start = cut + 1
    pieces.append(text[start:])
    return [p.strip() for p in pieces]


def _parse_bound(text, col, line):
    stripped = text.strip()
    if stripped in ("inf", "+inf", "-inf"):
        return -math.inf if stripped.startswith("-") else math.inf
    lead = len(text) - len(text.lstrip())
    try:
        return float(evaluate(parse(stripped, variables=()), {}))
    except ParseError as exc:
        raise ParseError(exc.message, col + lead + exc.offset - 1, exc.expected, line) from None


def parse_surface(text):
    """Parse a surface definition (``key = value`` lines, ``#`` comments).

    Keys: ``x1, y1, x2, y2`` (expressions in u, v), ``domain_u, domain_v``
    (two comma-separated constant expressions, ``inf``/``-inf`` allowed),
    ``periodic_u, periodic_v`` (``true``/``false``, default false) and an
    optional free-text ``name``.
    """
    values = {}
    where = {}
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            raise ParseError("missing '='", len(body.rstrip()) + 1, "'key = value'", lineno)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if key not in SURFACE_KEYS:
            raise ParseError(f"unknown key {key!r}", key_col, ", ".join(SURFACE_KEYS), lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", key_col, "each key once", lineno)
        value_col = len(key_part) + 2  # 1-based column of the first char after '='
        values[key] = value_part
        where[key] = (lineno, value_col)

    for key in _REQUIRED:
        if key not in values:
            raise ParseError(f"missing required key {key!r}", 1, key, len(lines) + 1)

    components = []
    texts = []
    for key in ("x1", "y1", "x2", "y2"):
        raw = values[key]
        lineno, col = where[key]
        lead = len(raw) - len(raw.lstrip())
        try:
            components.append(parse(raw.strip()))
        except ParseError as exc:
            raise ParseError(exc.message, col + lead + exc.offset - 1, exc.expected,
                             lineno) from None
        texts.append(raw.strip())

    domain = []
    for key in ("domain_u", "domain_v"):
        raw = values[key]
        lineno, col = where[key]
        cuts = _split_top_level_comma(raw)
        if len(cuts) != 1:
            off = col + (cuts[1] if len(cuts) > 1 else len(raw.rstrip()))
            raise ParseError("domain needs exactly two bounds", off, "'a, b'", lineno)
        lo = _parse_bound(raw[: cuts[0]], col, lineno)
        hi = _parse_bound(raw[cuts[0] + 1:], col + cuts[0] + 1, lineno)
        if not lo < hi:
            lead = len(raw) - len(raw.lstrip())
            raise ParseError("empty domain interval", col + lead, "lower < upper", lineno)
        domain.append((lo, hi))

    periodic = []
    for key in ("periodic_u", "periodic_v"):
        raw = values.get(key, "false")
        word = raw.strip().lower()
        if word not in ("true", "false"):
            lineno, col = where[key]
            lead = len(raw) - len(raw.lstrip())
            raise ParseError(f"bad flag {raw.strip()!r}", col + lead, "true or false", lineno)
        periodic.append(word == "true")
    for (lo, hi), per, key in zip(domain, periodic, ("domain_u", "domain_v")):
        if per and not (math.isfinite(lo) and math.isfinite(hi)):
            lineno, col = where[key]
            lead = len(values[key]) - len(values[key].lstrip())
            raise ParseError("periodic direction needs a finite domain", col + lead,
                             "finite bounds", lineno)

    name = values.get("name", "").strip() or "user surface"
    return SurfaceDefinition(name, tuple(components), tuple(texts), tuple(domain),
                             tuple(periodic))


def load_surface(path):
    """Read and parse a surface definition file."""
    return parse_surface(Path(path).read_text(encoding="ascii", errors="replace"))
