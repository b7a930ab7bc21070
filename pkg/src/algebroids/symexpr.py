"""Minimal exact symbolic scalar expressions over chart coordinates.

Expressions are sympy trees restricted to a small fragment: exact rational
constants, named variables, sums, products, integer powers, quotients and the
elementary functions sin, cos, exp.  Canonicalization is exact (and unique)
on the rational fragment; identity checks that leave it fall back to seeded
random numeric sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

SAMPLE_SEED = 0xA15EB01D

_FUNCS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp}


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownVariableError(ExprError):
    pass


class EvalError(ExprError):
    pass


@dataclass(frozen=True)
class VarEnv:
    """Ordered chart variables with their roles.

    Roles: "base" for base coordinates x^i, "fiber" for fiber coordinates,
    "param" for free parameters.
    """

    names: tuple[str, ...]
    roles: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ExprError(f"duplicate variable names in {self.names}")
        if self.roles and len(self.roles) != len(self.names):
            raise ExprError("roles must match names")

    @classmethod
    def make(cls, base=(), fiber=(), param=()):
        names = tuple(base) + tuple(fiber) + tuple(param)
        roles = ("base",) * len(base) + ("fiber",) * len(fiber) + ("param",) * len(param)
        return cls(names, roles)

    @property
    def symbols(self):
        return tuple(sp.Symbol(n) for n in self.names)

    def __contains__(self, name):
        return name in self.names


# ---------------------------------------------------------------------------
# Parsing.  Grammar (bit-exact):
#   expr   := term (('+'|'-') term)*
#   term   := factor (('*'|'/') factor)*
#   factor := base ('^' int)?
#   base   := number | ident | func '(' expr ')' | '(' expr ')'
#   func   := 'sin' | 'cos' | 'exp'
#   number := int ('/' int)? | decimal
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text, env):
        self.text = text
        self.env = env
        self.pos = 0

    def error(self, msg):
        raise ParseError(msg, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self):
        e = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error(f"unexpected character {self.text[self.pos]!r}")
        return e

    def expr(self):
        sign = 1
        while True:
            if self.accept("-"):
                sign = -sign
            elif self.accept("+"):
                pass
            else:
                break
        e = sign * self.term()
        while True:
            if self.accept("+"):
                e = e + self.term()
            elif self.accept("-"):
                e = e - self.term()
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            if self.accept("*"):
                e = e * self.factor()
            elif self.accept("/"):
                e = e / self.factor()
            else:
                return e

    def factor(self):
        b = self.base()
        if self.accept("^"):
            sign = -1 if self.accept("-") else 1
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if self.pos == start:
                self.error("expected integer exponent")
            return b ** (sign * int(self.text[start:self.pos]))
        return b

    def base(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            e = self.expr()
            if not self.accept(")"):
                self.error("expected ')'")
            return e
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha():
            start = self.pos
            while self.pos < len(self.text) and (
                self.text[self.pos].isalnum() or self.text[self.pos] == "_"
            ):
                self.pos += 1
            name = self.text[start:self.pos]
            if name in _FUNCS:
                if not self.accept("("):
                    self.error(f"expected '(' after {name}")
                e = self.expr()
                if not self.accept(")"):
                    self.error("expected ')'")
                return _FUNCS[name](e)
            if name not in self.env:
                raise UnknownVariableError(f"unknown variable {name!r}")
            return sp.Symbol(name)
        self.error("expected number, variable or '('")

    def number(self):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            self.pos += 1
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return sp.Rational(self.text[start:self.pos])
        return sp.Integer(self.text[start:self.pos])


def parse(text, env):
    """Parse `text` against the grammar and return a canonical expression."""
    return canonicalize(_Parser(text, env).parse())


def canonicalize(e):
    """Canonical form: unique for rational functions, idempotent everywhere.

    Rational subexpressions are put over a common denominator with expanded
    numerator and denominator; no trigonometric rewriting is attempted.
    """
    e = sp.sympify(e)
    num, den = sp.fraction(sp.cancel(sp.together(e)))
    num = sp.expand(num)
    den = sp.expand(den)
    if den == 1:
        return num
    return num / den


def diff(e, v):
    """Exact partial derivative with respect to variable name or symbol."""
    if isinstance(v, str):
        v = sp.Symbol(v)
    return canonicalize(sp.diff(sp.sympify(e), v))


def evaluate(e, point):
    """Numeric evaluation at a point (mapping name or symbol -> float)."""
    subs = {sp.Symbol(k) if isinstance(k, str) else k: sp.Float(v) for k, v in point.items()}
    try:
        val = sp.sympify(e).evalf(subs=subs)
    except ZeroDivisionError as exc:
        raise EvalError(f"division by zero evaluating {e}") from exc
    val = complex(val)
    if val.imag != 0 or not math.isfinite(val.real):
        raise EvalError(f"non-finite value {val} for {e} at {point}")
    return val.real


def free_variables(e):
    return {s.name for s in sp.sympify(e).free_symbols}


def is_rational_function(e):
    """True when e lies in the rational fragment (no sin/cos/exp)."""
    return not sp.sympify(e).has(sp.sin, sp.cos, sp.exp)


@dataclass
class ZeroTestConfig:
    seed: int = SAMPLE_SEED
    samples: int = 20
    tol: float = 1e-9
    box: float = 2.0


def is_zero(e, config: ZeroTestConfig | None = None):
    """Exact zero test on the rational fragment, sampled numeric otherwise.

    The numeric fallback draws seeded points uniformly from [-box, box]^k,
    skipping points too close to denominator zeros.
    """
    e = canonicalize(e)
    if e == 0:
        return True
    if is_rational_function(e):
        return False
    cfg = config or ZeroTestConfig()
    syms = sorted(sp.sympify(e).free_symbols, key=lambda s: s.name)
    if not syms:
        return abs(complex(e.evalf())) <= cfg.tol
    rng = np.random.default_rng(cfg.seed)
    fn = lambdify(syms, e)
    checked = 0
    while checked < cfg.samples:
        pt = rng.uniform(-cfg.box, cfg.box, size=len(syms))
        try:
            val = fn(*pt)
        except (ZeroDivisionError, FloatingPointError):
            continue
        if not np.isfinite(val):
            continue
        if abs(val) > cfg.tol:
            return False
        checked += 1
    return True


def lambdify(symbols, exprs):
    """numpy-callable for an expression or nested structure of expressions."""
    return sp.lambdify(symbols, exprs, modules="numpy")


def to_str(e):
    """Printer whose output re-parses to the same canonical form."""
    return sp.sstr(sp.sympify(e)).replace("**", "^")


__all__ = [
    "VarEnv",
    "ExprError",
    "ParseError",
    "UnknownVariableError",
    "EvalError",
    "ZeroTestConfig",
    "parse",
    "canonicalize",
    "diff",
    "evaluate",
    "free_variables",
    "is_rational_function",
    "is_zero",
    "lambdify",
    "to_str",
    "SAMPLE_SEED",
]
