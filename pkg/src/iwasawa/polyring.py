"""Weighted polynomial rings over F_p and their sparse elements.

Monomials are exponent tuples. The monomial order is weighted degree first,
then reverse lexicographic on the fixed variable order (X_0 > X_1 > ...).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence


class RingMismatchError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class RingSpec:
    p: int
    names: tuple[str, ...]
    weights: tuple[int, ...] = ()
    order: str = field(default="wdegrevlex", compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.p >= 2**31:
            raise ValueError("characteristic must be below 2^31")
        if len(self.names) < 1:
            raise ValueError("at least one variable is required")
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be distinct")
        if not self.weights:
            object.__setattr__(self, "weights", (1,) * len(self.names))
        if len(self.weights) != len(self.names):
            raise ValueError("weight vector length must equal the variable count")
        if any(w <= 0 for w in self.weights):
            raise ValueError("all weights must be strictly positive")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def wdeg(self, e: Sequence[int]) -> int:
        return sum(w * x for w, x in zip(self.weights, e))

    def key(self, e: tuple[int, ...]):
        """Sort key: a larger key means a larger monomial."""
        return (self.wdeg(e), tuple(-x for x in reversed(e)))

    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def one(self) -> "GradedPoly":
        return self.const(1)

    def const(self, c: int) -> "GradedPoly":
        return GradedPoly(self, {(0,) * self.nvars: c})

    def var(self, name_or_index) -> "GradedPoly":
        i = self.names.index(name_or_index) if isinstance(name_or_index, str) else name_or_index
        e = [0] * self.nvars
        e[i] = 1
        return GradedPoly(self, {tuple(e): 1})

    def gens(self) -> tuple["GradedPoly", ...]:
        return tuple(self.var(i) for i in range(self.nvars))

    def monomial(self, e: Sequence[int], c: int = 1) -> "GradedPoly":
        return GradedPoly(self, {tuple(e): c})

    def parse(self, text: str) -> "GradedPoly":
        return parse_poly(self, text)

    def __str__(self):
        ws = ",".join(map(str, self.weights))
        return f"F_{self.p}[{','.join(self.names)}] weights=({ws})"


class GradedPoly:
    """Sparse polynomial; terms kept sorted by decreasing monomial order."""

    __slots__ = ("ring", "terms", "_hash", "__dict__")

    def __init__(self, ring: RingSpec, coeffs: Mapping[tuple[int, ...], int]):
        p = ring.p
        clean = {}
        for e, c in coeffs.items():
            c %= p
            if c:
                clean[e] = c
        self.ring = ring
        self.terms: tuple[tuple[tuple[int, ...], int], ...] = tuple(
            sorted(clean.items(), key=lambda t: ring.key(t[0]), reverse=True)
        )
        self._hash = None

    @classmethod
    def _raw(cls, ring, coeffs):
        # coeffs already reduced and nonzero
        obj = cls.__new__(cls)
        obj.ring = ring
        obj.terms = tuple(sorted(coeffs.items(), key=lambda t: ring.key(t[0]), reverse=True))
        obj._hash = None
        return obj

    @cached_property
    def coeffs(self) -> dict[tuple[int, ...], int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(self.terms[0][0]))

    def lm(self) -> tuple[int, ...]:
        return self.terms[0][0]

    def lc(self) -> int:
        return self.terms[0][1]

    def degree(self) -> int:
        """Weighted degree (maximum over terms); -1 for zero."""
        if not self.terms:
            return -1
        return max(self.ring.wdeg(e) for e, _ in self.terms)

    def is_homogeneous(self) -> bool:
        return len({self.ring.wdeg(e) for e, _ in self.terms}) <= 1

    def degree_in(self, i: int) -> int:
        return max((e[i] for e, _ in self.terms), default=-1)

    def variables(self) -> tuple[int, ...]:
        used = set()
        for e, _ in self.terms:
            used.update(i for i, x in enumerate(e) if x)
        return tuple(sorted(used))

    def _check(self, other):
        if isinstance(other, int):
            return self.ring.const(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        if other.ring != self.ring:
            raise RingMismatchError("polynomials live in different rings")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        d = dict(self.terms)
        p = self.ring.p
        for e, c in other.terms:
            v = (d.get(e, 0) + c) % p
            if v:
                d[e] = v
            else:
                d.pop(e, None)
        return GradedPoly._raw(self.ring, d)

    __radd__ = __add__

    def __neg__(self):
        p = self.ring.p
        return GradedPoly._raw(self.ring, {e: p - c for e, c in self.terms})

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.ring.p
        d: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = (d.get(e, 0) + c1 * c2) % p
        return GradedPoly._raw(self.ring, {e: c for e, c in d.items() if c})

    __rmul__ = __mul__

    def scale(self, c: int) -> "GradedPoly":
        c %= self.ring.p
        if not c:
            return self.ring.zero()
        p = self.ring.p
        return GradedPoly._raw(self.ring, {e: (x * c) % p for e, x in self.terms})

    def mul_monomial(self, m: tuple[int, ...], c: int = 1) -> "GradedPoly":
        p = self.ring.p
        return GradedPoly._raw(
            self.ring, {tuple(a + b for a, b in zip(e, m)): (x * c) % p for e, x in self.terms}
        )

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def monic(self) -> "GradedPoly":
        if not self.terms:
            return self
        return self.scale(pow(self.lc(), -1, self.ring.p))

    def homogeneous_part(self, d: int) -> "GradedPoly":
        return GradedPoly._raw(self.ring, {e: c for e, c in self.terms if self.ring.wdeg(e) == d})

    def lowest_degree(self) -> int:
        return min(self.ring.wdeg(e) for e, _ in self.terms)

    def evaluate(self, values: Mapping[int, int]) -> "GradedPoly":
        """Substitute constants for some variables (index -> value)."""
        p = self.ring.p
        d: dict = {}
        for e, c in self.terms:
            ne = list(e)
            for i, v in values.items():
                c = c * pow(v, e[i], p) % p
                ne[i] = 0
            ne = tuple(ne)
            d[ne] = (d.get(ne, 0) + c) % p
        return GradedPoly(self.ring, d)

    def derivative(self, i: int) -> "GradedPoly":
        d = {}
        for e, c in self.terms:
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                d[tuple(ne)] = c * e[i]
        return GradedPoly(self.ring, d)

    def __eq__(self, other):
        if isinstance(other, int):
            return self == self.ring.const(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, self.terms))
        return self._hash

    def __repr__(self):
        return f"GradedPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            mono = "*".join(
                n if x == 1 else f"{n}^{x}" for n, x in zip(self.ring.names, e) if x
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)


def divides_monomial(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def monomial_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def monomial_quotient(b, a):
    return tuple(y - x for x, y in zip(a, b))


def divide(f: GradedPoly, divisors: Sequence[GradedPoly]):
    """Multivariate division: returns (quotients, remainder)."""
    ring = f.ring
    p = ring.p
    for g in divisors:
        if g.ring != ring:
            raise RingMismatchError("polynomials live in different rings")
        if g.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
    quots: list[dict] = [{} for _ in divisors]
    work = dict(f.terms)
    rem: dict = {}
    lead = [(g.lm(), pow(g.lc(), -1, p)) for g in divisors]
    key = ring.key
    while work:
        t = max(work, key=key)
        c = work[t]
        for i, (m, inv) in enumerate(lead):
            if divides_monomial(m, t):
                q = monomial_quotient(t, m)
                qc = c * inv % p
                quots[i][q] = (quots[i].get(q, 0) + qc) % p
                for e, x in divisors[i].terms:
                    ne = tuple(a + b for a, b in zip(e, q))
                    v = (work.get(ne, 0) - qc * x) % p
                    if v:
                        work[ne] = v
                    else:
                        work.pop(ne, None)
                break
        else:
            rem[t] = c
            del work[t]
    return [GradedPoly(ring, q) for q in quots], GradedPoly(ring, rem)


def exact_quotient(f: GradedPoly, g: GradedPoly) -> GradedPoly | None:
    """f / g if g divides f, else None."""
    (q,), r = divide(f, [g])
    return q if r.is_zero() else None


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class PolyParseError(ValueError):
    def __init__(self, msg, col=None):
        super().__init__(msg if col is None else f"{msg} (column {col})")
        self.col = col


def tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        num, name, sym = m.groups()
        col = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if num is not None:
            out.append(("num", int(num), col))
        elif name is not None:
            out.append(("name", name, col))
        else:
            out.append(("sym", sym, col))
        pos = m.end()
    return out


class ExprParser:
    """Recursive-descent parser for +,-,*,^ and parentheses.

    `make_const`, `make_var` build atoms; atoms must support +, -, *, and **.
    """

    def __init__(self, tokens, make_const, make_var):
        self.toks = tokens
        self.i = 0
        self.make_const = make_const
        self.make_var = make_var

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, sym):
        t = self.take()
        if t is None or t[0] != "sym" or t[1] != sym:
            col = t[2] if t else None
            raise PolyParseError(f"expected '{sym}'", col)

    def parse(self):
        v = self.expr()
        if self.peek() is not None:
            raise PolyParseError(f"unexpected token {self.peek()[1]!r}", self.peek()[2])
        return v

    def expr(self):
        sign = 1
        t = self.peek()
        if t and t[0] == "sym" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
        v = self.term()
        if sign < 0:
            v = -v
        while True:
            t = self.peek()
            if t and t[0] == "sym" and t[1] in "+-":
                self.take()
                r = self.term()
                v = v + r if t[1] == "+" else v - r
            else:
                return v

    def term(self):
        v = self.factor()
        while True:
            t = self.peek()
            if t and t[0] == "sym" and t[1] == "*":
                self.take()
                v = v * self.factor()
            elif t and (t[0] in ("name", "num") or (t[0] == "sym" and t[1] == "(")):
                v = v * self.factor()  # implicit multiplication
            else:
                return v

    def factor(self):
        v = self.atom()
        t = self.peek()
        if t and t[0] == "sym" and t[1] == "^":
            self.take()
            e = self.take()
            if e is None or e[0] != "num":
                raise PolyParseError("expected integer exponent", e[2] if e else None)
            v = v ** e[1]
        return v

    def atom(self):
        t = self.take()
        if t is None:
            raise PolyParseError("unexpected end of expression")
        kind, val, col = t
        if kind == "num":
            return self.make_const(val)
        if kind == "name":
            try:
                return self.make_var(val)
            except KeyError:
                raise PolyParseError(f"unknown variable {val!r}", col) from None
        if val == "(":
            v = self.expr()
            self.expect(")")
            return v
        raise PolyParseError(f"unexpected symbol {val!r}", col)


def parse_poly(ring: RingSpec, text: str) -> GradedPoly:
    def make_var(name):
        if name not in ring.names:
            raise KeyError(name)
        return ring.var(name)

    return ExprParser(tokenize(text), ring.const, make_var).parse()


def poly_from_terms(ring: RingSpec, items: Iterable[tuple[Sequence[int], int]]) -> GradedPoly:
    d: dict = {}
    for e, c in items:
        e = tuple(e)
        d[e] = d.get(e, 0) + c
    return GradedPoly(ring, d)
