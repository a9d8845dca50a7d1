"""Power series over Z_p with explicit precision, and torsion modules over
Lambda = Z_p[[T]].

A PadicSeries stores coefficients of T^0, ..., T^{b-1} modulo p^a: the true
series is known modulo the ideal (p^a, T^b). Every operation derives the
precision of its result from the precisions of its inputs.

The bridge to the graded side uses the (p, T)-adic filtration, with
ord(sum c_j T^j) = min(v_p(c_j) + j). Its associated graded ring is
F_p[X0, X1] with X0 the symbol of p and X1 the symbol of T.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

from .graded_structure import HeightOneSupport, NotTorsionError, delta_vectors, height_one_support, is_pseudo_null
from .groebner import ModuleOrder, groebner, reduce_vector
from .localization import Divisor
from .modules import ModulePresentation, minimize_generators
from .polyring import ExprParser, GradedPoly, PolyParseError, RingSpec, is_prime, tokenize

DEFAULT_A = 12
DEFAULT_B = 20


class PrecisionError(ArithmeticError):
    """The available precision does not certify the requested result."""


def vp(n: int, p: int, cap: int | None = None) -> int | float:
    """p-adic valuation of an integer; capped (or infinite) for zero."""
    if n == 0:
        return math.inf if cap is None else cap
    v = 0
    while n % p == 0:
        n //= p
        v += 1
        if cap is not None and v >= cap:
            return cap
    return v


def _frac_val(x: Fraction, p: int):
    if x == 0:
        return math.inf
    return vp(x.numerator, p) - vp(x.denominator, p)


# ----------------------------------------------------------------- series


class PadicSeries:
    """Element of Z_p[[T]] known modulo (p^a, T^b)."""

    __slots__ = ("p", "a", "b", "coeffs")

    def __init__(self, p: int, coeffs: Sequence[int], a: int = DEFAULT_A, b: int = DEFAULT_B):
        if not is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        if a < 1 or b < 1:
            raise ValueError("precision exponents must be positive")
        mod = p**a
        cs = [int(c) % mod for c in list(coeffs)[:b]]
        cs += [0] * (b - len(cs))
        self.p, self.a, self.b = p, a, b
        self.coeffs = tuple(cs)

    @classmethod
    def from_poly(cls, p, coeffs, a=DEFAULT_A, b=DEFAULT_B):
        coeffs = list(coeffs)
        if any(c % p**a for c in coeffs[b:]):
            raise PrecisionError("polynomial has terms beyond the T-adic precision")
        return cls(p, coeffs, a, b)

    @classmethod
    def one(cls, p, a=DEFAULT_A, b=DEFAULT_B):
        return cls(p, [1], a, b)

    @classmethod
    def T(cls, p, a=DEFAULT_A, b=DEFAULT_B):
        return cls(p, [0, 1], a, b)

    @property
    def modulus(self) -> int:
        return self.p**self.a

    def coeff_val(self, i: int) -> int:
        """v_p of the i-th coefficient, capped at a."""
        return vp(self.coeffs[i], self.p, self.a)

    def is_zero(self) -> bool:
        """Indistinguishable from zero at the current precision."""
        return not any(self.coeffs)

    def mu(self) -> int:
        if self.is_zero():
            raise PrecisionError("series is zero within precision")
        return min(self.coeff_val(i) for i in range(self.b))

    def min_val(self) -> int:
        return min((self.coeff_val(i) for i in range(self.b)), default=self.a)

    def t_order(self) -> int:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return self.b

    def is_unit(self) -> bool:
        return self.coeffs[0] % self.p != 0

    def ord(self) -> int:
        """(p, T)-adic order min(v_p(c_j) + j), capped at min(a, b)."""
        cap = min(self.a, self.b)
        best = cap
        for j, c in enumerate(self.coeffs):
            if j >= best:
                break
            if c:
                best = min(best, vp(c, self.p) + j)
        return best

    def truncate(self, a: int | None = None, b: int | None = None) -> "PadicSeries":
        a = self.a if a is None else min(a, self.a)
        b = self.b if b is None else min(b, self.b)
        return PadicSeries(self.p, self.coeffs[:b], a, b)

    def _check(self, other):
        if not isinstance(other, PadicSeries):
            if isinstance(other, int):
                return PadicSeries(self.p, [other], self.a, self.b)
            return NotImplemented
        if other.p != self.p:
            raise ValueError("series over different primes")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        a, b = min(self.a, other.a), min(self.b, other.b)
        return PadicSeries(self.p, [x + y for x, y in zip(self.coeffs[:b], other.coeffs[:b])], a, b)

    __radd__ = __add__

    def __neg__(self):
        return PadicSeries(self.p, [-x for x in self.coeffs], self.a, self.b)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.p
        a = min(self.a + other.min_val(), other.a + self.min_val())
        b = min(self.b, other.b)
        mod = p**a
        out = [0] * b
        f, g = self.coeffs, other.coeffs
        for i in range(b):
            if f[i]:
                fi = f[i]
                for j in range(b - i):
                    if g[j]:
                        out[i + j] += fi * g[j]
        return PadicSeries(p, [x % mod for x in out], a, b)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = PadicSeries.one(self.p, self.a, self.b)
        for _ in range(n):
            out = out * self
        return out

    def shift(self, k: int) -> "PadicSeries":
        """T^k * self (exact: T-precision grows by k)."""
        return PadicSeries(self.p, [0] * k + list(self.coeffs), self.a, self.b + k)

    def div_p(self, k: int) -> "PadicSeries":
        if any(c % self.p**k for c in self.coeffs):
            raise ValueError(f"series not divisible by p^{k}")
        if k >= self.a:
            raise PrecisionError("division by p exhausts the p-adic precision")
        return PadicSeries(self.p, [c // self.p**k for c in self.coeffs], self.a - k, self.b)

    def mul_p(self, k: int) -> "PadicSeries":
        return PadicSeries(self.p, [c * self.p**k for c in self.coeffs], self.a + k, self.b)

    def inverse(self) -> "PadicSeries":
        if not self.is_unit():
            raise ZeroDivisionError("series is not a unit")
        mod = self.modulus
        f = self.coeffs
        inv0 = pow(f[0], -1, mod)
        out = [inv0]
        for n in range(1, self.b):
            s = sum(f[k] * out[n - k] for k in range(1, n + 1))
            out.append(-s * inv0 % mod)
        return PadicSeries(self.p, out, self.a, self.b)

    def agrees(self, other: "PadicSeries") -> bool:
        """Equal modulo the joint precision of both."""
        a, b = min(self.a, other.a), min(self.b, other.b)
        mod = self.p**a
        return all((x - y) % mod == 0 for x, y in zip(self.coeffs[:b], other.coeffs[:b]))

    def __eq__(self, other):
        return (
            isinstance(other, PadicSeries)
            and (self.p, self.a, self.b, self.coeffs) == (other.p, other.a, other.b, other.coeffs)
        )

    def __hash__(self):
        return hash((self.p, self.a, self.b, self.coeffs))

    def __repr__(self):
        return f"PadicSeries({self})"

    def __str__(self):
        return format_series(self)


def _term(c: int, j: int) -> str:
    if j == 0:
        return str(c)
    mon = "T" if j == 1 else f"T^{j}"
    return mon if c == 1 else f"{c}*{mon}"


def format_series(f: PadicSeries) -> str:
    terms = [_term(c, j) for j, c in enumerate(f.coeffs) if c]
    body = " + ".join(terms) if terms else "0"
    return f"{body} + O({f.p}^{f.a}, T^{f.b})"


class _IntPoly:
    """Integer polynomial in T used while parsing literals."""

    def __init__(self, c):
        self.c = dict(c)

    def _op(self, other, sign):
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out.get(k, 0) + sign * v
        return _IntPoly({k: v for k, v in out.items() if v})

    def __add__(self, other):
        return self._op(other, 1)

    def __sub__(self, other):
        return self._op(other, -1)

    def __neg__(self):
        return _IntPoly({k: -v for k, v in self.c.items()})

    def __mul__(self, other):
        out: dict = {}
        for i, x in self.c.items():
            for j, y in other.c.items():
                out[i + j] = out.get(i + j, 0) + x * y
        return _IntPoly({k: v for k, v in out.items() if v})

    def __pow__(self, n):
        out = _IntPoly({0: 1})
        for _ in range(n):
            out = out * self
        return out


_TAIL = re.compile(r"\+\s*O\(\s*(\d+)\s*\^\s*(\d+)\s*,\s*T\s*\^\s*(\d+)\s*\)\s*$")
_PREC = re.compile(r"^\s*(\d+)\s*\^\s*(\d+)\s*,\s*T\s*\^\s*(\d+)\s*$")


def parse_precision(text: str) -> tuple[int, int, int]:
    """'p^a,T^b' -> (p, a, b)."""
    m = _PREC.match(text)
    if not m:
        raise PolyParseError(f"bad precision {text!r}; expected p^a,T^b")
    return int(m.group(1)), int(m.group(2)), int(m.group(3))


def parse_int_poly(text: str) -> dict[int, int]:
    def make_var(name):
        if name != "T":
            raise KeyError(name)
        return _IntPoly({1: 1})

    return ExprParser(tokenize(text), lambda c: _IntPoly({0: c} if c else {}), make_var).parse().c


def parse_series(text: str, p: int | None = None, a: int | None = None, b: int | None = None) -> PadicSeries:
    """Parse '3 + 2*T^2 + O(3^12, T^20)'.

    The O(...) tail may be omitted only when p, a and b are all supplied.
    """
    m = _TAIL.search(text)
    if m:
        tp, ta, tb = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if p is not None and tp != p:
            raise PolyParseError(f"series prime {tp} does not match {p}")
        p, a, b = tp, ta, tb
        body = text[: m.start()]
    else:
        if p is None or a is None or b is None:
            raise PolyParseError("series literal needs a precision tail O(p^a, T^b)")
        body = text
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    body = body.strip() or "0"
    c = parse_int_poly(body)
    deg = max(c, default=0)
    coeffs = [c.get(i, 0) for i in range(deg + 1)]
    return PadicSeries.from_poly(p, coeffs, a, b)


# ------------------------------------------------------------ polynomials


class PadicPoly:
    """Polynomial in T over Z_p with coefficients known modulo p^a."""

    __slots__ = ("p", "a", "coeffs")

    def __init__(self, p: int, coeffs: Sequence[int], a: int):
        if a < 1:
            raise PrecisionError("no p-adic precision left")
        mod = p**a
        cs = [int(c) % mod for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.p, self.a, self.coeffs = p, a, tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def is_distinguished(self) -> bool:
        return self.is_monic() and all(c % self.p == 0 for c in self.coeffs[:-1])

    def truncate(self, a: int) -> "PadicPoly":
        return PadicPoly(self.p, self.coeffs, min(a, self.a))

    def __mul__(self, other: "PadicPoly") -> "PadicPoly":
        a = min(self.a, other.a)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return PadicPoly(self.p, out, a)

    def agrees(self, other: "PadicPoly") -> bool:
        a = min(self.a, other.a)
        mod = self.p**a
        n = max(len(self.coeffs), len(other.coeffs))
        x = list(self.coeffs) + [0] * (n - len(self.coeffs))
        y = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return all((u - v) % mod == 0 for u, v in zip(x, y))

    def to_series(self, b: int) -> PadicSeries:
        if self.degree >= b:
            raise PrecisionError("polynomial does not fit the T-adic precision")
        return PadicSeries(self.p, self.coeffs, self.a, b)

    def __eq__(self, other):
        return isinstance(other, PadicPoly) and (self.p, self.a, self.coeffs) == (other.p, other.a, other.coeffs)

    def __hash__(self):
        return hash((self.p, self.a, self.coeffs))

    def __repr__(self):
        return f"PadicPoly({self}, mod {self.p}^{self.a})"

    def __str__(self):
        terms = []
        for j in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[j]
            if c:
                terms.append(_term(c, j))
        return " + ".join(terms) if terms else "0"


# ---------------------------------------------------------- Weierstrass


def _first_unit_index(g: PadicSeries) -> int | None:
    for i, c in enumerate(g.coeffs):
        if c % g.p:
            return i
    return None


def weierstrass_divide(f: PadicSeries, g: PadicSeries) -> tuple[PadicSeries, PadicSeries]:
    """f = q g + r with r a polynomial of degree < lambda(g).

    The quotient is known modulo (p^a, T^{b - lambda}); the remainder needs
    b >= 2 lambda to be certified.
    """
    if f.p != g.p:
        raise ValueError("series over different primes")
    p = f.p
    lam = _first_unit_index(g)
    if lam is None:
        raise ValueError("divisor is zero modulo p to its full T-precision")
    a = min(f.a, g.a)
    b = min(f.b, g.b)
    if lam >= b or b - lam < lam:
        raise PrecisionError(f"T-precision {b} is too small for a divisor with lambda = {lam}")
    mod = p**a
    bq = b - lam
    P = list(g.coeffs[:lam])
    U = PadicSeries(p, g.coeffs[lam:b], a, bq)
    Uinv = U.inverse().coeffs
    tau_f = list(f.coeffs[lam:b])

    def mul(x, y, n):
        out = [0] * n
        for i, xi in enumerate(x[:n]):
            if xi:
                for j, yj in enumerate(y[: n - i]):
                    out[i + j] += xi * yj
        return [c % mod for c in out]

    q = mul(tau_f, Uinv, bq)
    for _ in range(a + 2):
        qP = mul(q, P, bq + lam)
        tau_qP = (qP[lam:] + [0] * bq)[:bq]
        nq = mul([(x - y) for x, y in zip(tau_f, tau_qP)], Uinv, bq)
        if nq == q:
            break
        q = nq
    else:
        raise ArithmeticError("Weierstrass division failed to converge")
    qg = mul(q, list(g.coeffs[:b]), b)
    r = [(x - y) % mod for x, y in zip(f.coeffs[:b], qg)]
    if any(r[lam:bq]):
        raise ArithmeticError("remainder is not a polynomial of degree < lambda")
    r = r[:lam]
    pv = [vp(c, p, a) for c in P]
    err = _quotient_errors(pv, lam, bq, a)
    ar = a
    for i in range(lam):
        for k in range(i + 1):
            ar = min(ar, err[i - k] + pv[k])
    aq, bq2 = _staircase_cut(err)
    return PadicSeries(p, q, aq, bq2), PadicSeries(p, r, ar, b)


def _quotient_errors(pv: Sequence, lam: int, bq: int, a: int) -> list[int]:
    """Certified p-adic precision of each quotient coefficient.

    Coefficient j of the quotient depends through the lower part P of the
    divisor on coefficients j+1 .. j+lambda, and those beyond the T-precision
    are unknown. Each step through P gains v_p of the P-coefficient used.
    """
    err = [a] * bq
    while True:
        s = []
        for i in range(bq):
            best = a
            for k, v in enumerate(pv):
                if v == math.inf:
                    continue
                idx = i + lam - k
                best = min(best, v + (err[idx] if idx < bq else 0))
            s.append(best)
        new, run = [], a
        for x in s:
            run = min(run, x)
            new.append(int(run))
        if new == err:
            return err
        err = new


def _staircase_cut(err: Sequence[int]) -> tuple[int, int]:
    """(a, b) with err[j] >= a for j < b maximizing a*b (ties: larger a)."""
    best = (err[0], 1)
    for b in range(1, len(err) + 1):
        a = err[b - 1]
        if a * b > best[0] * best[1] or (a * b == best[0] * best[1] and a > best[0]):
            best = (a, b)
    return best


@dataclass(frozen=True)
class WeierstrassForm:
    p: int
    mu: int
    F: PadicPoly
    u: PadicSeries

    @property
    def lam(self) -> int:
        return self.F.degree

    def reconstruct(self) -> PadicSeries:
        return self.F.to_series(max(self.u.b, self.F.degree + 1)).mul_p(self.mu) * self.u


def weierstrass_prepare(f: PadicSeries) -> WeierstrassForm:
    """f = p^mu F u with F distinguished and u a unit."""
    if f.is_zero():
        raise PrecisionError("series is indistinguishable from 0 at this precision")
    mu = f.mu()
    g = f.div_p(mu) if mu else f
    lam = _first_unit_index(g)
    if lam is None:
        raise PrecisionError("series is zero modulo p^(mu+1) to full T-precision")
    if lam == 0:
        return WeierstrassForm(f.p, mu, PadicPoly(f.p, [1], g.a), g)
    Tl = PadicSeries(f.p, [0] * lam + [1], g.a, g.b)
    q, r = weierstrass_divide(Tl, g)
    F = PadicPoly(f.p, [-c for c in r.coeffs[:lam]] + [1], r.a)
    return WeierstrassForm(f.p, mu, F, q.inverse())


# ------------------------------------------------------------ modules


@dataclass(frozen=True)
class LambdaModule:
    """Cokernel of a relation matrix over Z_p[[T]] with good-filtration shifts."""

    p: int
    ngens: int
    relations: tuple[tuple[PadicSeries, ...], ...]
    shifts: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.shifts:
            object.__setattr__(self, "shifts", (0,) * self.ngens)
        if len(self.shifts) != self.ngens:
            raise ValueError("shift vector length must equal the generator count")
        for row in self.relations:
            if len(row) != self.ngens:
                raise ValueError("relation row length must equal the generator count")
            for x in row:
                if x.p != self.p:
                    raise ValueError("entry over a different prime")

    @classmethod
    def cyclic(cls, gens: Sequence[PadicSeries], shift: int = 0) -> "LambdaModule":
        return cls(gens[0].p, 1, tuple((g,) for g in gens), (shift,))

    def direct_sum(self, other: "LambdaModule") -> "LambdaModule":
        z1 = [PadicSeries(self.p, [], *self.precision())] * other.ngens
        z2 = [PadicSeries(self.p, [], *other.precision())] * self.ngens
        rows = tuple(tuple(r) + tuple(z1) for r in self.relations) + tuple(
            tuple(z2) + tuple(r) for r in other.relations
        )
        return LambdaModule(self.p, self.ngens + other.ngens, rows, self.shifts + other.shifts)

    def with_shifts(self, shifts: Sequence[int]) -> "LambdaModule":
        return LambdaModule(self.p, self.ngens, self.relations, tuple(shifts))

    def precision(self) -> tuple[int, int]:
        entries = [x for r in self.relations for x in r]
        if not entries:
            return DEFAULT_A, DEFAULT_B
        return min(x.a for x in entries), min(x.b for x in entries)


def _det_series(matrix, rows, cols, memo):
    key = (rows, cols)
    if key in memo:
        return memo[key]
    if len(rows) == 1:
        d = matrix[rows[0]][cols[0]]
    else:
        d = None
        for j, c in enumerate(cols):
            x = matrix[rows[0]][c]
            if x.is_zero():
                continue
            t = x * _det_series(matrix, rows[1:], cols[:j] + cols[j + 1 :], memo)
            d = t if d is None else (d - t if j % 2 else d + t)
        if d is None:
            x = matrix[rows[0]][cols[0]]
            d = PadicSeries(x.p, [], x.a, x.b)
    memo[key] = d
    return d


def maximal_minors(M: LambdaModule) -> list[PadicSeries]:
    """Maximal minors that are certified nonzero."""
    g = M.ngens
    memo: dict = {}
    out = []
    for rows in combinations(range(len(M.relations)), g):
        d = _det_series(M.relations, rows, tuple(range(g)), memo)
        if not d.is_zero():
            out.append(d)
    return out


def _poly_divmod_monic(A: list, B: list):
    """Divide by monic B over Q (Fraction lists, lowest degree first)."""
    A = list(A)
    n = len(B) - 1
    Q = [Fraction(0)] * max(len(A) - n, 0)
    for i in range(len(A) - 1, n - 1, -1):
        c = A[i]
        if c:
            Q[i - n] = c
            for j, y in enumerate(B):
                A[i - n + j] -= c * y
    R = A[:n]
    return Q, R


def _trim(R: list, p: int, prec: int) -> list:
    R = [c if _frac_val(c, p) < prec else Fraction(0) for c in R]
    while R and R[-1] == 0:
        R.pop()
    return R


def padic_poly_gcd(F1: PadicPoly, F2: PadicPoly) -> PadicPoly:
    """Monic gcd of two distinguished polynomials by a p-adic Euclidean
    sequence; absolute precision is tracked through every division."""
    p = F1.p
    prec = min(F1.a, F2.a)
    A = [Fraction(c) for c in F1.coeffs]
    B = [Fraction(c) for c in F2.coeffs]
    if len(A) < len(B):
        A, B = B, A
    while True:
        if len(B) == 1:
            return PadicPoly(p, [1], prec)
        Q, R = _poly_divmod_monic(A, B)
        qmin = min((_frac_val(c, p) for c in Q if c), default=0)
        prec = min(prec, prec + qmin)
        R = _trim(R, p, prec)
        if not R:
            break
        lc = R[-1]
        v = _frac_val(lc, p)
        rmin = min(_frac_val(c, p) for c in R if c)
        prec = prec - v + min(0, rmin - v)
        if prec <= 0:
            raise PrecisionError("p-adic gcd lost all precision")
        A, B = B, [c / lc for c in R]
    if any(_frac_val(c, p) < 0 for c in B):
        raise PrecisionError("p-adic gcd produced non-integral coefficients")
    mod = p**prec
    coeffs = [c.numerator * pow(c.denominator, -1, mod) % mod for c in B]
    return PadicPoly(p, coeffs, prec)


@dataclass(frozen=True)
class LambdaGcd:
    mu: int
    F: PadicPoly


def lambda_gcd(elements: Sequence[PadicSeries]) -> LambdaGcd:
    """gcd in Lambda as p^mu times a distinguished polynomial."""
    forms = [weierstrass_prepare(x) for x in elements]
    if not forms:
        raise NotTorsionError("no nonzero element")
    mu = min(w.mu for w in forms)
    F = forms[0].F
    for w in forms[1:]:
        if F.degree == 0:
            break
        F = padic_poly_gcd(F, w.F)
    return LambdaGcd(mu, F)


def char_gcd(M: LambdaModule) -> LambdaGcd:
    if M.ngens == 0:
        return LambdaGcd(0, PadicPoly(M.p, [1], M.precision()[0]))
    ms = maximal_minors(M)
    if not ms:
        raise NotTorsionError("module is not torsion (no maximal minor is certified nonzero)")
    return lambda_gcd(ms)


# ---------------------------------------------------------- Newton polygon


@dataclass(frozen=True)
class NewtonPolygon:
    """Root valuations (increasing) with multiplicities; inf marks T-factors."""

    slopes: tuple[tuple[Fraction | float, int], ...]

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.slopes)


def _hull(points):
    hull: list = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def newton_polygon(F: PadicPoly) -> NewtonPolygon:
    if not F.is_monic():
        raise ValueError("Newton polygon needs a monic polynomial")
    p = F.p
    pts = [(i, vp(c, p)) for i, c in enumerate(F.coeffs) if c]
    slopes: list = []
    k0 = pts[0][0]
    hull = _hull(pts)
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.append((Fraction(y1 - y2, x2 - x1), x2 - x1))
    slopes.sort()
    if k0:
        slopes.append((math.inf, k0))
    return NewtonPolygon(tuple(slopes))


@dataclass(frozen=True)
class SlopeFactor:
    poly: PadicPoly
    slope: Fraction | float
    certified_irreducible: bool


def _certify(poly: PadicPoly, slope) -> bool:
    if poly.degree == 1:
        return True
    if slope == math.inf:
        return False
    return Fraction(slope).denominator == poly.degree


def _to_frac(coeffs):
    return [Fraction(c) for c in coeffs]


def _fmul(x, y):
    out = [Fraction(0)] * (len(x) + len(y) - 1)
    for i, u in enumerate(x):
        if u:
            for j, w in enumerate(y):
                out[i + j] += u * w
    return out


def _fsub(x, y):
    n = max(len(x), len(y))
    x = x + [Fraction(0)] * (n - len(x))
    y = y + [Fraction(0)] * (n - len(y))
    return [u - w for u, w in zip(x, y)]


def _fstrip(x):
    x = list(x)
    while x and x[-1] == 0:
        x.pop()
    return x


def _fdivmod(A, B):
    A = list(A)
    n = len(B) - 1
    lc = B[-1]
    Q = [Fraction(0)] * max(len(A) - n, 0)
    for i in range(len(A) - 1, n - 1, -1):
        c = A[i] / lc
        if c:
            Q[i - n] = c
            for j, y in enumerate(B):
                A[i - n + j] -= c * y
    return Q, _fstrip(A[:n])


def _finverse_mod(H, G):
    """H^{-1} mod G over Q (G monic, coprime to H)."""
    r0, r1 = _fstrip(G), _fstrip(_fdivmod(H, G)[1])
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while r1 and len(r1) > 1:
        q, r = _fdivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _fstrip(_fsub(s0, _fmul(q, s1)))
    if not r1:
        raise ArithmeticError("factors are not coprime")
    c = r1[0]
    return [x / c for x in _fdivmod(s1, G)[1]] if s1 else [Fraction(0)]


def _round(coeffs, p, prec):
    mod = p**prec
    out = []
    for c in coeffs:
        if _frac_val(c, p) < 0:
            raise PrecisionError("Hensel iterate left Z_p")
        out.append(Fraction(c.numerator * pow(c.denominator, -1, mod) % mod))
    return out


def _split(F: PadicPoly, m: int, prec: int):
    """F = G H with G monic of degree m carrying the roots of larger valuation.

    Iterates at the full precision of F and stops once the Newton correction
    vanishes to the output precision prec.
    """
    p = F.p
    work = F.a
    c = _to_frac(F.coeffs)
    G = _round([x / c[m] for x in c[: m + 1]], p, work)
    for _ in range(4 * work.bit_length() + 40):
        H, R = _fdivmod(c, G)
        if not R:
            break
        H = _round(H, p, work)
        delta = _fdivmod(_fmul(R, _finverse_mod(H, G)), G)[1]
        if all(_frac_val(x, p) >= prec for x in delta):
            break
        G = _round([x + (delta[i] if i < len(delta) else 0) for i, x in enumerate(G)], p, work)
        G[-1] = Fraction(1)
    else:
        raise PrecisionError("slope splitting did not converge")
    H, _ = _fdivmod(c, G)
    return _round(G, p, prec), _round(H, p, prec)


def slope_factorization(F: PadicPoly) -> list[SlopeFactor]:
    """Split F along the breaks of its Newton polygon (coprime Hensel lifting)."""
    if not F.is_monic():
        raise ValueError("slope factorization needs a monic polynomial")
    p = F.p
    NP = newton_polygon(F)
    if len(NP.slopes) <= 1:
        s = NP.slopes[0][0] if NP.slopes else 0
        return [SlopeFactor(F, s, _certify(F, s))]
    out: list[SlopeFactor] = []
    rest = F
    # T-factor: coefficients below the first nonzero one vanish within precision
    if NP.slopes[-1][0] == math.inf:
        k = NP.slopes[-1][1]
        out.append(SlopeFactor(PadicPoly(p, [0] * k + [1], F.a), math.inf, k == 1))
        rest = PadicPoly(p, F.coeffs[k:], F.a)
        slopes = NP.slopes[:-1]
    else:
        slopes = NP.slopes
    # peel off the lowest slope (roots of smallest valuation) each time
    for idx in range(len(slopes) - 1):
        s, mult = slopes[idx]
        n = rest.degree
        m = n - mult
        # resultant valuation of the split: m * (sum of root valuations of H)
        vres = m * s * mult
        prec = rest.a - math.ceil(vres)
        if prec < 1:
            raise PrecisionError("precision too low to separate the slopes")
        G, H = _split(rest, m, prec)
        Hpoly = PadicPoly(p, [int(x) for x in H], prec)
        out.append(SlopeFactor(Hpoly, s, _certify(Hpoly, s)))
        rest = PadicPoly(p, [int(x) for x in G], prec)
    s_last = slopes[-1][0]
    out.append(SlopeFactor(rest, s_last, _certify(rest, s_last)))
    prod = PadicPoly(p, [1], F.a)
    for f in out:
        prod = prod * f.poly
    if not prod.agrees(F):
        raise ArithmeticError("slope factors do not reproduce the input")
    out.sort(key=lambda f: (f.slope, f.poly.degree))
    return out


# ------------------------------------------------------------ mu, lambda


@dataclass(frozen=True)
class LambdaPrime:
    """Prime of Lambda: (p) when poly is None, otherwise (F) for distinguished F.

    Equality compares distinguished polynomials at their common precision.
    """

    p: int
    poly: PadicPoly | None = None

    def degree(self) -> int:
        return 0 if self.poly is None else self.poly.degree

    def __eq__(self, other):
        if not isinstance(other, LambdaPrime) or other.p != self.p:
            return False
        if self.poly is None or other.poly is None:
            return self.poly is None and other.poly is None
        return self.poly.degree == other.poly.degree and self.poly.agrees(other.poly)

    def __hash__(self):
        if self.poly is None:
            return hash((self.p, None))
        return hash((self.p, self.poly.degree, tuple(c % self.p for c in self.poly.coeffs)))

    def __str__(self):
        return f"({self.p})" if self.poly is None else str(self.poly)


@dataclass(frozen=True)
class LambdaInvariants:
    mu: int
    lam: int
    char: Divisor
    distinguished: PadicPoly
    uncertified: tuple[PadicPoly, ...] = ()

    @property
    def residual(self) -> bool:
        return bool(self.uncertified)

    def __iter__(self):
        return iter((self.mu, self.lam, self.char))


def mu_lambda(M: LambdaModule) -> LambdaInvariants:
    g = char_gcd(M)
    parts: list = []
    unc = []
    if g.mu:
        parts.append((LambdaPrime(M.p), g.mu))
    if g.F.degree > 0:
        for f in slope_factorization(g.F):
            parts.append((LambdaPrime(M.p, f.poly), 1))
            if not f.certified_irreducible:
                unc.append(f.poly)
    return LambdaInvariants(g.mu, g.F.degree, Divisor(parts), g.F, tuple(unc))


def lambda_is_pseudo_null(M: LambdaModule) -> bool:
    g = char_gcd(M)
    return g.mu == 0 and g.F.degree == 0


# ---------------------------------------------------------- graded bridge

GR_NAMES = ("X0", "X1")


def gr_ring(p: int) -> RingSpec:
    return RingSpec(p, GR_NAMES, (1, 1))


def principal_symbol(x: PadicSeries) -> GradedPoly:
    """Initial form of x for the (p, T)-adic filtration."""
    R = gr_ring(x.p)
    cap = min(x.a, x.b)
    m = x.ord()
    if m >= cap:
        raise PrecisionError("series is zero within the certified filtration range")
    terms = {}
    for j, c in enumerate(x.coeffs[: m + 1]):
        if c:
            v = vp(c, x.p)
            if v + j == m:
                terms[(v, j)] = (c // x.p**v) % x.p
    return GradedPoly(R, terms)


@dataclass(frozen=True)
class GradedBridge:
    module: ModulePresentation
    degree_bound: int
    shifts: tuple[int, ...]


def _orthogonal_basis(vectors, weights, s, p):
    """ord-adapted elimination on vectors over coordinates with weights.

    Coordinate c holds a value modulo p^(s - weights[c]). Returns
    [(ord, vector)] whose initial forms are independent in each degree.
    """
    ncoord = len(weights)
    mods = [p ** (s - w) for w in weights]

    def ordv(v):
        best = s
        piv = None
        for c in range(ncoord):
            x = v[c]
            if x:
                o = vp(x, p) + weights[c]
                if o < best:
                    best, piv = o, c
        return best, piv

    work = [list(v) for v in vectors]
    out = []
    while work:
        scored = [(ordv(v), i) for i, v in enumerate(work)]
        scored = [t for t in scored if t[0][0] < s]
        if not scored:
            break
        (o, c), i = min(scored, key=lambda t: (t[0][0], t[0][1], t[1]))
        x = work[i]
        vx = vp(x[c], p)
        ux = x[c] // p**vx
        inv = pow(ux, -1, mods[c])
        rest = []
        for j, y in enumerate(work):
            if j == i:
                continue
            if y[c]:
                lam = (y[c] // p**vx) * inv
                y = [(yy - lam * xx) % mods[k] for k, (yy, xx) in enumerate(zip(y, x))]
            if any(y):
                rest.append(y)
        out.append((o, x))
        work = rest
    return out


def _gr_generators(M: LambdaModule, shifts: Sequence[int], s: int):
    p = M.p
    g = M.ngens
    coords = [(l, j) for l in range(g) for j in range(s - shifts[l])]
    index = {c: i for i, c in enumerate(coords)}
    weights = [j + shifts[l] for l, j in coords]
    vecs = []
    for row in M.relations:
        for t in range(s):
            v = [0] * len(coords)
            for l, x in enumerate(row):
                for i, cval in enumerate(x.coeffs):
                    key = (l, i + t)
                    if cval and key in index:
                        k = index[key]
                        v[k] = cval % p ** (s - weights[k])
            if any(v):
                vecs.append(v)
    basis = _orthogonal_basis(vecs, weights, s, p)
    R = gr_ring(p)
    gens = []
    for o, v in basis:
        vec = {}
        for k, x in enumerate(v):
            if x and vp(x, p) + weights[k] == o:
                l, j = coords[k]
                e = vp(x, p)
                vec[(l, (e, j))] = (x // p**e) % p
        gens.append((o, vec))
    return gens, R


def associated_graded_certified(M: LambdaModule, shifts: Sequence[int] | None = None) -> GradedBridge:
    """gr M over F_p[X0, X1] with the certified degree bound.

    The relation module is truncated modulo F^s with s as large as the
    precision allows; initial forms are exact in degrees < s. The result is
    accepted when no initial form in the top window of degrees is new.
    """
    shifts = list(M.shifts if shifts is None else shifts)
    base = min(shifts) if shifts else 0
    shifts = [k - base for k in shifts]
    a, b = M.precision()
    s = min(a, b)
    window = max(3, s // 3)
    if s <= window + 1:
        raise PrecisionError("precision too low for the graded bridge")
    R = gr_ring(M.p)
    order = ModuleOrder(R, shifts)
    gens, _ = _gr_generators(M, shifts, s)
    vecs = [v for o, v in gens]
    gb = groebner(vecs, order) if vecs else []
    for n in range(s):
        expected = sum(1 for o, _ in gens if o <= n)
        if _in_module_dim(gb, order, shifts, n) != expected:
            raise ArithmeticError(f"initial-form module inconsistent in degree {n}")
    low = [v for o, v in gens if o < s - window]
    low_gb = groebner(low, order) if low else []
    if any(reduce_vector(v, low_gb, order) for o, v in gens if o >= s - window):
        raise PrecisionError(f"initial forms not stable below degree {s}; raise the precision")
    rels = minimize_generators(R, low_gb, order) if low_gb else []
    rows = tuple(tuple(_polys(R, v, M.ngens)) for v in rels)
    return GradedBridge(ModulePresentation(R, M.ngens, rows, tuple(shifts)), s - 1, tuple(shifts))


def _polys(R, v, rank):
    parts = [{} for _ in range(rank)]
    for (c, e), x in v.items():
        parts[c][e] = x
    return [GradedPoly(R, d) for d in parts]


def _in_module_dim(gb, order, shifts, n) -> int:
    """Dimension in degree n of the submodule with Gröbner basis gb."""
    count = 0
    for l, k in enumerate(shifts):
        d = n - k
        if d < 0:
            continue
        for i in range(d + 1):
            e = (i, d - i)
            if any(c == l and all(x <= y for x, y in zip(ge, e)) for c, ge in (order.lead(g) for g in gb)):
                count += 1
    return count


def associated_graded(M: LambdaModule, shifts: Sequence[int] | None = None) -> ModulePresentation:
    return associated_graded_certified(M, shifts).module


def good_filtration_W(M: LambdaModule, shifts: Sequence[int]) -> HeightOneSupport:
    return height_one_support(associated_graded(M, shifts))


def gr_is_s_torsion_free(G: ModulePresentation) -> bool:
    """No S-torsion for S the homogeneous elements outside the W-primes.

    For a torsion graded module this is the vanishing of Delta^2.
    """
    return not delta_vectors(G, 2)


def search_torsion_free_shift(M: LambdaModule, max_shift: int = 2) -> tuple[int, ...] | None:
    """A shift vector whose graded module has no S-torsion, if any is found."""
    for ks in product(range(max_shift + 1), repeat=M.ngens):
        if ks and min(ks) != 0:
            continue
        if gr_is_s_torsion_free(associated_graded(M, ks)):
            return tuple(ks)
    return None
