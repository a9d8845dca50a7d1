"""p-valuations on congruence subgroups of GL_n(Z_p), computed modulo p^N.

Values are handled as intervals: a valuation below N is certified exactly,
while an element congruent to the identity modulo p^N only has the lower
bound N. Axiom checks return pass, fail or inconclusive accordingly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polyring import RingSpec, is_prime

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


class GroupElement:
    """Matrix over Z/p^N congruent to the identity modulo p^c."""

    __slots__ = ("p", "N", "n", "c", "entries")

    def __init__(self, p: int, N: int, entries: Sequence[Sequence[int]], c: int = 1):
        if not is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        if c < 1 or (p == 2 and c < 2):
            raise ValueError("congruence level must be >= 1 (>= 2 when p = 2)")
        if N < c:
            raise ValueError("modulus exponent N must be at least the congruence level")
        mod = p**N
        rows = tuple(tuple(int(x) % mod for x in r) for r in entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        q = p**c
        for i in range(n):
            for j in range(n):
                if (rows[i][j] - (i == j)) % q:
                    raise ValueError(f"matrix is not congruent to the identity modulo {p}^{c}")
        self.p, self.N, self.n, self.c, self.entries = p, N, n, c, rows

    @classmethod
    def identity(cls, p, N, n, c=1):
        return cls(p, N, [[int(i == j) for j in range(n)] for i in range(n)], c)

    @classmethod
    def elementary(cls, p, N, n, i, j, scale, c=1):
        """I + scale * E_ij."""
        m = [[int(r == s) for s in range(n)] for r in range(n)]
        m[i][j] += scale
        return cls(p, N, m, c)

    @property
    def modulus(self) -> int:
        return self.p**self.N

    def _same(self, other):
        if (self.p, self.N, self.n) != (other.p, other.N, other.n):
            raise ValueError("elements of different groups")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self._same(other)
        mod = self.modulus
        a, b, n = self.entries, other.entries, self.n
        out = [[sum(a[i][k] * b[k][j] for k in range(n)) % mod for j in range(n)] for i in range(n)]
        return GroupElement(self.p, self.N, out, min(self.c, other.c))

    def inverse(self) -> "GroupElement":
        """Gauss-Jordan inversion over Z/p^N (pivots are units)."""
        n, mod = self.n, self.modulus
        aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(self.entries)]
        for col in range(n):
            piv = next(r for r in range(col, n) if aug[r][col] % self.p)
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = pow(aug[col][col], -1, mod)
            aug[col] = [x * inv % mod for x in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    f = aug[r][col]
                    aug[r] = [(x - f * y) % mod for x, y in zip(aug[r], aug[col])]
        return GroupElement(self.p, self.N, [r[n:] for r in aug], self.c)

    def __pow__(self, k: int) -> "GroupElement":
        if k < 0:
            return self.inverse() ** (-k)
        out = GroupElement.identity(self.p, self.N, self.n, self.c)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_identity(self) -> bool:
        return all(x == int(i == j) for i, r in enumerate(self.entries) for j, x in enumerate(r))

    def __eq__(self, other):
        return isinstance(other, GroupElement) and (self.p, self.N, self.entries) == (other.p, other.N, other.entries)

    def __hash__(self):
        return hash((self.p, self.N, self.entries))

    def __repr__(self):
        return f"GroupElement({list(map(list, self.entries))} mod {self.p}^{self.N})"


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    """g^-1 h^-1 g h."""
    return g.inverse() * h.inverse() * g * h


# ------------------------------------------------------------- valuations


@dataclass(frozen=True)
class ValuationSpec:
    """Built-in congruence valuation, or a table of values on given elements."""

    kind: str = "congruence"
    elements: tuple[GroupElement, ...] = ()
    values: tuple[Fraction, ...] = ()

    @classmethod
    def congruence(cls) -> "ValuationSpec":
        return cls()

    @classmethod
    def table(cls, elements: Sequence[GroupElement], values: Sequence[Fraction]) -> "ValuationSpec":
        if len(elements) != len(values):
            raise ValueError("one value per element is required")
        return cls("table", tuple(elements), tuple(Fraction(v) for v in values))

    @property
    def denominator(self) -> int:
        return math.lcm(*(v.denominator for v in self.values)) if self.values else 1


def _entry_valuation(x: int, p: int, N: int) -> int:
    if x == 0:
        return N
    v = 0
    while x % p == 0 and v < N:
        x //= p
        v += 1
    return v


def omega_raw(g: GroupElement) -> int:
    """min v_p over entries of g - I, capped at N."""
    return min(
        _entry_valuation((x - int(i == j)) % g.modulus, g.p, g.N)
        for i, r in enumerate(g.entries)
        for j, x in enumerate(r)
    )


def omega(g: GroupElement, spec: ValuationSpec | None = None):
    """Valuation of g; infinity when g is the identity modulo p^N."""
    spec = spec or ValuationSpec.congruence()
    if spec.kind == "table":
        if g.is_identity():
            return math.inf
        for x, v in zip(spec.elements, spec.values):
            if x == g:
                return v
        raise KeyError("element is not covered by the valuation table")
    w = omega_raw(g)
    return math.inf if w >= g.N else w


def omega_interval(g: GroupElement, spec: ValuationSpec | None = None, exact_identity: bool = False):
    """(lo, hi) bounds on the true valuation of a lift of g."""
    spec = spec or ValuationSpec.congruence()
    if spec.kind == "table":
        v = omega(g, spec)
        return (v, v)
    w = omega_raw(g)
    if w < g.N:
        return (w, w)
    return (math.inf, math.inf) if exact_identity else (g.N, math.inf)


def _geq(A, B) -> str:
    """Verdict for A >= B on intervals."""
    if A[0] >= B[1]:
        return PASS
    if A[1] < B[0]:
        return FAIL
    return INCONCLUSIVE


def _eq(A, B) -> str:
    if A[0] == A[1] == B[0] == B[1]:
        return PASS
    if A[1] < B[0] or B[1] < A[0]:
        return FAIL
    return INCONCLUSIVE


@dataclass
class AxiomReport:
    counts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)

    def record(self, axiom: int, verdict: str, witness, limit: int = 50):
        c = self.counts.setdefault(axiom, {PASS: 0, FAIL: 0, INCONCLUSIVE: 0})
        c[verdict] += 1
        if verdict == FAIL and len(self.violations) < limit:
            self.violations.append((axiom, witness))
        elif verdict == INCONCLUSIVE and len(self.inconclusive) < limit:
            self.inconclusive.append((axiom, witness))

    def total(self, verdict: str) -> int:
        return sum(c[verdict] for c in self.counts.values())

    @property
    def verdict(self) -> str:
        if self.total(FAIL):
            return FAIL
        if self.total(INCONCLUSIVE):
            return INCONCLUSIVE
        return PASS


def _to_array(sample: Sequence[GroupElement]):
    g0 = sample[0]
    mod = g0.modulus
    dtype = np.int64 if mod * mod * g0.n < 2**62 else object
    return np.array([g.entries for g in sample], dtype=dtype)


def _batch_mul(A, B, mod):
    return np.einsum("bij,bjk->bik", A, B) % mod


def _batch_omega(A, p, N):
    n = A.shape[1]
    D = (A - np.eye(n, dtype=A.dtype)) % p**N
    w = np.zeros(A.shape[0], dtype=np.int64)
    for k in range(1, N + 1):
        w += np.all(D % p**k == 0, axis=(1, 2))
    return w


def _verify_congruence(sample: Sequence[GroupElement], report: AxiomReport):
    p, N = sample[0].p, sample[0].N
    mod = p**N
    inf = math.inf
    A = _to_array(sample)
    Ainv = _to_array([g.inverse() for g in sample])
    w = _batch_omega(A, p, N)
    idn = [g.is_identity() for g in sample]

    def interval(v, exact_id=False):
        v = int(v)
        if v < N:
            return (v, v)
        return (inf, inf) if exact_id else (N, inf)

    iv = [interval(v, e) for v, e in zip(w, idn)]
    lower = Fraction(1, p - 1)
    for i, g in enumerate(sample):
        if idn[i]:
            continue
        # axiom 1: 1/(p-1) < omega(g) < infinity
        lo, hi = iv[i]
        if lo > lower and hi < inf:
            report.record(1, PASS, (i,))
        elif hi <= lower:
            report.record(1, FAIL, (i,))
        else:
            report.record(1, INCONCLUSIVE, (i,))
        # axiom 4: omega(g^p) = omega(g) + 1
        gp = g ** p
        report.record(4, _eq(omega_interval(gp), (lo + 1, hi + 1)), (i,))
    m = len(sample)
    for i in range(m - 1):
        B = A[i + 1 :]
        Binv = Ainv[i + 1 :]
        h = np.broadcast_to(A[i], B.shape)
        hinv = np.broadcast_to(Ainv[i], B.shape)
        quot = _batch_mul(B, hinv, mod)
        comm = _batch_mul(_batch_mul(_batch_mul(Binv, hinv, mod), B, mod), h, mod)
        wq = _batch_omega(quot, p, N)
        wc = _batch_omega(comm, p, N)
        for k in range(len(B)):
            j = i + 1 + k
            a, b = iv[i], iv[j]
            exact_q = idn[i] and idn[j]
            report.record(2, _geq(interval(wq[k], exact_q), (min(a[0], b[0]), min(a[1], b[1]))), (j, i))
            exact_c = idn[i] or idn[j]
            report.record(3, _geq(interval(wc[k], exact_c), (a[0] + b[0], a[1] + b[1])), (j, i))


def _verify_table(sample: Sequence[GroupElement], spec: ValuationSpec, report: AxiomReport):
    p = sample[0].p
    lower = Fraction(1, p - 1)

    def iv(g):
        try:
            v = omega(g, spec)
        except KeyError:
            return None
        return (v, v)

    for i, g in enumerate(sample):
        if g.is_identity():
            continue
        a = iv(g)
        if a is None:
            report.record(1, INCONCLUSIVE, (i,))
            continue
        report.record(1, PASS if lower < a[0] < math.inf else FAIL, (i,))
        b = iv(g**p)
        report.record(4, INCONCLUSIVE if b is None else _eq(b, (a[0] + 1, a[1] + 1)), (i,))
    for i in range(len(sample)):
        for j in range(i + 1, len(sample)):
            g, h = sample[j], sample[i]
            a, b = iv(g), iv(h)
            q, c = iv(g * h.inverse()), iv(commutator(g, h))
            if None in (a, b, q):
                report.record(2, INCONCLUSIVE, (j, i))
            else:
                report.record(2, _geq(q, (min(a[0], b[0]), min(a[1], b[1]))), (j, i))
            if None in (a, b, c):
                report.record(3, INCONCLUSIVE, (j, i))
            else:
                report.record(3, _geq(c, (a[0] + b[0], a[1] + b[1])), (j, i))


def verify_p_valuation(sample: Sequence[GroupElement], spec: ValuationSpec | None = None) -> AxiomReport:
    """Check the four p-valuation axioms on every element and unordered pair."""
    spec = spec or ValuationSpec.congruence()
    report = AxiomReport()
    if not sample:
        return report
    if spec.kind == "table":
        _verify_table(sample, spec, report)
    else:
        _verify_congruence(sample, report)
    return report


# ---------------------------------------------------------- graded Lie


Symbol = tuple  # n x n matrix over F_p as a tuple of tuples


class InconclusiveError(ArithmeticError):
    """The modulus p^N does not certify the requested value."""


def symbol(g: GroupElement, degree: int) -> Symbol | None:
    """Class of g in G_degree / G_degree+ as (g - I) / p^degree mod p; None if zero."""
    if degree >= g.N:
        raise InconclusiveError(f"degree {degree} is not below the modulus exponent {g.N}")
    w = omega_raw(g)
    if w < degree:
        raise ValueError(f"element has valuation {w} < {degree}")
    if w > degree:
        return None
    p = g.p
    return tuple(
        tuple(((x - int(i == j)) % g.modulus // p**degree) % p for j, x in enumerate(r))
        for i, r in enumerate(g.entries)
    )


@dataclass(frozen=True)
class Bracket:
    degree: int
    symbol: Symbol | None

    @property
    def is_zero(self) -> bool:
        return self.symbol is None


def _certified_value(g: GroupElement, spec: ValuationSpec | None):
    if spec is not None and spec.kind == "table":
        raise ValueError("graded symbols need the congruence valuation")
    w = omega_raw(g)
    if w >= g.N:
        raise InconclusiveError("valuation not certified at this modulus")
    return w


def gr_bracket(g: GroupElement, h: GroupElement, spec: ValuationSpec | None = None) -> Bracket:
    """Symbol of the commutator in degree omega(g) + omega(h), or zero."""
    nu = _certified_value(g, spec) + _certified_value(h, spec)
    c = commutator(g, h)
    w = omega_raw(c)
    if w < nu:
        raise ArithmeticError("commutator valuation below omega(g) + omega(h)")
    if w > nu:
        if w >= g.N and nu >= g.N:
            raise InconclusiveError("bracket degree is not below the modulus exponent")
        return Bracket(nu, None)
    return Bracket(nu, symbol(c, nu))


def neg_symbol(s: Symbol, p: int) -> Symbol:
    return tuple(tuple((-x) % p for x in r) for r in s)


def pi_symbol_check(g: GroupElement) -> bool:
    """symbol(g^p) in degree omega(g)+1 equals Pi applied to symbol(g)."""
    w = _certified_value(g, None)
    return symbol(g ** g.p, w + 1) == symbol(g, w)


def pi_bracket_check(g: GroupElement, h: GroupElement) -> bool:
    """[Pi g, h] = Pi [g, h] on symbols."""
    lhs = gr_bracket(g ** g.p, h)
    rhs = gr_bracket(g, h)
    return lhs.degree == rhs.degree + 1 and lhs.symbol == rhs.symbol


def _rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] % p), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [x * inv % p for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] % p:
                f = m[r][col]
                m[r] = [(x - f * y) % p for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def _flat(s: Symbol) -> list[int]:
    return [x for r in s for x in r]


def sample_words(generators: Sequence[GroupElement], count: int, length: int = 6, seed: int = 0) -> list[GroupElement]:
    """Pseudo-random products of generators and their inverses."""
    rng = random.Random(seed)
    gens = list(generators) + [g.inverse() for g in generators]
    out = []
    for _ in range(count):
        x = gens[rng.randrange(len(gens))]
        for _ in range(rng.randint(0, length - 1)):
            x = x * gens[rng.randrange(len(gens))]
        out.append(x)
    return out


def random_congruence_elements(p: int, N: int, n: int, count: int, seed: int = 0, c: int = 1) -> list[GroupElement]:
    """Uniform random elements of I + p^c M_n(Z/p^N)."""
    rng = random.Random(seed)
    q = p**c
    span = p ** (N - c)
    return [
        GroupElement(p, N, [[int(i == j) + q * rng.randrange(span) for j in range(n)] for i in range(n)], c)
        for _ in range(count)
    ]


@dataclass
class GradedLieReport:
    components: dict
    bracket_table: dict
    pi_table: dict
    abelian: bool
    rank: int


def graded_lie_report(
    generators: Sequence[GroupElement], sample: Sequence[GroupElement] = (), max_degree: int = 3
) -> GradedLieReport:
    """Sampled graded pieces, brackets of generator symbols and the Pi action."""
    p = generators[0].p
    elems = list(generators) + list(sample)
    comps: dict = {}
    for x in elems:
        try:
            w = _certified_value(x, None)
        except InconclusiveError:
            continue
        y, d = x, w
        while d <= max_degree and d < x.N:
            s = symbol(y, d)
            if s is not None:
                comps.setdefault(d, []).append(s)
            y, d = y**p, d + 1
    basis = {}
    for d, syms in sorted(comps.items()):
        chosen: list = []
        for s in syms:
            if _rank_mod_p([_flat(t) for t in chosen + [s]], p) > len(chosen):
                chosen.append(s)
        basis[d] = chosen
    brackets = {}
    pis = {}
    abelian = True
    for i, g in enumerate(generators):
        pis[i] = pi_symbol_check(g)
        for j, h in enumerate(generators):
            if j <= i:
                continue
            try:
                b = gr_bracket(g, h)
            except InconclusiveError:
                continue
            brackets[(i, j)] = b
            abelian = abelian and b.is_zero
    low = min(basis) if basis else None
    return GradedLieReport(basis, brackets, pis, abelian, len(basis[low]) if low is not None else 0)


@dataclass(frozen=True)
class WeightExtraction:
    weights: tuple[int, ...]
    e: int
    hilbert: tuple[tuple[int, int, int], ...]

    @property
    def nvars(self) -> int:
        return len(self.weights)

    def ring(self, p: int) -> RingSpec:
        names = tuple(f"X{i}" for i in range(len(self.weights)))
        return RingSpec(p, names, self.weights)


class SpanError(ValueError):
    pass


def weight_vector(
    generators: Sequence[GroupElement],
    spec: ValuationSpec | None = None,
    sample: Sequence[GroupElement] = (),
    max_degree: int = 3,
    seed: int = 0,
) -> WeightExtraction:
    """Integer weights (e, e*omega(g_1), ..., e*omega(g_d)) for gr of the group ring.

    The generator symbols, with Pi, must span every sampled graded piece; for
    each degree nu <= max_degree the count of monomials X0^k X_i of weight
    e*nu is compared with the rank of the sampled piece.
    """
    spec = spec or ValuationSpec.congruence()
    if not generators:
        raise ValueError("no generators")
    p = generators[0].p
    vals = [Fraction(omega(g, spec)) for g in generators]
    e = math.lcm(*(v.denominator for v in vals))
    weights = (e,) + tuple(int(v * e) for v in vals)
    if spec.kind == "table":
        return WeightExtraction(weights, e, ())
    if not sample:
        sample = sample_words(generators, 60, seed=seed)
    # symbols of generators and their Pi-translates per degree
    gen_syms: dict = {}
    for g, w in zip(generators, vals):
        y, d = g, int(w)
        while d <= max_degree:
            s = symbol(y, d)
            if s is None:
                raise SpanError("generator symbol vanishes under Pi")
            gen_syms.setdefault(d, []).append(s)
            y, d = y**p, d + 1
    ranks = _rank_mod_p
    for d, syms in gen_syms.items():
        if ranks([_flat(s) for s in syms], p) != len(syms):
            raise SpanError(f"generator symbols are dependent in degree {d}")
    rep = graded_lie_report(generators, sample, max_degree)
    hilbert = []
    for nu in range(1, max_degree + 1):
        mono = sum(1 for w in weights[1:] for k in range(nu * e + 1) if k * e + w == nu * e)
        sampled = rep.components.get(nu, [])
        spanned = gen_syms.get(nu, [])
        r_all = ranks([_flat(s) for s in spanned + sampled], p) if spanned + sampled else 0
        if r_all > len(spanned):
            raise SpanError(f"sampled symbols in degree {nu} are not spanned by the generators")
        hilbert.append((nu, mono, len(sampled) and ranks([_flat(s) for s in sampled], p)))
    return WeightExtraction(weights, e, tuple(hilbert))


def congruence_quotient_rank(n: int) -> int:
    """log_p |G_nu / G_nu+| for the full congruence subgroup of GL_n."""
    return n * n
