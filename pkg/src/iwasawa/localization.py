"""Local invariants at height-one primes, characteristic divisors, and the
cyclic-decomposition certificate for torsion modules over F_p[X_0, ..., X_d].

Lengths and elementary divisors at a prime P come from the P-adic valuations
of Fitting ideals: after localizing at (P) the ring is a discrete valuation
ring, where the Smith form is determined by gcds of minors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Hashable, Iterable, Mapping, Sequence

from .factor import factor_poly, is_irreducible, poly_gcd_list
from .groebner import Vector, ideals_equal, syzygy_vectors
from .graded_structure import (
    NotTorsionError,
    delta_vectors,
    height_one_support,
    quotient_by_delta2,
)
from .modules import (
    ModulePresentation,
    annihilator,
    ext_grade,
    ideal_quotient_vector,
    prune_presentation,
    quotient_presentation,
)
from .polyring import GradedPoly, exact_quotient


class Divisor:
    """Element of the free abelian group on primes (any hashable key)."""

    __slots__ = ("_mult",)

    def __init__(self, mult: Mapping[Hashable, int] | Iterable[tuple[Hashable, int]] = ()):
        items = mult.items() if isinstance(mult, Mapping) else mult
        acc: dict = {}
        for P, n in items:
            acc[P] = acc.get(P, 0) + int(n)
        self._mult = {P: n for P, n in acc.items() if n}

    def multiplicity(self, P) -> int:
        return self._mult.get(P, 0)

    @property
    def primes(self) -> frozenset:
        return frozenset(self._mult)

    def items(self):
        return sorted(self._mult.items(), key=lambda t: _prime_sort_key(t[0]))

    def is_empty(self) -> bool:
        return not self._mult

    def is_effective(self) -> bool:
        return all(n > 0 for n in self._mult.values())

    def __mul__(self, other: "Divisor") -> "Divisor":
        return Divisor(list(self._mult.items()) + list(other._mult.items()))

    def inverse(self) -> "Divisor":
        return Divisor({P: -n for P, n in self._mult.items()})

    def __truediv__(self, other: "Divisor") -> "Divisor":
        return self * other.inverse()

    def __eq__(self, other):
        return isinstance(other, Divisor) and self._mult == other._mult

    def __hash__(self):
        return hash(frozenset(self._mult.items()))

    def __repr__(self):
        return f"Divisor({self})"

    def __str__(self):
        if not self._mult:
            return "1"
        parts = []
        for P, n in self.items():
            s = str(P)
            if any(ch in s for ch in "+- "):
                s = f"({s})"
            parts.append(s if n == 1 else f"{s}^{n}")
        return "*".join(parts)


def _prime_sort_key(P):
    deg = getattr(P, "degree", None)
    d = deg() if callable(deg) else 0
    return (d, str(P))


def divisor_combine(a: Divisor, b: Divisor, inverted: bool = False) -> Divisor:
    """a * b, or a * b^-1 when inverted."""
    return a / b if inverted else a * b


# -------------------------------------------------------------- minors


def _det(matrix, rows: tuple, cols: tuple, memo: dict) -> GradedPoly:
    key = (rows, cols)
    if key in memo:
        return memo[key]
    if len(rows) == 1:
        d = matrix[rows[0]][cols[0]]
    else:
        r0 = rows[0]
        rest = rows[1:]
        d = matrix[r0][cols[0]].ring.zero()
        for j, c in enumerate(cols):
            a = matrix[r0][c]
            if a.is_zero():
                continue
            sub = _det(matrix, rest, cols[:j] + cols[j + 1 :], memo)
            term = a * sub
            d = d - term if j % 2 else d + term
    memo[key] = d
    return d


def minors(matrix: Sequence[Sequence[GradedPoly]], size: int) -> list[GradedPoly]:
    """All nonzero size x size minors."""
    if size == 0:
        return []
    nrows = len(matrix)
    ncols = len(matrix[0]) if nrows else 0
    memo: dict = {}
    out = []
    for rows in combinations(range(nrows), size):
        for cols in combinations(range(ncols), size):
            d = _det(matrix, rows, cols, memo)
            if not d.is_zero():
                out.append(d)
    return out


def poly_valuation(f: GradedPoly, P: GradedPoly) -> int:
    """Largest e with P^e dividing f (f nonzero)."""
    if f.is_zero():
        raise ValueError("valuation of zero is infinite")
    e = 0
    while True:
        q = exact_quotient(f, P)
        if q is None:
            return e
        f, e = q, e + 1


@lru_cache(maxsize=512)
def _checked_prime(P: GradedPoly) -> bool:
    return is_irreducible(P)


def _require_prime(P: GradedPoly):
    if not _checked_prime(P):
        raise ValueError(f"{P} is not irreducible")


def _reduced(M: ModulePresentation) -> ModulePresentation:
    return prune_presentation(M)


def _fitting_valuation_raw(M: ModulePresentation, P: GradedPoly, k: int) -> int:
    g = M.ngens
    if k >= g:
        return 0
    ms = minors(M.matrix(), g - k)
    if not ms:
        raise NotTorsionError("module is not torsion: all relevant minors vanish")
    best = None
    for f in ms:
        v = poly_valuation(f, P)
        if best is None or v < best:
            best = v
            if v == 0:
                break
    return best


def fitting_valuation(M: ModulePresentation, P: GradedPoly, k: int) -> int:
    """Minimum P-adic valuation of the (g-k)-minors of the relation matrix."""
    if k < 0 or k >= M.ngens:
        raise ValueError(f"index k={k} out of range for {M.ngens} generators")
    _require_prime(P)
    N = _reduced(M)
    # pruning drops g - g' unit-pivot generators; Fitting ideals are unchanged
    return _fitting_valuation_raw(N, P, k)


def fitting_valuations(M: ModulePresentation, P: GradedPoly, upto: int | None = None) -> tuple[int, ...]:
    """(v_0, ..., v_{upto-1}), with v_k = 0 once k reaches the generator count."""
    _require_prime(P)
    N = _reduced(M)
    n = M.ngens if upto is None else upto
    return tuple(_fitting_valuation_raw(N, P, k) for k in range(n))


def local_length(M: ModulePresentation, P: GradedPoly) -> int:
    if M.ngens == 0:
        return 0
    return fitting_valuation(M, P, 0)


def elementary_divisors(M: ModulePresentation, P: GradedPoly) -> tuple[int, ...]:
    """Positive exponents e_1 <= ... <= e_k of the localized module at (P)."""
    _require_prime(P)
    N = _reduced(M)
    g = N.ngens
    vals = [_fitting_valuation_raw(N, P, k) for k in range(g)] + [0]
    exps = [vals[k] - vals[k + 1] for k in range(g - 1, -1, -1)]
    return tuple(e for e in exps if e > 0)


@dataclass(frozen=True)
class ElementaryDivisorProfile:
    exponents: tuple[tuple[GradedPoly, tuple[int, ...]], ...]

    def at(self, P) -> tuple[int, ...]:
        for Q, e in self.exponents:
            if Q == P:
                return e
        return ()


def elementary_divisor_profile(M: ModulePresentation) -> ElementaryDivisorProfile:
    W = height_one_support(M)
    return ElementaryDivisorProfile(tuple((P, elementary_divisors(M, P)) for P in W))


def max_minor_gcd(M: ModulePresentation) -> GradedPoly:
    N = _reduced(M)
    if N.ngens == 0:
        return M.ring.one()
    ms = minors(N.matrix(), N.ngens)
    if not ms:
        raise NotTorsionError("module is not torsion: all maximal minors vanish")
    return poly_gcd_list(ms)


def char_ideal(M: ModulePresentation) -> Divisor:
    """chi(M) = prod P^{l_P(M)} over the height-one support.

    Computed from local lengths and cross-checked against the factored gcd of
    the maximal minors.
    """
    W = height_one_support(M)
    if W.residual is not None:
        raise ArithmeticError("height-one support has an unfactored part")
    chi = Divisor({P: local_length(M, P) for P in W})
    g = max_minor_gcd(M)
    fac = factor_poly(g)
    hull = Divisor({f: m for f, m in fac.factors})
    if fac.residual is None and hull != chi:
        raise ArithmeticError(f"route disagreement for chi: lengths give {chi}, minors give {hull}")
    return chi


def ideal_hull(ideal: Sequence[GradedPoly]) -> Divisor:
    """Divisorial hull of a nonzero ideal: the factored gcd of its generators."""
    g = poly_gcd_list(ideal)
    if g.is_constant():
        return Divisor()
    fac = factor_poly(g)
    if fac.residual is not None:
        raise ArithmeticError("unfactored part in the divisorial hull")
    return Divisor({f: m for f, m in fac.factors})


@dataclass(frozen=True)
class AnnihilatorDivisorReport:
    chi: Divisor
    ann_hull: Divisor
    containment: bool
    same_support: bool

    @property
    def verdict(self) -> bool:
        return self.containment and self.same_support


def annihilator_divisor_check(M: ModulePresentation) -> AnnihilatorDivisorReport:
    """chi(M/Delta^2) against the divisorial hull of its annihilator."""
    if not annihilator(M):
        raise NotTorsionError("module is not bounded: annihilator is zero")
    Q = quotient_by_delta2(M)
    if Q.is_zero():
        return AnnihilatorDivisorReport(Divisor(), Divisor(), True, True)
    chi = char_ideal(Q)
    hull = ideal_hull(annihilator(Q))
    containment = all(chi.multiplicity(P) >= n for P, n in hull.items())
    return AnnihilatorDivisorReport(chi, hull, containment, chi.primes == hull.primes)


# ---------------------------------------------------------- certificate


@dataclass(frozen=True)
class StructureCertificate:
    ideals: tuple[tuple[tuple[GradedPoly, int], ...], ...]
    generators: tuple[GradedPoly, ...]
    chi: Divisor
    fitting_check: tuple[tuple[GradedPoly, int, int, int], ...]
    verified: bool
    delta2_generators: tuple[Vector, ...]
    witnesses: tuple[Vector, ...] | None = None
    witness_status: str = "not requested"
    witness_cokernel_grade: float | None = None

    @property
    def m(self) -> int:
        return len(self.ideals)


def _assemble_ideals(profile: Sequence[tuple[GradedPoly, tuple[int, ...]]]):
    m = max((len(e) for _, e in profile), default=0)
    rows: list[list[tuple[GradedPoly, int]]] = [[] for _ in range(m)]
    for P, exps in profile:
        desc = sorted(exps, reverse=True)
        for i, e in enumerate(desc):
            rows[i].append((P, e))
    # rank 0 carries the largest exponents; list in divisibility order
    rows.reverse()
    return [tuple(r) for r in rows]


def _ideal_poly(ring, factors) -> GradedPoly:
    out = ring.one()
    for P, e in factors:
        out = out * P**e
    return out


def _injective_on_quotients(Mbar: ModulePresentation, ws: Sequence[Vector], gens: Sequence[GradedPoly]) -> bool:
    ring = Mbar.ring
    m = len(ws)
    syz, _ = syzygy_vectors(ring, list(ws) + Mbar.relation_vectors, Mbar.shifts)
    for s in syz:
        for i in range(m):
            part = {e: x for (c, e), x in s.items() if c == i}
            if part and exact_quotient(GradedPoly(ring, part), gens[i]) is None:
                return False
    return True


def _search_witnesses(Mbar, gens, rng, budget):
    ring = Mbar.ring
    p = ring.p
    g = Mbar.ngens
    zero = (0,) * ring.nvars
    for _ in range(budget):
        ws = []
        ok = True
        for L in gens:
            c = [rng.randrange(p) for _ in range(g)]
            w = {(j, zero): x for j, x in enumerate(c) if x}
            if not w or not ideals_equal(ideal_quotient_vector(Mbar, w), [L]):
                ok = False
                break
            ws.append(w)
        if not ok or not _injective_on_quotients(Mbar, ws, gens):
            continue
        coker = quotient_presentation(Mbar, ws, prune=False)
        j = ext_grade(coker)
        if j >= 2:
            return tuple(ws), j
    return None, None


def structure_certificate(
    M: ModulePresentation, witness_search: bool = False, seed: int = 0, budget: int = 200
) -> StructureCertificate:
    """Cyclic factors A/L_i of M modulo its largest pseudo-null submodule."""
    ring = M.ring
    W = height_one_support(M)
    if W.residual is not None:
        raise ArithmeticError("height-one support has an unfactored part")
    d2 = delta_vectors(M, 2)
    Mbar = quotient_presentation(M, d2, prune=False)
    profile = [(P, elementary_divisors(Mbar, P)) for P in W]
    ideals = _assemble_ideals(profile)
    gens = [_ideal_poly(ring, f) for f in ideals]
    chi = Divisor({P: sum(e) for P, e in profile})
    recon = ModulePresentation.zero(ring)
    for L in gens:
        recon = recon.direct_sum(ModulePresentation.cyclic(ring, [L]))
    n = max(M.ngens, recon.ngens)
    checks = []
    ok = True
    for P in W:
        a = fitting_valuations(M, P, n)
        b = fitting_valuations(recon, P, n)
        for k in range(n):
            checks.append((P, k, a[k], b[k]))
            ok = ok and a[k] == b[k]
    recon_chi = Divisor({P: local_length(recon, P) for P in W}) if recon.ngens else Divisor()
    ok = ok and recon_chi == chi and chi == char_ideal(M)
    witnesses = None
    status = "not requested"
    cgrade = None
    if witness_search:
        if not gens:
            witnesses, status, cgrade = (), "found", ext_grade(Mbar)
        else:
            witnesses, cgrade = _search_witnesses(Mbar, gens, random.Random(seed), budget)
            status = "found" if witnesses is not None else f"none in {budget} samples"
    return StructureCertificate(
        tuple(ideals), tuple(gens), chi, tuple(checks), ok, tuple(d2), witnesses, status, cgrade
    )
