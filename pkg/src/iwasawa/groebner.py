"""Buchberger completion for ideals and submodules of free modules over F_p[X].

A module vector is a dict mapping ``(component, exponent tuple)`` to a nonzero
coefficient. Ideals are handled as rank-one modules. Pair selection uses the
sugar degree; the product criterion (rank one only) and the chain criterion
discard pairs.
"""

from __future__ import annotations

import heapq
from typing import Sequence

from .polyring import (
    GradedPoly,
    RingMismatchError,
    RingSpec,
    divide,
    divides_monomial,
    monomial_lcm,
    monomial_quotient,
)

Vector = dict  # (comp, exps) -> coeff


class ModuleOrder:
    """Term order on a free module: optional elimination blocks, then shifted
    weighted degree, then reverse lexicographic, then lower component first."""

    def __init__(self, ring: RingSpec, shifts: Sequence[int], blocks: Sequence[int] | None = None):
        self.ring = ring
        self.p = ring.p
        self.shifts = tuple(shifts)
        self.blocks = tuple(blocks) if blocks is not None else (0,) * len(self.shifts)
        self.rank = len(self.shifts)
        self._cache: dict = {}

    def key(self, t):
        k = self._cache.get(t)
        if k is None:
            c, e = t
            k = (self.blocks[c], self.ring.wdeg(e) + self.shifts[c], tuple(-x for x in reversed(e)), -c)
            self._cache[t] = k
        return k

    def lead(self, v: Vector):
        return max(v, key=self.key)

    def degree(self, v: Vector) -> int:
        return max(self.ring.wdeg(e) + self.shifts[c] for c, e in v)


def vec_from_polys(row: Sequence[GradedPoly]) -> Vector:
    v = {}
    for c, f in enumerate(row):
        for e, x in f.terms:
            v[(c, e)] = x
    return v


def polys_from_vec(ring: RingSpec, v: Vector, rank: int) -> list[GradedPoly]:
    parts: list[dict] = [{} for _ in range(rank)]
    for (c, e), x in v.items():
        parts[c][e] = x
    return [GradedPoly(ring, d) for d in parts]


def vec_scale(v: Vector, c: int, p: int) -> Vector:
    c %= p
    if not c:
        return {}
    return {t: x * c % p for t, x in v.items()}


def vec_add(v: Vector, w: Vector, p: int, c: int = 1) -> Vector:
    out = dict(v)
    for t, x in w.items():
        y = (out.get(t, 0) + c * x) % p
        if y:
            out[t] = y
        else:
            out.pop(t, None)
    return out


def vec_mul_poly(v: Vector, f: GradedPoly) -> Vector:
    p = f.ring.p
    out: dict = {}
    for (c, e), x in v.items():
        for m, y in f.terms:
            t = (c, tuple(a + b for a, b in zip(e, m)))
            out[t] = (out.get(t, 0) + x * y) % p
    return {t: x for t, x in out.items() if x}


def _sub_multiple(work: dict, g: Vector, qc: int, q: tuple, p: int):
    for (c, e), x in g.items():
        t = (c, tuple(a + b for a, b in zip(e, q)))
        y = (work.get(t, 0) - qc * x) % p
        if y:
            work[t] = y
        else:
            work.pop(t, None)


def reduce_vector(v: Vector, basis: Sequence[Vector], order: ModuleOrder, full: bool = True) -> Vector:
    """Normal form of v modulo basis (each basis element must be monic)."""
    p = order.p
    leads = [order.lead(g) for g in basis]
    key = order.key
    work = dict(v)
    rem: dict = {}
    while work:
        t = max(work, key=key)
        c, e = t
        x = work[t]
        for g, (gc, ge) in zip(basis, leads):
            if gc == c and divides_monomial(ge, e):
                _sub_multiple(work, g, x, monomial_quotient(e, ge), p)
                break
        else:
            if not full:
                rem.update(work)
                return rem
            rem[t] = x
            del work[t]
    return rem


def _monic(v: Vector, order: ModuleOrder) -> Vector:
    t = order.lead(v)
    return vec_scale(v, pow(v[t], -1, order.p), order.p)


def groebner(gens: Sequence[Vector], order: ModuleOrder) -> list[Vector]:
    """Reduced Gröbner basis of the submodule generated by gens."""
    p = order.p
    ring = order.ring
    G: list[Vector] = []
    leads: list = []
    sugar: list[int] = []
    alive: list[bool] = []
    pending: set = set()
    heap: list = []
    product_ok = order.rank == 1

    def add(v: Vector, s: int):
        v = _monic(v, order)
        n = len(G)
        lt = order.lead(v)
        G.append(v)
        leads.append(lt)
        sugar.append(s)
        alive.append(True)
        for i in range(n):
            li = leads[i]
            if li[0] != lt[0]:
                continue
            if product_ok and all(a == 0 or b == 0 for a, b in zip(li[1], lt[1])):
                continue
            lcm = monomial_lcm(li[1], lt[1])
            ps = max(
                sugar[i] + ring.wdeg(lcm) - ring.wdeg(li[1]),
                s + ring.wdeg(lcm) - ring.wdeg(lt[1]),
            )
            pending.add((i, n))
            heapq.heappush(heap, (ps, order.key((lt[0], lcm)), i, n))

    for v in gens:
        v = {t: x % p for t, x in v.items() if x % p}
        if not v:
            continue
        s = order.degree(v)
        r = reduce_vector(v, G, order)
        if r:
            add(r, s)

    while heap:
        ps, _, i, j = heapq.heappop(heap)
        pending.discard((i, j))
        li, lj = leads[i], leads[j]
        lcm = monomial_lcm(li[1], lj[1])
        comp = li[0]
        skip = False
        for k in range(len(G)):
            if k == i or k == j:
                continue
            lk = leads[k]
            if lk[0] == comp and divides_monomial(lk[1], lcm):
                if (min(i, k), max(i, k)) not in pending and (min(j, k), max(j, k)) not in pending:
                    skip = True
                    break
        if skip:
            continue
        qi = monomial_quotient(lcm, li[1])
        qj = monomial_quotient(lcm, lj[1])
        s = {}
        _sub_multiple(s, G[i], -1, qi, p)
        _sub_multiple(s, G[j], 1, qj, p)
        r = reduce_vector(s, G, order)
        if r:
            add(r, ps)

    # minimize
    keep = []
    for i, li in enumerate(leads):
        red = False
        for j, lj in enumerate(leads):
            if j == i or lj[0] != li[0] or not divides_monomial(lj[1], li[1]):
                continue
            if lj[1] != li[1] or j < i:
                red = True
                break
        if not red:
            keep.append(G[i])
    out = []
    for i, g in enumerate(keep):
        others = keep[:i] + keep[i + 1 :]
        lt = order.lead(g)
        tail = {t: x for t, x in g.items() if t != lt}
        r = reduce_vector(tail, others, order)
        r[lt] = 1
        out.append(r)
    out.sort(key=lambda g: order.key(order.lead(g)))
    return out


def spoly(f: Vector, g: Vector, order: ModuleOrder) -> Vector | None:
    lf, lg = order.lead(f), order.lead(g)
    if lf[0] != lg[0]:
        return None
    p = order.p
    lcm = monomial_lcm(lf[1], lg[1])
    s: dict = {}
    _sub_multiple(s, f, -pow(f[lf], -1, p), monomial_quotient(lcm, lf[1]), p)
    _sub_multiple(s, g, pow(g[lg], -1, p), monomial_quotient(lcm, lg[1]), p)
    return s


def satisfies_buchberger(basis: Sequence[Vector], order: ModuleOrder) -> bool:
    """Check that every S-vector of basis reduces to zero."""
    monic = [_monic(g, order) for g in basis if g]
    for i in range(len(monic)):
        for j in range(i + 1, len(monic)):
            s = spoly(monic[i], monic[j], order)
            if s is not None and reduce_vector(s, monic, order):
                return False
    return True


# ---------------------------------------------------------------- ideals


def _check_ring(polys: Sequence[GradedPoly]) -> RingSpec:
    if not polys:
        raise ValueError("empty polynomial list")
    ring = polys[0].ring
    for f in polys:
        if f.ring != ring:
            raise RingMismatchError("polynomials live in different rings")
    return ring


def ideal_order(ring: RingSpec) -> ModuleOrder:
    return ModuleOrder(ring, (0,))


def groebner_basis(gens: Sequence[GradedPoly]) -> list[GradedPoly]:
    ring = _check_ring(gens)
    order = ideal_order(ring)
    gb = groebner([vec_from_polys([f]) for f in gens], order)
    return [polys_from_vec(ring, g, 1)[0] for g in gb]


def normal_form(f: GradedPoly, basis: Sequence[GradedPoly]) -> GradedPoly:
    """Remainder of multivariate division of f by basis."""
    for g in basis:
        if g.ring != f.ring:
            raise RingMismatchError("polynomials live in different rings")
    nz = [g for g in basis if not g.is_zero()]
    if len(nz) != len(basis):
        raise ValueError("basis elements must be nonzero")
    if not nz:
        return f
    return divide(f, nz)[1]


def ideal_contains(gb: Sequence[GradedPoly], f: GradedPoly) -> bool:
    return normal_form(f, gb).is_zero() if gb else f.is_zero()


def is_groebner(basis: Sequence[GradedPoly]) -> bool:
    if not basis:
        return True
    order = ideal_order(basis[0].ring)
    return satisfies_buchberger([vec_from_polys([g]) for g in basis], order)


def ideals_equal(a: Sequence[GradedPoly], b: Sequence[GradedPoly]) -> bool:
    ga = groebner_basis(a) if a else []
    gb = groebner_basis(b) if b else []
    return all(ideal_contains(gb, f) for f in a) and all(ideal_contains(ga, f) for f in b)


# ------------------------------------------------------------- syzygies


def syzygy_vectors(
    ring: RingSpec, vectors: Sequence[Vector], shifts: Sequence[int]
) -> tuple[list[Vector], list[int]]:
    """Generators of {c : sum c_i v_i = 0} for v_i in A^r with the given shifts.

    Returned vectors live in A^k (k = len(vectors)); their degree shifts are
    the degrees of the v_i. Computed by elimination on (v_i | e_i).
    """
    r = len(shifts)
    k = len(vectors)
    gen_shifts = []
    for v in vectors:
        gen_shifts.append(ModuleOrder(ring, shifts).degree(v) if v else 0)
    order = ModuleOrder(ring, tuple(shifts) + tuple(gen_shifts), (1,) * r + (0,) * k)
    stacked = []
    for i, v in enumerate(vectors):
        w = dict(v)
        w[(r + i, (0,) * ring.nvars)] = 1
        stacked.append(w)
    gb = groebner(stacked, order)
    syz = []
    for g in gb:
        if all(c >= r for c, _ in g):
            syz.append({(c - r, e): x for (c, e), x in g.items()})
    return syz, gen_shifts
