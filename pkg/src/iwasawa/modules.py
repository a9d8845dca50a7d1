"""Finitely presented modules over F_p[X_0, ..., X_d].

A module is the cokernel of a relation matrix: rows are relations, columns
are generators. Submodules of a presented module are described by generator
vectors in the ambient free module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .groebner import (
    ModuleOrder,
    _monic,
    Vector,
    groebner,
    groebner_basis,
    polys_from_vec,
    reduce_vector,
    syzygy_vectors,
    vec_from_polys,
)
from .polyring import GradedPoly, RingMismatchError, RingSpec

INFINITY = math.inf


@dataclass(frozen=True)
class ModulePresentation:
    ring: RingSpec
    ngens: int
    relations: tuple[tuple[GradedPoly, ...], ...]
    shifts: tuple[int, ...] = ()

    def __post_init__(self):
        rels = tuple(tuple(r) for r in self.relations)
        object.__setattr__(self, "relations", rels)
        if not self.shifts:
            object.__setattr__(self, "shifts", (0,) * self.ngens)
        if len(self.shifts) != self.ngens:
            raise ValueError("shift vector length must equal the generator count")
        for r in rels:
            if len(r) != self.ngens:
                raise ValueError("relation row length must equal the generator count")
            for f in r:
                if f.ring != self.ring:
                    raise RingMismatchError("relation entries live in a different ring")

    @classmethod
    def from_rows(cls, ring, rows, shifts=None, ngens=None):
        rows = [tuple(ring.parse(x) if isinstance(x, str) else x for x in r) for r in rows]
        if ngens is None:
            ngens = len(rows[0]) if rows else 0
        return cls(ring, ngens, tuple(rows), tuple(shifts) if shifts else ())

    @classmethod
    def cyclic(cls, ring, gens: Sequence[GradedPoly], shift=0):
        """A/(gens)."""
        return cls(ring, 1, tuple((g,) for g in gens if not g.is_zero()), (shift,))

    @classmethod
    def free(cls, ring, rank=1):
        return cls(ring, rank, (), (0,) * rank)

    @classmethod
    def zero(cls, ring):
        return cls(ring, 0, (), ())

    def direct_sum(self, other: "ModulePresentation") -> "ModulePresentation":
        if other.ring != self.ring:
            raise RingMismatchError("modules over different rings")
        z = self.ring.zero()
        rows = [r + (z,) * other.ngens for r in self.relations]
        rows += [(z,) * self.ngens + r for r in other.relations]
        return ModulePresentation(self.ring, self.ngens + other.ngens, tuple(rows), self.shifts + other.shifts)

    @cached_property
    def order(self) -> ModuleOrder:
        return ModuleOrder(self.ring, self.shifts)

    @cached_property
    def relation_vectors(self) -> list[Vector]:
        return [v for v in (vec_from_polys(r) for r in self.relations) if v]

    @cached_property
    def relation_gb(self) -> list[Vector]:
        return groebner(self.relation_vectors, self.order)

    def unit_vector(self, i: int) -> Vector:
        return {(i, (0,) * self.ring.nvars): 1}

    def reduce(self, v: Vector) -> Vector:
        return reduce_vector(v, self.relation_gb, self.order)

    def is_zero_element(self, v: Vector) -> bool:
        return not self.reduce(v)

    def is_zero(self) -> bool:
        return all(self.is_zero_element(self.unit_vector(i)) for i in range(self.ngens))

    def is_homogeneous(self) -> bool:
        for r in self.relations:
            degs = set()
            for c, f in enumerate(r):
                for e, _ in f.terms:
                    degs.add(self.ring.wdeg(e) + self.shifts[c])
            if len(degs) > 1:
                return False
        return True

    def matrix(self) -> list[list[GradedPoly]]:
        return [list(r) for r in self.relations]

    def __str__(self):
        rows = "; ".join("(" + ", ".join(str(f) for f in r) + ")" for r in self.relations)
        return f"coker[{self.ngens} gens, shifts {list(self.shifts)}: {rows}] over {self.ring}"


# ------------------------------------------------------------ helpers


def _rows_from_vectors(ring, vectors, rank):
    return tuple(tuple(polys_from_vec(ring, v, rank)) for v in vectors)


def submodule_contains(gb: Sequence[Vector], order: ModuleOrder, v: Vector) -> bool:
    return not reduce_vector(v, gb, order)


def minimize_generators(ring, vectors: Sequence[Vector], order: ModuleOrder) -> list[Vector]:
    """Drop generators lying in the span of the others (greedy, by degree)."""
    vecs = [v for v in vectors if v]
    vecs.sort(key=lambda v: (order.degree(v), order.key(order.lead(v))))
    kept: list[Vector] = []
    gb: list[Vector] = []
    for v in vecs:
        if gb and submodule_contains(gb, order, v):
            continue
        kept.append(v)
        gb = groebner(kept, order)
    # second pass: a later generator may make an earlier one redundant
    i = 0
    while i < len(kept):
        others = kept[:i] + kept[i + 1 :]
        if others and submodule_contains(groebner(others, order), order, kept[i]):
            kept = others
        else:
            i += 1
    return kept


def prune_presentation(M: ModulePresentation) -> ModulePresentation:
    """Eliminate generators killed by a relation with a unit coefficient."""
    ring = M.ring
    p = ring.p
    zero_e = (0,) * ring.nvars
    rows = [dict(v) for v in M.relation_vectors]
    gens = list(range(M.ngens))
    shifts = list(M.shifts)
    changed = True
    while changed:
        changed = False
        for ri, row in enumerate(rows):
            pivot = None
            by_comp: dict = {}
            for (c, e), x in row.items():
                by_comp.setdefault(c, []).append((e, x))
            for c in sorted(by_comp):
                terms = by_comp[c]
                if len(terms) == 1 and terms[0][0] == zero_e:
                    pivot = (c, terms[0][1])
                    break
            if pivot is None:
                continue
            c, x = pivot
            inv = pow(x, -1, p)
            # generator c = -inv * (row - x e_c): substitute in other rows
            sub = {t: (-inv * y) % p for t, y in row.items() if t[0] != c}
            new_rows = []
            for rj, other in enumerate(rows):
                if rj == ri:
                    continue
                coeff = {}
                rest = {}
                for (cc, e), y in other.items():
                    if cc == c:
                        coeff[e] = y
                    else:
                        rest[(cc, e)] = y
                if coeff:
                    f = GradedPoly(ring, coeff)
                    for (cc, e2), y2 in sub.items():
                        for e1, y1 in f.terms:
                            t = (cc, tuple(a + b for a, b in zip(e1, e2)))
                            v = (rest.get(t, 0) + y1 * y2) % p
                            if v:
                                rest[t] = v
                            else:
                                rest.pop(t, None)
                if rest:
                    new_rows.append(rest)
            # drop column c and renumber
            rows = [{((cc if cc < c else cc - 1), e): y for (cc, e), y in r.items()} for r in new_rows]
            del gens[c]
            del shifts[c]
            changed = True
            break
    return ModulePresentation(ring, len(gens), _rows_from_vectors(ring, rows, len(gens)), tuple(shifts))


def submodule_presentation(M: ModulePresentation, gens: Sequence[Vector], prune=True) -> ModulePresentation:
    """Presentation of the submodule of M generated by the given vectors."""
    gens = [g for g in gens if g and not M.is_zero_element(g)]
    if not gens:
        return ModulePresentation.zero(M.ring)
    allv = list(gens) + M.relation_vectors
    syz, degs = syzygy_vectors(M.ring, allv, M.shifts)
    k = len(gens)
    rels = []
    for s in syz:
        part = {(c, e): x for (c, e), x in s.items() if c < k}
        if part:
            rels.append(part)
    shifts = tuple(degs[:k])
    order = ModuleOrder(M.ring, shifts)
    rels = [_monic(v, order) for v in minimize_generators(M.ring, rels, order)] if rels else []
    N = ModulePresentation(M.ring, k, _rows_from_vectors(M.ring, rels, k), shifts)
    return prune_presentation(N) if prune else N


def quotient_presentation(M: ModulePresentation, gens: Sequence[Vector], prune=True) -> ModulePresentation:
    """Presentation of M / <gens>."""
    vecs = M.relation_vectors + [g for g in gens if g]
    order = M.order
    vecs = [_monic(v, order) for v in minimize_generators(M.ring, vecs, order)] if vecs else []
    Q = ModulePresentation(M.ring, M.ngens, _rows_from_vectors(M.ring, vecs, M.ngens), M.shifts)
    return prune_presentation(Q) if prune else Q


def submodule_gb(M: ModulePresentation, gens: Sequence[Vector]) -> list[Vector]:
    return groebner(M.relation_vectors + [g for g in gens if g], M.order)


def submodules_equal(M: ModulePresentation, a: Sequence[Vector], b: Sequence[Vector]) -> bool:
    ga = submodule_gb(M, a)
    gb = submodule_gb(M, b)
    return all(submodule_contains(gb, M.order, v) for v in a if v) and all(
        submodule_contains(ga, M.order, v) for v in b if v
    )


def submodule_is_zero(M: ModulePresentation, gens: Sequence[Vector]) -> bool:
    return all(M.is_zero_element(g) for g in gens)


# ------------------------------------------------------------ syzygies


def syzygy_module(gens: Sequence[GradedPoly]) -> ModulePresentation:
    """First syzygy module of a list of polynomials, as relations on a free module."""
    if not gens:
        raise ValueError("syzygy module of an empty generator list")
    ring = gens[0].ring
    for g in gens:
        if g.ring != ring:
            raise RingMismatchError("polynomials live in different rings")
    vecs = [vec_from_polys([g]) for g in gens]
    syz, degs = syzygy_vectors(ring, vecs, (0,))
    order = ModuleOrder(ring, degs)
    syz = minimize_generators(ring, syz, order) if syz else []
    return ModulePresentation(ring, len(gens), _rows_from_vectors(ring, syz, len(gens)), tuple(degs))


@dataclass(frozen=True)
class FreeResolution:
    """Differentials d_1, d_2, ... as relation matrices (row convention).

    maps[0] is the presentation matrix (rank F_1 x rank F_0); maps[i] has
    shape rank F_{i+1} x rank F_i, and maps[i] * maps[i-1] = 0.
    """

    ring: RingSpec
    ranks: tuple[int, ...]
    maps: tuple[tuple[tuple[GradedPoly, ...], ...], ...]
    shifts: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def length(self) -> int:
        return len(self.ranks) - 1

    @property
    def betti(self) -> tuple[int, ...]:
        return self.ranks


def _matmul(ring, a, b):
    # a: r x s, b: s x t
    if not a or not b:
        return []
    t = len(b[0])
    out = []
    for row in a:
        out.append([sum((row[k] * b[k][j] for k in range(len(row))), ring.zero()) for j in range(t)])
    return out


def compose_is_zero(ring, a, b) -> bool:
    return all(f.is_zero() for row in _matmul(ring, a, b) for f in row)


def free_resolution(M: ModulePresentation, max_length: int | None = None) -> FreeResolution:
    ring = M.ring
    M = prune_presentation(M)
    if max_length is None:
        max_length = ring.nvars + 1
    rels = M.relation_vectors
    if rels:
        rels = minimize_generators(ring, rels, M.order)
    ranks = [M.ngens]
    maps = []
    shifts = [M.shifts]
    cur_shifts = M.shifts
    while rels and len(maps) < max_length:
        rank = ranks[-1]
        maps.append(_rows_from_vectors(ring, rels, rank))
        ranks.append(len(rels))
        syz, degs = syzygy_vectors(ring, rels, cur_shifts)
        cur_shifts = tuple(degs)
        shifts.append(cur_shifts)
        rels = minimize_generators(ring, syz, ModuleOrder(ring, cur_shifts)) if syz else []
    if M.ngens == 0:
        ranks = [0]
    return FreeResolution(ring, tuple(ranks), tuple(maps), tuple(shifts))


# ----------------------------------------------------------------- Ext


def _transpose_columns(ring, matrix, ncols):
    """Columns of a row-convention matrix, each as a vector."""
    cols = []
    for j in range(ncols):
        v = {}
        for i, row in enumerate(matrix):
            for e, x in row[j].terms:
                v[(i, e)] = x
        cols.append(v)
    return cols


def ext_modules_nonzero(M: ModulePresentation, upto: int | None = None) -> list[bool]:
    """[Ext^i(M, A) != 0 for i = 0..upto] via the dual of a free resolution."""
    ring = M.ring
    n = ring.nvars
    if upto is None:
        upto = n
    res = free_resolution(M, max_length=upto + 1)
    ranks = list(res.ranks)
    maps = list(res.maps)
    out = []
    zero_shift = lambda k: (0,) * k
    for i in range(upto + 1):
        if i >= len(ranks) or ranks[i] == 0:
            out.append(False)
            continue
        r_i = ranks[i]
        # kernel of maps[i] acting on columns: x in A^{r_i} with maps[i] x = 0
        if i < len(maps):
            cols = _transpose_columns(ring, maps[i], r_i)
            ker, _ = syzygy_vectors(ring, cols, zero_shift(ranks[i + 1]))
            ker = [k for k in ker if k]
        else:
            ker = [{(j, (0,) * n): 1} for j in range(r_i)]
        if not ker:
            out.append(False)
            continue
        if i == 0:
            out.append(True)
            continue
        image = _transpose_columns(ring, maps[i - 1], ranks[i - 1])
        order = ModuleOrder(ring, zero_shift(r_i))
        gb = groebner([v for v in image if v], order)
        out.append(any(reduce_vector(k, gb, order) for k in ker))
    return out


def ext_grade(M: ModulePresentation):
    """Smallest i with Ext^i(M, A) != 0; infinity for the zero module."""
    if M.ngens == 0 or M.is_zero():
        return INFINITY
    flags = ext_modules_nonzero(M)
    for i, nz in enumerate(flags):
        if nz:
            return i
    return INFINITY


def ext_module(M: ModulePresentation, i: int) -> ModulePresentation:
    """A presentation of Ext^i(M, A) (ungraded shifts)."""
    ring = M.ring
    n = ring.nvars
    res = free_resolution(M, max_length=i + 1)
    ranks = list(res.ranks)
    maps = list(res.maps)
    if i >= len(ranks) or ranks[i] == 0:
        return ModulePresentation.zero(ring)
    r_i = ranks[i]
    if i < len(maps):
        cols = _transpose_columns(ring, maps[i], r_i)
        ker, _ = syzygy_vectors(ring, cols, (0,) * ranks[i + 1])
        ker = [k for k in ker if k]
    else:
        ker = [{(j, (0,) * n): 1} for j in range(r_i)]
    if not ker:
        return ModulePresentation.zero(ring)
    image = _transpose_columns(ring, maps[i - 1], ranks[i - 1]) if i > 0 else []
    image = [v for v in image if v]
    # Ext = <ker> / <image>; present the submodule <ker> of A^{r_i}/<image>
    ambient = ModulePresentation(ring, r_i, _rows_from_vectors(ring, image, r_i), (0,) * r_i)
    return submodule_presentation(ambient, ker)


# ------------------------------------------------------------ ideals


def ideal_quotient_vector(M: ModulePresentation, v: Vector) -> list[GradedPoly]:
    """(N : v) = {a : a v in N} for the relation module N of M."""
    ring = M.ring
    if not v:
        return [ring.one()]
    syz, _ = syzygy_vectors(ring, [v] + M.relation_vectors, M.shifts)
    out = []
    for s in syz:
        part = {e: x for (c, e), x in s.items() if c == 0}
        if part:
            out.append(GradedPoly(ring, part))
    return groebner_basis(out) if out else []


def ideal_intersection(a: Sequence[GradedPoly], b: Sequence[GradedPoly]) -> list[GradedPoly]:
    """I cap J as the colon (I e_1 + J e_2 : e_1 + e_2)."""
    ring = (list(a) + list(b))[0].ring
    a = [f for f in a if not f.is_zero()]
    b = [f for f in b if not f.is_zero()]
    if not a or not b:
        return []
    z = ring.zero()
    M = ModulePresentation(ring, 2, tuple((f, z) for f in a) + tuple((z, g) for g in b))
    one = (0,) * ring.nvars
    return ideal_quotient_vector(M, {(0, one): 1, (1, one): 1})


def ideal_quotient(a: Sequence[GradedPoly], f: GradedPoly) -> list[GradedPoly]:
    """(I : f) for an ideal I."""
    ring = f.ring
    M = ModulePresentation.cyclic(ring, a)
    return ideal_quotient_vector(M, {(0, e): x for e, x in f.terms})


def annihilator(M: ModulePresentation) -> list[GradedPoly]:
    """Generators (a reduced Gröbner basis) of ann(M); [] means the zero ideal."""
    ring = M.ring
    if M.ngens == 0:
        return [ring.one()]
    ann: list[GradedPoly] | None = None
    for i in range(M.ngens):
        q = ideal_quotient_vector(M, M.unit_vector(i))
        if not q:
            return []
        ann = q if ann is None else ideal_intersection(ann, q)
        if not ann:
            return []
    return groebner_basis(ann)


def krull_dimension_of_ideal(gens: Sequence[GradedPoly], ring: RingSpec) -> int:
    """dim A/I from the leading-term ideal (maximal independent variable set)."""
    gens = [g for g in gens if not g.is_zero()]
    n = ring.nvars
    if not gens:
        return n
    gb = groebner_basis(gens)
    if any(g.is_constant() for g in gb):
        return -1
    lms = [g.lm() for g in gb]
    for size in range(n, -1, -1):
        for S in combinations(range(n), size):
            Sset = set(S)
            if all(any(x and i not in Sset for i, x in enumerate(m)) for m in lms):
                return size
    return 0


def krull_dimension(M: ModulePresentation) -> int:
    if M.ngens == 0 or M.is_zero():
        raise ValueError("Krull dimension of the zero module is undefined here")
    return krull_dimension_of_ideal(annihilator(M), M.ring)


def ideal_height(gens: Sequence[GradedPoly], ring: RingSpec):
    d = krull_dimension_of_ideal(gens, ring)
    if d < 0:
        return INFINITY
    return ring.nvars - d


# ----------------------------------------------------------- saturation


def colon_by_poly(M: ModulePresentation, N_gens: Sequence[Vector], f: GradedPoly) -> list[Vector]:
    """{u in A^g : f u in <N_gens>}."""
    ring = M.ring
    g = M.ngens
    fe = []
    for i in range(g):
        fe.append({(i, e): x for e, x in f.terms})
    syz, _ = syzygy_vectors(ring, fe + [v for v in N_gens if v], M.shifts)
    out = []
    for s in syz:
        part = {(c, e): x for (c, e), x in s.items() if c < g}
        if part:
            out.append(part)
    return out


def saturation_vectors(M: ModulePresentation, f: GradedPoly) -> list[Vector]:
    """Vectors in A^g generating (N : f^infinity) where N is the relation module."""
    if f.is_zero():
        raise ValueError("cannot saturate with respect to zero")
    cur = M.relation_vectors
    cur_gb = groebner(cur, M.order) if cur else []
    while True:
        nxt = colon_by_poly(M, cur, f)
        nxt_gb = groebner(nxt, M.order) if nxt else []
        if all(submodule_contains(cur_gb, M.order, v) for v in nxt_gb):
            return cur_gb
        cur, cur_gb = nxt_gb, nxt_gb


def torsion_vectors_by_ideal(M: ModulePresentation, ideal: Sequence[GradedPoly]) -> list[Vector]:
    """Generators in A^g of (0 :_M J^infinity), J the given ideal."""
    ideal = [f for f in ideal if not f.is_zero()]
    if not ideal:
        return []
    if any(f.is_constant() for f in ideal):
        return []
    cur = M.relation_vectors
    cur_gb = groebner(cur, M.order) if cur else []
    while True:
        # (N : J) = intersection over generators of (N : f)
        parts = None
        for f in ideal:
            c = colon_by_poly(M, cur_gb, f)
            parts = c if parts is None else _intersect_submodules(M, parts, c)
        nxt_gb = groebner(parts, M.order) if parts else []
        if all(submodule_contains(cur_gb, M.order, v) for v in nxt_gb):
            break
        cur_gb = nxt_gb
    return [v for v in cur_gb if not M.is_zero_element(v)]


def _intersect_submodules(M: ModulePresentation, a: Sequence[Vector], b: Sequence[Vector]) -> list[Vector]:
    """<a> cap <b> inside A^g, via syzygies of (a | -b)."""
    ring = M.ring
    a = [v for v in a if v]
    b = [v for v in b if v]
    if not a or not b:
        return []
    p = ring.p
    syz, _ = syzygy_vectors(ring, a + [{t: (-x) % p for t, x in v.items()} for v in b], M.shifts)
    out = []
    k = len(a)
    for s in syz:
        acc: dict = {}
        for (c, e), x in s.items():
            if c >= k:
                continue
            for (cc, ee), y in a[c].items():
                t = (cc, tuple(u + w for u, w in zip(e, ee)))
                acc[t] = (acc.get(t, 0) + x * y) % p
        acc = {t: x for t, x in acc.items() if x}
        if acc:
            out.append(acc)
    return out


def saturate(M: ModulePresentation, f: GradedPoly) -> ModulePresentation:
    """The submodule (0 :_M f^infinity), as a presentation."""
    gens = [v for v in saturation_vectors(M, f) if not M.is_zero_element(v)]
    return submodule_presentation(M, gens)
