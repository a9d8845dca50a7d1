"""Pseudo-nullity, height-one support and the dimension filtration.

Over a polynomial ring the submodule Delta^q(M) of elements generating a
submodule of grade >= q is the J-torsion of M for
J = prod_{c >= q} ann Ext^c(M, A): the support of Ext^c consists of primes of
height >= c and contains every associated prime of M of height c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .factor import factor_poly, poly_gcd_list
from .groebner import Vector, groebner_basis
from .modules import (
    ModulePresentation,
    annihilator,
    ext_grade,
    ext_module,
    quotient_presentation,
    submodule_presentation,
    torsion_vectors_by_ideal,
)
from .polyring import GradedPoly


class NotTorsionError(ValueError):
    """Raised when an operation needs a torsion module (nonzero annihilator)."""


@dataclass(frozen=True)
class HeightOneSupport:
    primes: tuple[GradedPoly, ...]
    residual: GradedPoly | None = None

    @property
    def is_empty(self) -> bool:
        return not self.primes and self.residual is None

    def __iter__(self):
        return iter(self.primes)

    def __len__(self):
        return len(self.primes)

    def as_set(self) -> frozenset:
        return frozenset(self.primes)


def is_torsion(M: ModulePresentation) -> bool:
    return bool(annihilator(M))


def is_pseudo_null(M: ModulePresentation) -> bool:
    return ext_grade(M) >= 2


def height_one_support(M: ModulePresentation, candidates: Sequence[GradedPoly] = ()) -> HeightOneSupport:
    """Irreducible common divisors of the annihilator generators."""
    ann = annihilator(M)
    if not ann:
        raise NotTorsionError("module is not torsion: annihilator is zero")
    g = poly_gcd_list(ann)
    if g.is_constant():
        return HeightOneSupport(())
    fac = factor_poly(g, candidates)
    return HeightOneSupport(tuple(f for f, _ in fac.factors), fac.residual)


def _ideal_product(a: Sequence[GradedPoly], b: Sequence[GradedPoly]) -> list[GradedPoly]:
    return groebner_basis([f * g for f in a for g in b])


def delta_vectors(M: ModulePresentation, q: int) -> list[Vector]:
    """Generators (in A^g) of Delta^q(M)."""
    ring = M.ring
    if q <= 0:
        return [M.unit_vector(i) for i in range(M.ngens) if not M.is_zero_element(M.unit_vector(i))]
    if M.ngens == 0 or M.is_zero():
        return []
    J = [ring.one()]
    for c in range(q, ring.nvars + 1):
        E = ext_module(M, c)
        if E.ngens == 0 or E.is_zero():
            continue
        ann = annihilator(E)
        J = _ideal_product(J, ann) if ann else J
    if any(f.is_constant() for f in J):
        return []
    return torsion_vectors_by_ideal(M, J)


def delta(M: ModulePresentation, q: int) -> ModulePresentation:
    return submodule_presentation(M, delta_vectors(M, q))


def delta2(M: ModulePresentation) -> ModulePresentation:
    """The largest pseudo-null submodule of a torsion module."""
    if not is_torsion(M):
        raise NotTorsionError("module is not torsion: annihilator is zero")
    return delta(M, 2)


def quotient_by_delta2(M: ModulePresentation) -> ModulePresentation:
    """M / Delta^2(M), keeping the generators of M."""
    return quotient_presentation(M, delta_vectors(M, 2), prune=False)


def purity_check(M: ModulePresentation) -> tuple[bool, int]:
    """(pure, q) with q = j(M); pure means Delta^{q+1}(M) = 0."""
    if M.ngens == 0 or M.is_zero():
        raise ValueError("purity is not defined for the zero module")
    q = ext_grade(M)
    return (not delta_vectors(M, q + 1), q)


@dataclass(frozen=True)
class DimensionFiltrationReport:
    deltas: tuple[ModulePresentation, ...]
    generators: tuple[tuple[Vector, ...], ...]
    quotient_grades: tuple[float, ...]
    verified: bool


def dimension_filtration(M: ModulePresentation) -> DimensionFiltrationReport:
    """Delta^0, Delta^1, Delta^2 with the grades of successive quotients."""
    vecs = [delta_vectors(M, q) for q in range(4)]
    deltas = tuple(submodule_presentation(M, v) for v in vecs[:3])
    grades = []
    ok = True
    for q in range(3):
        Q = quotient_presentation(M, vecs[q + 1], prune=False)
        piece = submodule_presentation(Q, vecs[q])
        j = ext_grade(piece)
        grades.append(j)
        if j != q and j != math.inf:
            ok = False
    return DimensionFiltrationReport(deltas, tuple(tuple(v) for v in vecs[:3]), tuple(grades), ok)
