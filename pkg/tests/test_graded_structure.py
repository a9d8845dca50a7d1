import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iwasawa.graded_structure import (
    NotTorsionError,
    delta2,
    delta_vectors,
    dimension_filtration,
    height_one_support,
    is_pseudo_null,
    is_torsion,
    purity_check,
    quotient_by_delta2,
)
from iwasawa.modules import INFINITY, ModulePresentation, ext_grade, submodule_presentation, submodules_equal
from iwasawa.polyring import RingSpec, parse_poly

R = RingSpec(5, ("X", "Y"))
X, Y = R.gens()


def P(s):
    return parse_poly(R, s)


def cyc(*gens):
    return ModulePresentation.cyclic(R, [P(g) for g in gens])


ZERO = ModulePresentation.zero(R)
PRIMES = [P(s) for s in ("X", "Y", "X + Y", "X^2 + 2*Y^2", "X + 2*Y")]


def random_torsion(rng):
    """Direct sum of one or two cyclic modules, some pseudo-null."""
    M = None
    for _ in range(rng.randrange(1, 3)):
        kind = rng.randrange(3)
        f = rng.choice(PRIMES) ** rng.randrange(1, 3)
        if kind == 0:
            piece = ModulePresentation.cyclic(R, [f])
        elif kind == 1:
            piece = ModulePresentation.cyclic(R, [f * rng.choice(PRIMES)])
        else:
            piece = ModulePresentation.cyclic(R, [X ** rng.randrange(1, 3), Y ** rng.randrange(1, 3)])
        M = piece if M is None else M.direct_sum(piece)
    return M


def test_pseudo_null_examples():
    assert is_pseudo_null(cyc("X", "Y"))
    assert not is_pseudo_null(cyc("X"))
    assert is_pseudo_null(ZERO)


def test_height_one_support_examples():
    assert height_one_support(cyc("X^2*Y")).as_set() == {X, Y}
    assert height_one_support(cyc("X", "Y")).is_empty
    # the annihilator of A/(X^2) + A/(XY) is (X^2 Y), so both X and Y appear
    assert height_one_support(cyc("X^2").direct_sum(cyc("X*Y"))).as_set() == {X, Y}
    with pytest.raises(NotTorsionError):
        height_one_support(ModulePresentation.free(R))


def test_delta2_examples():
    M = cyc("X", "Y")
    assert submodules_equal(M, delta_vectors(M, 2), [M.unit_vector(0)])
    assert delta2(cyc("X^2")).is_zero()
    N = cyc("X^2").direct_sum(cyc("X", "Y"))
    assert submodules_equal(N, delta_vectors(N, 2), [N.unit_vector(1)])
    with pytest.raises(NotTorsionError):
        delta2(ModulePresentation.free(R))


def test_purity_examples():
    assert purity_check(cyc("X^2")) == (True, 1)
    assert purity_check(cyc("X^2").direct_sum(cyc("X", "Y"))) == (False, 1)
    assert purity_check(cyc("X", "Y")) == (True, 2)
    with pytest.raises(ValueError):
        purity_check(ZERO)


def test_dimension_filtration_examples():
    rep = dimension_filtration(cyc("X^2"))
    M = cyc("X^2")
    assert submodules_equal(M, rep.generators[1], [M.unit_vector(0)])
    assert rep.deltas[2].is_zero() or not rep.generators[2]
    assert rep.verified

    N = ModulePresentation.free(R).direct_sum(cyc("X", "Y"))
    rep = dimension_filtration(N)
    assert submodules_equal(N, rep.generators[1], [N.unit_vector(1)])
    assert submodules_equal(N, rep.generators[2], [N.unit_vector(1)])
    assert rep.quotient_grades[0] == 0
    assert rep.verified

    rep = dimension_filtration(ZERO)
    assert all(d.is_zero() or d.ngens == 0 for d in rep.deltas)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_pseudo_null_equivalences(seed):
    M = random_torsion(random.Random(seed))
    assert is_torsion(M)
    pn = is_pseudo_null(M)
    assert pn == (ext_grade(M) >= 2)
    assert pn == height_one_support(M).is_empty
    vecs = delta_vectors(M, 2)
    whole = [M.unit_vector(i) for i in range(M.ngens)]
    assert pn == submodules_equal(M, vecs, whole)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_delta2_maximal_and_monotone(seed):
    M = random_torsion(random.Random(seed))
    Q = quotient_by_delta2(M)
    assert not delta_vectors(Q, 2)
    D = submodule_presentation(M, delta_vectors(M, 2))
    assert ext_grade(D) >= 2
    assert ext_grade(D) >= ext_grade(M)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_filtration_quotient_grades(seed):
    M = random_torsion(random.Random(seed))
    rep = dimension_filtration(M)
    assert rep.verified
    for q, j in enumerate(rep.quotient_grades):
        assert j in (q, INFINITY)
