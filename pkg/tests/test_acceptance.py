"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the report lines, or
``python3 tests/test_acceptance.py`` for the report alone.
"""

import random
import sys
import time
from collections import Counter
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpora import (  # noqa: E402
    R5,
    X,
    Y,
    random_cyclic_sum,
    random_lambda_module,
    random_presentation,
    random_series,
    random_slope_product,
    random_torsion_module,
)
from iwasawa.graded_structure import is_pseudo_null  # noqa: E402
from iwasawa.lambda_series import (  # noqa: E402
    associated_graded,
    good_filtration_W,
    gr_is_s_torsion_free,
    lambda_is_pseudo_null,
    newton_polygon,
    search_torsion_free_shift,
    slope_factorization,
    weierstrass_prepare,
)
from iwasawa.localization import annihilator_divisor_check, char_ideal, structure_certificate  # noqa: E402
from iwasawa.modules import (  # noqa: E402
    ModulePresentation,
    annihilator,
    ext_grade,
    free_resolution,
    ideal_height,
)
from iwasawa.pgroups import (  # noqa: E402
    FAIL,
    INCONCLUSIVE,
    PASS,
    GroupElement,
    gr_bracket,
    random_congruence_elements,
    verify_p_valuation,
    weight_vector,
)

REPORT = []


def report(n, ok, detail, capsys=None):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT.append(line)
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


# 1. pseudo-nullity by the Fitting route and through gr


def check_two_routes():
    rng = random.Random(1)
    t0 = time.perf_counter()
    agree = pn = 0
    for _ in range(100):
        M = random_lambda_module(rng)
        direct = lambda_is_pseudo_null(M)
        graded = is_pseudo_null(associated_graded(M))
        agree += direct == graded
        pn += direct
    dt = time.perf_counter() - t0
    ok = agree == 100 and dt < 120
    return ok, f"{agree}/100 agree ({pn} pseudo-null), {dt:.1f}s"


# 2. W(gr M) does not depend on the shifts


SHIFT_SETS = {1: [(0,), (1,), (3,)], 2: [(0, 0), (0, 1), (2, 0)], 3: [(0, 0, 0), (1, 0, 2), (0, 2, 1)]}


def check_shift_independence():
    rng = random.Random(2)
    same = 0
    for _ in range(25):
        M = random_lambda_module(rng)
        Ws = [good_filtration_W(M, ks).as_set() for ks in SHIFT_SETS[M.ngens]]
        same += 3 * all(w == Ws[0] for w in Ws)
    return same == 75, f"{same}/75 identical"


def shift_search_records(count=10):
    """Shift vectors with S-torsion-free gr for sums of cyclic modules."""
    rng = random.Random(3)
    out = []
    for _ in range(count):
        M = random_cyclic_sum(rng)
        out.append((M, search_torsion_free_shift(M)))
    return out


# 3. Weierstrass preparation round trip


def check_weierstrass():
    rng = random.Random(4)
    corpus = [random_series(rng, rng.choice([3, 5])) for _ in range(200)]
    t0 = time.perf_counter()
    forms = [weierstrass_prepare(f) for f in corpus]
    dt = time.perf_counter() - t0
    good = sum(w.reconstruct().agrees(f) and w.F.is_distinguished() and w.u.is_unit() for w, f in zip(forms, corpus))
    rerun = [weierstrass_prepare(f) for f in corpus]
    stable = all(a == b for a, b in zip(forms, rerun))
    ok = good == 200 and stable and dt < 10
    return ok, f"{good}/200 reconstruct, deterministic={stable}, {dt:.2f}s"


# 4. multiplicativity of chi and the annihilator hull


def check_chi():
    rng = random.Random(5)
    mult = 0
    for _ in range(50):
        M, N = random_torsion_module(rng), random_torsion_module(rng)
        mult += char_ideal(M.direct_sum(N)) == char_ideal(M) * char_ideal(N)
    hull = 0
    for _ in range(50):
        rep = annihilator_divisor_check(random_torsion_module(rng))
        hull += rep.containment and rep.same_support
    return mult == 50 and hull == 50, f"product {mult}/50, annihilator hull {hull}/50"


# 5. structure certificate with witnesses


def check_certificates():
    rng = random.Random(6)
    verified = found = 0
    for i in range(30):
        M = random_torsion_module(rng)
        cert = structure_certificate(M, witness_search=True, seed=i)
        verified += cert.verified and all(a == b for _, _, a, b in cert.fitting_check)
        found += cert.witness_status == "found" and cert.witness_cokernel_grade >= 2
    return verified == 30 and found >= 25, f"Fitting match {verified}/30, witnesses {found}/30"


# 6. grade equals height of the annihilator


def check_grade():
    rng = random.Random(7)
    same = 0
    for _ in range(100):
        M = random_presentation(rng)
        same += ext_grade(M) == ideal_height(annihilator(M), R5)
    K = ModulePresentation.cyclic(R5, [X, Y])
    betti = free_resolution(K).betti
    koszul = betti == (1, 2, 1) and ext_grade(K) == 2
    return same == 100 and koszul, f"{same}/100 agree, Koszul betti={betti} grade={ext_grade(K)}"


# 7. p-valuation axioms and the fixture bracket


def check_axioms():
    sample = random_congruence_elements(5, 6, 2, 500, seed=8)
    rep = verify_p_valuation(sample)
    nfail, ninc = rep.total(FAIL), rep.total(INCONCLUSIVE)
    g = GroupElement.elementary(5, 6, 2, 0, 1, 5)
    h = GroupElement.elementary(5, 6, 2, 1, 0, 5)
    b = gr_bracket(g, h)
    ok = rep.verdict == PASS and nfail == 0 and ninc == 0 and b.degree == 2 and not b.is_zero
    return ok, f"violations={nfail} inconclusive={ninc}, bracket degree {b.degree} nonzero={not b.is_zero}"


# 8. slope factorization of planted products


def merged_slopes(polys):
    c = Counter()
    for F in polys:
        for s, m in newton_polygon(F).slopes:
            c[s] += m
    return sorted(c.items())


def check_slopes():
    rng = random.Random(9)
    good = same = 0
    for _ in range(50):
        F, planted = random_slope_product(rng)
        factors = slope_factorization(F)
        prod = factors[0].poly
        for f in factors[1:]:
            prod = prod * f.poly
        by_slope = {f.slope: f.poly for f in factors}
        recovered = all(any(q.agrees(P) for q in by_slope.values()) for P in planted)
        good += prod.agrees(F) and recovered
        same += list(newton_polygon(F).slopes) == merged_slopes(planted)
    return good == 50 and same == 50, f"reconstruct {good}/50, slopes {same}/50"


# 9. weights of gr for the GL2 congruence subgroup


def check_weights():
    gens = [GroupElement.elementary(5, 6, 2, i, j, 5) for i in range(2) for j in range(2)]
    w = weight_vector(gens)
    hilbert_ok = [nu for nu, _, _ in w.hilbert] == [1, 2, 3] and all(m == s for _, m, s in w.hilbert)
    ok = w.weights == (1, 1, 1, 1, 1) and hilbert_ok
    return ok, f"weights={w.weights}, hilbert={list(w.hilbert)}"


CHECKS = [
    check_two_routes,
    check_shift_independence,
    check_weierstrass,
    check_chi,
    check_certificates,
    check_grade,
    check_axioms,
    check_slopes,
    check_weights,
]


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    ok, detail = CHECKS[n - 1]()
    assert report(n, ok, detail, capsys), detail


def test_shift_search_on_cyclic_sums(capsys):
    recs = shift_search_records()
    with capsys.disabled():
        for M, ks in recs:
            print(f"\nshift search: {M.ngens} generators -> {ks}", end="")
        print()
    for M, ks in recs:
        assert ks is not None
        assert gr_is_s_torsion_free(associated_graded(M, ks))


if __name__ == "__main__":
    results = [report(n, *check()) for n, check in enumerate(CHECKS, 1)]
    sys.exit(0 if all(results) else 1)
