"""Factorization over F_p.

Univariate: squarefree decomposition, distinct-degree and Cantor-Zassenhaus
equal-degree splitting. Bivariate: content/primitive-part recursion, then
y-adic Hensel lifting of a squarefree specialization and exhaustive factor
recombination. Polynomials in three or more variables are only split by
caller-supplied candidate factors; whatever remains is reported as residual.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .polyring import GradedPoly, RingSpec, exact_quotient

# ------------------------------------------------------------ F_p[x] dense
# lists of ints, lowest degree first, no trailing zeros


def u_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def u_deg(a):
    return len(a) - 1


def u_add(a, b, p):
    n = max(len(a), len(b))
    return u_trim([((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p for i in range(n)])


def u_sub(a, b, p):
    n = max(len(a), len(b))
    return u_trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def u_scale(a, c, p):
    return u_trim([x * c % p for x in a])


def u_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return u_trim(out)


def u_divmod(a, b, p):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    inv = pow(b[-1], -1, p)
    db = len(b) - 1
    q = [0] * max(len(a) - db, 0)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv % p
        if c:
            q[i - db] = c
            for j, y in enumerate(b):
                a[i - db + j] = (a[i - db + j] - c * y) % p
    return u_trim(q), u_trim(a[:db] if db else [])


def u_mod(a, b, p):
    return u_divmod(a, b, p)[1]


def u_monic(a, p):
    if not a:
        return a
    return u_scale(a, pow(a[-1], -1, p), p)


def u_gcd(a, b, p):
    while b:
        a, b = b, u_mod(a, b, p)
    return u_monic(list(a), p)


def u_xgcd(a, b, p):
    """(g, s, t) with s a + t b = g monic."""
    r0, r1 = list(a), list(b)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = u_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, u_sub(s0, u_mul(q, s1, p), p)
        t0, t1 = t1, u_sub(t0, u_mul(q, t1, p), p)
    inv = pow(r0[-1], -1, p)
    return u_scale(r0, inv, p), u_scale(s0, inv, p), u_scale(t0, inv, p)


def u_powmod(a, n, m, p):
    result = [1]
    base = u_mod(a, m, p)
    while n:
        if n & 1:
            result = u_mod(u_mul(result, base, p), m, p)
        base = u_mod(u_mul(base, base, p), m, p)
        n >>= 1
    return result


def u_deriv(a, p):
    return u_trim([i * a[i] % p for i in range(1, len(a))])


def u_pth_root(a, p):
    return u_trim([a[i] for i in range(0, len(a), p)])


def u_squarefree(f, p):
    """Monic f -> [(g, m)] with f = prod g^m, g squarefree and pairwise coprime."""
    out = []
    c = u_gcd(f, u_deriv(f, p), p)
    w = u_divmod(f, c, p)[0]
    i = 1
    while u_deg(w) > 0:
        y = u_gcd(w, c, p)
        z = u_divmod(w, y, p)[0]
        if u_deg(z) > 0:
            out.append((u_monic(z, p), i))
        i += 1
        w = y
        c = u_divmod(c, y, p)[0]
    if u_deg(c) > 0:
        for g, m in u_squarefree(u_pth_root(c, p), p):
            out.append((g, m * p))
    return out


def u_ddf(f, p):
    out = []
    h = [0, 1]
    i = 1
    fs = list(f)
    while u_deg(fs) >= 2 * i:
        h = u_powmod(h, p, fs, p)
        g = u_gcd(fs, u_sub(h, [0, 1], p), p)
        if u_deg(g) > 0:
            out.append((g, i))
            fs = u_divmod(fs, g, p)[0]
            h = u_mod(h, fs, p)
        i += 1
    if u_deg(fs) > 0:
        out.append((u_monic(fs, p), u_deg(fs)))
    return out


def u_edf(f, d, p, rng):
    n = u_deg(f)
    if n == d:
        return [f]
    while True:
        a = u_trim([rng.randrange(p) for _ in range(n)])
        if u_deg(a) < 1:
            continue
        if p == 2:
            t = list(a)
            b = list(a)
            for _ in range(d - 1):
                b = u_mod(u_mul(b, b, p), f, p)
                t = u_add(t, b, p)
        else:
            t = u_sub(u_powmod(a, (p**d - 1) // 2, f, p), [1], p)
        g = u_gcd(f, t, p)
        if 0 < u_deg(g) < n:
            break
    return u_edf(g, d, p, rng) + u_edf(u_divmod(f, g, p)[0], d, p, rng)


def u_factor(f, p, seed=0):
    """f nonzero -> (lc, [(monic irreducible, multiplicity)]) sorted."""
    f = u_trim(list(f))
    if not f:
        raise ValueError("cannot factor zero")
    lc = f[-1]
    f = u_monic(f, p)
    rng = random.Random(seed)
    out = []
    for g, m in u_squarefree(f, p):
        for h, d in u_ddf(g, p):
            for q in u_edf(h, d, p, rng):
                out.append((q, m))
    out.sort(key=lambda t: (len(t[0]), t[0][::-1], t[1]))
    return lc, out


def u_is_irreducible(f, p):
    f = u_trim(list(f))
    if u_deg(f) < 1:
        return False
    _, fac = u_factor(f, p)
    return len(fac) == 1 and fac[0][1] == 1


# --------------------------------------------------------------- general gcd


def poly_gcd(f: GradedPoly, g: GradedPoly) -> GradedPoly:
    """Monic gcd of two polynomials in any number of variables.

    lcm(f, g) generates (f) cap (g); then gcd = f g / lcm.
    """
    from .modules import ideal_intersection

    if f.is_zero():
        return g.monic()
    if g.is_zero():
        return f.monic()
    if f.is_constant() or g.is_constant():
        return f.ring.one()
    inter = ideal_intersection([f], [g])
    lcm = min(inter, key=lambda h: (h.degree(), h.ring.key(h.lm())))
    q = exact_quotient(f * g, lcm)
    if q is None:
        raise ArithmeticError("lcm does not divide the product")
    return q.monic()


def poly_gcd_list(polys: Sequence[GradedPoly]) -> GradedPoly:
    polys = [f for f in polys if not f.is_zero()]
    if not polys:
        raise ValueError("gcd of the zero ideal")
    h = polys[0].monic()
    for f in polys[1:]:
        if h.is_constant():
            break
        h = poly_gcd(h, f)
    return h


# ------------------------------------------------------- factorization types


@dataclass(frozen=True)
class Factorization:
    unit: int
    factors: tuple[tuple[GradedPoly, int], ...]
    residual: GradedPoly | None = None

    def expand(self, ring: RingSpec) -> GradedPoly:
        out = ring.const(self.unit)
        for f, m in self.factors:
            out = out * f**m
        if self.residual is not None:
            out = out * self.residual
        return out


class FactorizationError(ArithmeticError):
    pass


def _to_univariate(f: GradedPoly, i: int) -> list[int]:
    out = [0] * (f.degree_in(i) + 1)
    for e, c in f.terms:
        out[e[i]] = c
    return u_trim(out)


def _from_univariate(ring: RingSpec, a: Sequence[int], i: int) -> GradedPoly:
    d = {}
    for k, c in enumerate(a):
        if c:
            e = [0] * ring.nvars
            e[i] = k
            d[tuple(e)] = c
    return GradedPoly(ring, d)


# bivariate work ring: x = index 0, y = index 1


def _embed(f: GradedPoly, ix: int, iy: int, B: RingSpec) -> GradedPoly:
    return GradedPoly(B, {(e[ix], e[iy]): c for e, c in f.terms})


def _unembed(g: GradedPoly, ix: int, iy: int, ring: RingSpec) -> GradedPoly:
    d = {}
    for (a, b), c in g.terms:
        e = [0] * ring.nvars
        e[ix] = a
        e[iy] = b
        d[tuple(e)] = c
    return GradedPoly(ring, d)


def _swap(g: GradedPoly) -> GradedPoly:
    return GradedPoly(g.ring, {(b, a): c for (a, b), c in g.terms})


def _coeffs_in_x(g: GradedPoly) -> dict[int, list[int]]:
    """x-degree -> univariate coefficient in y."""
    out: dict[int, list[int]] = {}
    for (a, b), c in g.terms:
        lst = out.setdefault(a, [])
        while len(lst) <= b:
            lst.append(0)
        lst[b] = c
    return {a: u_trim(l) for a, l in out.items()}


def _y_slice(g: GradedPoly, j: int) -> list[int]:
    """Coefficient of y^j as a univariate list in x."""
    n = max((a for (a, b), _ in g.terms), default=-1)
    out = [0] * (n + 1)
    for (a, b), c in g.terms:
        if b == j:
            out[a] = c
    return u_trim(out)


def _from_y_slice(B: RingSpec, a: Sequence[int], j: int) -> GradedPoly:
    return GradedPoly(B, {(i, j): c for i, c in enumerate(a) if c})


def _truncate_y(g: GradedPoly, k: int) -> GradedPoly:
    return GradedPoly(g.ring, {e: c for e, c in g.terms if e[1] < k})


def _shift_y(g: GradedPoly, a: int) -> GradedPoly:
    """g(x, y + a)."""
    B = g.ring
    y_plus = B.var(1) + B.const(a)
    out = B.zero()
    cache = {0: B.one()}
    for (i, j), c in g.terms:
        if j not in cache:
            cache[j] = y_plus**j
        out = out + cache[j].mul_monomial((i, 0), c)
    return out


def _hensel_two(f: GradedPoly, g0: list, h0: list, k: int, p: int):
    """Lift f = g h mod y^k from f(x,0) = g0 h0, g0 monic and coprime to h0."""
    B = f.ring
    one, sigma, tau = u_xgcd(g0, h0, p)
    if one != [1]:
        raise FactorizationError("Hensel lifting needs coprime factors")
    g = _from_y_slice(B, g0, 0)
    h = _from_y_slice(B, h0, 0)
    for j in range(1, k):
        err = _truncate_y(f - g * h, j + 1)
        e = _y_slice(err, j)
        if not e:
            continue
        q, dg = u_divmod(u_mul(tau, e, p), g0, p)
        dh = u_add(u_mul(sigma, e, p), u_mul(h0, q, p), p)
        g = g + _from_y_slice(B, dg, j)
        h = h + _from_y_slice(B, dh, j)
    return _truncate_y(g, k), _truncate_y(h, k)


def _content_in_x(g: GradedPoly, p: int) -> list[int]:
    cs = list(_coeffs_in_x(g).values())
    c = cs[0]
    for d in cs[1:]:
        c = u_gcd(c, d, p)
        if u_deg(c) == 0:
            break
    return u_monic(c, p)


def _primitive_in_x(g: GradedPoly, p: int) -> GradedPoly:
    c = _content_in_x(g, p)
    if u_deg(c) <= 0:
        return g
    q = exact_quotient(g, _from_univariate(g.ring, c, 1))
    assert q is not None
    return q


def _shear(g: GradedPoly, c: int) -> GradedPoly:
    """g(x, y + c x)."""
    B = g.ring
    lin = B.var(1) + B.var(0).scale(c)
    out = B.zero()
    for (i, j), v in g.terms:
        out = out + (lin**j).mul_monomial((i, 0), v)
    return out


def _squarefree_bivariate_factors(F: GradedPoly, p: int, depth: int = 0):
    """Irreducible factors of a squarefree, x-primitive F with deg_x >= 1.

    Returns (factors, residual) where residual is None on success. When no
    evaluation point gives a squarefree image, retry after a shear
    y -> y + c x or after exchanging the variables.
    """
    B = F.ring
    n = F.degree_in(0)
    lc = _coeffs_in_x(F)[n]
    point = None
    for a in range(p):
        if sum(c * pow(a, i, p) for i, c in enumerate(lc)) % p == 0:
            continue
        fa = [0] * (n + 1)
        for (i, j), c in F.terms:
            fa[i] = (fa[i] + c * pow(a, j, p)) % p
        fa = u_trim(fa)
        if u_deg(u_gcd(fa, u_deriv(fa, p), p)) == 0:
            point = (a, fa)
            break
    if point is None:
        if depth < 2:
            moves = [(_swap, _swap)] + [
                (lambda g, c=c: _shear(g, c), lambda g, c=c: _shear(g, -c % p)) for c in range(1, p)
            ]
            for fwd, back in moves:
                sub, res = _factor_bivariate(fwd(F), p, depth + 1)
                if res is None:
                    return [back(f) for f, _ in sub], None
        return [], F
    a, fa = point
    G = _shift_y(F, a)
    _, ufac = u_factor(fa, p)
    mods = [g for g, _ in ufac]
    if len(mods) == 1:
        return [F], None
    lcG = _coeffs_in_x(G)[n]
    k = G.degree_in(1) + u_deg(lcG) + 1
    # multifactor lifting, peeling one monic factor at a time
    lifted = []
    rest = G
    rest0 = [x for x in fa]
    for i, g0 in enumerate(mods[:-1]):
        h0 = u_divmod(rest0, g0, p)[0]
        g, h = _hensel_two(rest, g0, h0, k, p)
        lifted.append(g)
        rest = h
        rest0 = h0
    # the last factor is the lifted cofactor made monic in x
    lifted.append(_monic_in_x_mod(rest, k, p))
    found = []
    remaining = list(range(len(lifted)))
    Gcur = G
    lc_cur = lcG
    size = 1
    while 2 * size <= len(remaining):
        hit = False
        for S in combinations(remaining, size):
            cand = _from_univariate(B, lc_cur, 1)
            for s in S:
                cand = _truncate_y(cand * lifted[s], k)
            cand = _primitive_in_x(cand, p)
            q = exact_quotient(Gcur, cand)
            if q is not None:
                found.append(cand)
                Gcur = q
                lc_cur = _coeffs_in_x(Gcur)[Gcur.degree_in(0)]
                remaining = [r for r in remaining if r not in S]
                hit = True
                break
        if not hit:
            size += 1
    if Gcur.degree_in(0) > 0:
        found.append(Gcur)
    return [_shift_y(f, -a % p) for f in found], None


def _monic_in_x_mod(h: GradedPoly, k: int, p: int) -> GradedPoly:
    """h / lc_x(h) mod y^k, for lc_x(h) a unit mod y."""
    n = h.degree_in(0)
    lc = _coeffs_in_x(h)[n]
    # inverse of lc mod y^k by Newton iteration on power series
    inv = [pow(lc[0], -1, p)]
    prec = 1
    while prec < k:
        prec *= 2
        t = u_mul(lc[:prec], inv, p)[:prec]
        t = u_sub([2], t, p)
        inv = u_mul(inv, t, p)[:prec]
    inv = u_trim(inv[:k])
    return _truncate_y(h * _from_univariate(h.ring, inv, 1), k)


def _factor_bivariate(F: GradedPoly, p: int, depth: int = 0):
    """Irreducible factors with multiplicity of F in the work ring B."""
    B = F.ring
    if F.is_constant():
        return [], None
    dx, dy = F.degree_in(0), F.degree_in(1)
    if dx <= 0 or dy <= 0:
        i = 0 if dx > 0 else 1
        _, fac = u_factor(_to_univariate(F, i), p)
        return [(_from_univariate(B, g, i), m) for g, m in fac], None
    out: list = []
    cont = _content_in_x(F, p)
    if u_deg(cont) > 0:
        _, fac = u_factor(cont, p)
        out += [(_from_univariate(B, g, 1), m) for g, m in fac]
        F = exact_quotient(F, _from_univariate(B, cont, 1))
    Fx = F.derivative(0)
    if Fx.is_zero():
        if F.derivative(1).is_zero():
            H = GradedPoly(B, {(a // p, b // p): c for (a, b), c in F.terms})
            sub, res = _factor_bivariate(H, p, depth)
            if res is not None:
                return out, F
            return out + [(f, m * p) for f, m in sub], None
        sub, res = _factor_bivariate(_swap(F), p, depth)
        return out + [(_swap(f), m) for f, m in sub], (None if res is None else _swap(res))
    g = poly_gcd(F, Fx)
    if not g.is_constant():
        distinct: list[GradedPoly] = []
        for part in (g, exact_quotient(F, g)):
            sub, res = _factor_bivariate(part, p, depth)
            if res is not None:
                return out, F
            for f, _ in sub:
                f = f.monic()
                if f not in distinct:
                    distinct.append(f)
        rem = F
        for f in distinct:
            m = 0
            while True:
                q = exact_quotient(rem, f)
                if q is None:
                    break
                rem = q
                m += 1
            if m:
                out.append((f, m))
        return out, None
    facs, res = _squarefree_bivariate_factors(F, p, depth)
    if res is not None:
        return out, res
    return out + [(f, 1) for f in facs], None


def _normalize(fs, ring):
    """Merge and make monic; returns (unit correction, sorted list)."""
    merged: dict = {}
    for f, m in fs:
        g = f.monic()
        merged[g] = merged.get(g, 0) + m
    return sorted(merged.items(), key=lambda t: (t[0].degree(), str(t[0])))


def factor_poly(f: GradedPoly, candidates: Sequence[GradedPoly] = ()) -> Factorization:
    """Factor f into normalized irreducibles (leading coefficient 1)."""
    ring = f.ring
    p = ring.p
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    factors: list = []
    # monomial content
    mins = [min(e[i] for e, _ in f.terms) for i in range(ring.nvars)]
    for i, m in enumerate(mins):
        if m:
            factors.append((ring.var(i), m))
    g = GradedPoly(ring, {tuple(a - b for a, b in zip(e, mins)): c for e, c in f.terms})
    residual = None
    used = g.variables()
    if len(used) == 1:
        i = used[0]
        _, fac = u_factor(_to_univariate(g, i), p)
        factors += [(_from_univariate(ring, h, i), m) for h, m in fac]
    elif len(used) == 2:
        ix, iy = used
        B = RingSpec(p, ("x", "y"))
        fac, res = _factor_bivariate(_embed(g, ix, iy, B), p)
        factors += [(_unembed(h, ix, iy, ring), m) for h, m in fac]
        if res is not None:
            residual = _unembed(res, ix, iy, ring)
    elif len(used) > 2:
        rem = g
        for c in candidates:
            c = c.monic()
            if not is_irreducible(c):
                raise FactorizationError(f"candidate factor {c} is not certified irreducible")
            m = 0
            while True:
                q = exact_quotient(rem, c)
                if q is None:
                    break
                rem, m = q, m + 1
            if m:
                factors.append((c, m))
        if not rem.is_constant():
            residual = rem.monic()
    normalized = _normalize(factors, ring)
    prod = ring.one()
    for h, m in normalized:
        prod = prod * h**m
    if residual is not None:
        prod = prod * residual
    unit = f.lc() * pow(prod.lc(), -1, p) % p
    if prod.scale(unit) != f:
        raise FactorizationError("factorization does not reproduce the input")
    return Factorization(unit, tuple(normalized), residual)


def is_irreducible(f: GradedPoly, seed: int = 0, tries: int = 40) -> bool:
    """Certified irreducibility.

    Up to two variables: by complete factorization. Otherwise by a univariate
    specialization with preserved degree, after checking primitivity in the
    chosen variable; raises FactorizationError when no certificate is found.
    """
    if f.is_zero() or f.is_constant():
        return False
    used = f.variables()
    if len(used) <= 2:
        fac = factor_poly(f)
        return fac.residual is None and len(fac.factors) == 1 and fac.factors[0][1] == 1
    ring = f.ring
    p = ring.p
    rng = random.Random(seed)
    for i in used:
        # content with respect to X_i must be trivial
        coeffs: dict = {}
        for e, c in f.terms:
            key = e[i]
            ne = list(e)
            ne[i] = 0
            coeffs.setdefault(key, {})[tuple(ne)] = c
        if len(coeffs) == 1:
            continue
        cont = poly_gcd_list([GradedPoly(ring, d) for d in coeffs.values()])
        if not cont.is_constant():
            return False
        n = f.degree_in(i)
        for _ in range(tries):
            vals = {j: rng.randrange(p) for j in used if j != i}
            s = f.evaluate(vals)
            if s.degree_in(i) != n:
                continue
            if u_is_irreducible(_to_univariate(s, i), p):
                return True
    raise FactorizationError(f"could not certify irreducibility of {f}")
