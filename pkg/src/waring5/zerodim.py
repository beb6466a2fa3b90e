"""Analysis of zero loci of apolar pieces: a small Buchberger engine,
dimension/degree from the leading-term ideal, reducedness via generic
multiplication operators, component classification for the patterns the rank
table needs, and exact/numeric point extraction (Stickelberger).

Ideals live in a dual ring in at most 5 variables with generator degrees at
most 6; anything larger raises ScopeError.  All randomized retries draw from
an explicit seeded generator, so results are reproducible.
"""

from fractions import Fraction
from math import isqrt

import sympy

from .fieldarith import (ComplexBox, ExtField, FieldElem, box_eval_upoly,
                         isolate_roots, u_to_sympy, udeg, ufactor_q, umonic,
                         usqfree_part, utrim)
from .linalg import Matrix, normalize_point, vandermonde
from .polycore import (Poly, Ring, grevlex_key, monomial_index, monomials,
                       substitute_linear)

MAX_VARS = 5
MAX_GEN_DEG = 6
MAX_QUOTIENT = 120


class ScopeError(ValueError):
    pass


class GenericityError(RuntimeError):
    """Randomized retries exhausted; never a wrong answer."""


class IdealGens:
    __slots__ = ("gens", "ring", "is_gb")

    def __init__(self, gens, ring=None, is_gb=False):
        gens = [g for g in gens if not g.is_zero()]
        if ring is None:
            if not gens:
                raise ValueError("empty generator list needs an explicit ring")
            ring = gens[0].ring
        if any(g.ring != ring for g in gens):
            raise ValueError("generators live in different rings")
        self.gens = gens
        self.ring = ring
        self.is_gb = is_gb

    def __iter__(self):
        return iter(self.gens)

    def __len__(self):
        return len(self.gens)

    def __repr__(self):
        return "ideal(" + ", ".join(str(g) for g in self.gens) + ")"


def _check_scope(gens, ring):
    if ring.nvars > MAX_VARS:
        raise ScopeError(f"instance too large: {ring.nvars} variables")
    for g in gens:
        if g.degree > MAX_GEN_DEG:
            raise ScopeError(f"instance too large: generator degree {g.degree}")


# ---------------------------------------------------------------------------
# Buchberger
# ---------------------------------------------------------------------------

def _lt(p):
    m = max(p.terms, key=grevlex_key)
    return m, p.terms[m]


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _mono_div(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _mono_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _inv_scalar(c):
    return c.inverse() if isinstance(c, FieldElem) else 1 / Fraction(c)


def _monic(p):
    _, c = _lt(p)
    if c == 1:
        return p
    return p.scale(_inv_scalar(c))


def normal_form(p, basis, basis_lts=None):
    """Full normal form of p modulo a monic basis (any degrees, affine ok)."""
    if basis_lts is None:
        basis_lts = [_lt(g)[0] for g in basis]
    work = dict(p.terms)
    out = {}
    while work:
        m = max(work, key=grevlex_key)
        c = work.pop(m)
        if not c:
            continue
        red = next((i for i, lm in enumerate(basis_lts) if _divides(lm, m)), None)
        if red is None:
            out[m] = c
            continue
        g = basis[red]
        lm = basis_lts[red]
        q = _mono_div(m, lm)
        for gm, gc in g.terms.items():
            if gm == lm:
                continue
            t = tuple(a + b for a, b in zip(gm, q))
            v = work.get(t, 0) - c * gc
            if v:
                work[t] = v
            elif t in work:
                del work[t]
    deg = max((sum(m) for m in out), default=p.degree)
    return Poly(p.ring, deg, out)


def groebner(ideal, max_pairs=60000):
    """Reduced grevlex Groebner basis, deterministic.

    Buchberger with normal selection, the coprimality criterion and the
    chain criterion; the final basis is interreduced and sorted.
    """
    if ideal.is_gb:
        return ideal
    ring = ideal.ring
    _check_scope(ideal.gens, ring)
    basis = [_monic(g) for g in sorted(
        ideal.gens, key=lambda p: (p.degree, grevlex_key(_lt(p)[0])))]
    seen = set()
    uniq = []
    for g in basis:
        key = tuple(sorted(((m, str(c)) for m, c in g.terms.items())))
        if key not in seen:
            seen.add(key)
            uniq.append(g)
    basis = uniq
    lts = [_lt(g)[0] for g in basis]
    pairs = {(i, j) for i in range(len(basis)) for j in range(i + 1, len(basis))}
    processed = set()
    count = 0
    while pairs:
        count += 1
        if count > max_pairs:
            raise ScopeError("instance too large: pair limit exceeded")
        i, j = min(pairs, key=lambda ij: (sum(_mono_lcm(lts[ij[0]], lts[ij[1]])),
                                          grevlex_key(_mono_lcm(lts[ij[0]], lts[ij[1]])),
                                          ij))
        pairs.discard((i, j))
        processed.add((i, j))
        lcm = _mono_lcm(lts[i], lts[j])
        if all(a + b == c for a, b, c in zip(lts[i], lts[j], lcm)):
            continue
        skip = False
        for k in range(len(basis)):
            if k in (i, j) or not _divides(lts[k], lcm):
                continue
            if (min(i, k), max(i, k)) in processed and (min(j, k), max(j, k)) in processed:
                skip = True
                break
        if skip:
            continue
        qi = _mono_div(lcm, lts[i])
        qj = _mono_div(lcm, lts[j])
        spoly_terms = {}
        for m, c in basis[i].terms.items():
            t = tuple(a + b for a, b in zip(m, qi))
            spoly_terms[t] = spoly_terms.get(t, 0) + c
        for m, c in basis[j].terms.items():
            t = tuple(a + b for a, b in zip(m, qj))
            v = spoly_terms.get(t, 0) - c
            if v:
                spoly_terms[t] = v
            elif t in spoly_terms:
                del spoly_terms[t]
        if not spoly_terms:
            continue
        sp = Poly(ring, max(sum(m) for m in spoly_terms), spoly_terms)
        nf = normal_form(sp, basis, lts)
        if nf.is_zero():
            continue
        nf = _monic(nf)
        basis.append(nf)
        lts.append(_lt(nf)[0])
        new_idx = len(basis) - 1
        for k in range(new_idx):
            pairs.add((k, new_idx))
    keep = []
    for i, lm in enumerate(lts):
        dominated = any(
            j != i and _divides(lts[j], lm) and (lts[j] != lm or j < i)
            for j in range(len(lts)))
        if not dominated:
            keep.append(i)
    minimal = [basis[i] for i in keep]
    reduced = []
    for i, g in enumerate(minimal):
        others = [h for j, h in enumerate(minimal) if j != i]
        nf = normal_form(g, others) if others else g
        reduced.append(_monic(nf))
    reduced.sort(key=lambda p: grevlex_key(_lt(p)[0]))
    return IdealGens(reduced, ring, is_gb=True)


def ideal_membership(p, gb):
    return normal_form(p, gb.gens).is_zero()


def ideal_equal(i1, i2):
    g1, g2 = groebner(i1), groebner(i2)
    if len(g1.gens) != len(g2.gens):
        return False
    return all(a == b for a, b in zip(g1.gens, g2.gens))


# ---------------------------------------------------------------------------
# Hilbert data from the leading-term ideal
# ---------------------------------------------------------------------------

def _std_count(lts, n, deg):
    return sum(1 for m in monomials(n, deg)
               if not any(_divides(lt, m) for lt in lts))


def hilbert_data(gb):
    """(projective dimension, degree, hf) from the leading-term staircase;
    dimension -1 means the empty scheme."""
    n = gb.ring.nvars
    if not gb.gens:
        return n - 1, 0, []
    lts = [_lt(g)[0] for g in gb.gens]
    top = max(g.degree for g in gb.gens)
    T = max(2 * top + 2, n + 4, 10)
    hf = [_std_count(lts, n, t) for t in range(T + 1)]
    tail = hf[-4:]
    if all(v == 0 for v in tail):
        return -1, 0, hf
    if tail[0] == tail[1] == tail[2] == tail[3]:
        return 0, tail[0], hf
    d1 = [tail[k + 1] - tail[k] for k in range(3)]
    if d1[0] == d1[1] == d1[2]:
        return 1, d1[0], hf
    d2 = [d1[k + 1] - d1[k] for k in range(2)]
    if d2[0] == d2[1]:
        return 2, d2[0], hf
    return 3, 0, hf


# ---------------------------------------------------------------------------
# affine quotients and multiplication operators
# ---------------------------------------------------------------------------

class AffineQuotient:
    """T/(I + (chart - 1)) with its standard-monomial basis."""

    __slots__ = ("gb", "ring", "basis", "index", "lts")

    def __init__(self, gb):
        self.gb = gb
        self.ring = gb.ring
        self.lts = [_lt(g)[0] for g in gb.gens]
        n = self.ring.nvars
        for i in range(n):
            if not any(lt[i] > 0 and all(e == 0 for k, e in enumerate(lt) if k != i)
                       for lt in self.lts):
                raise GenericityError("affine quotient is not finite")
        basis = []
        frontier = [(0,) * n]
        seen = {(0,) * n}
        while frontier:
            m = frontier.pop()
            if any(_divides(lt, m) for lt in self.lts):
                continue
            basis.append(m)
            if len(basis) > MAX_QUOTIENT:
                raise ScopeError("instance too large: quotient dimension")
            for i in range(n):
                mm = list(m)
                mm[i] += 1
                mm = tuple(mm)
                if mm not in seen:
                    seen.add(mm)
                    frontier.append(mm)
        basis.sort(key=grevlex_key)
        self.basis = basis
        self.index = {m: k for k, m in enumerate(basis)}

    @property
    def dim(self):
        return len(self.basis)

    def nf_vector(self, p):
        nf = normal_form(p, self.gb.gens, self.lts)
        v = [Fraction(0)] * self.dim
        for m, c in nf.terms.items():
            v[self.index[m]] = c
        return v

    def var_vector(self, i):
        n = self.ring.nvars
        e = [0] * n
        e[i] = 1
        return self.nf_vector(Poly.from_terms(self.ring, [(tuple(e), Fraction(1))]))

    def mult_matrix(self, linform_coeffs):
        ring = self.ring
        cols = []
        for b in self.basis:
            terms = {}
            for i, u in enumerate(linform_coeffs):
                if u:
                    e = list(b)
                    e[i] += 1
                    terms[tuple(e)] = u
            p = Poly(ring, sum(b) + 1, terms)
            cols.append(self.nf_vector(p))
        return Matrix([[cols[j][i] for j in range(self.dim)]
                       for i in range(self.dim)], self.dim)


def dehomogenize(ideal, chart_coeffs):
    """Add the chart equation sum(u_i y_i) = 1 (an inhomogeneous generator)."""
    ring = ideal.ring
    n = ring.nvars
    terms = {(0,) * n: Fraction(-1)}
    for i, u in enumerate(chart_coeffs):
        if u:
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = Fraction(u)
    chart = Poly(ring, 1, terms)
    return IdealGens(list(ideal.gens) + [chart], ring)


def _random_units(rng, n, lo, hi):
    while True:
        u = [Fraction(rng.randint(lo, hi)) for _ in range(n)]
        if any(u):
            return u


# ---------------------------------------------------------------------------
# point extraction
# ---------------------------------------------------------------------------

class PointSet:
    """Points of a reduced zero-dimensional scheme.

    exact_points: projective tuples over Q or one extension, or None when the
    eliminant does not split within the tower bound.  numeric_points is
    always populated, one box vector per point.
    """

    __slots__ = ("exact_points", "eliminant", "numeric_points", "tower")

    def __init__(self, exact_points, eliminant, numeric_points, tower=None):
        self.exact_points = exact_points
        self.eliminant = eliminant
        self.numeric_points = numeric_points
        self.tower = tower

    def __len__(self):
        return len(self.numeric_points)

    def __repr__(self):
        if self.exact_points is not None:
            return f"PointSet({self.exact_points})"
        return f"PointSet(numeric x{len(self.numeric_points)})"


def _eliminant_and_coords(quot, rng, attempts=3):
    """Generic linear form with square-free full-degree minimal polynomial
    plus coordinate polynomials c_i(t) such that y_i = c_i(xi) mod I."""
    n = quot.ring.nvars
    D = quot.dim
    lo, hi = -10, 10
    for _ in range(attempts):
        u = _random_units(rng, n, lo, hi)
        M = quot.mult_matrix(u)
        mp = M.minpoly()
        lo, hi = -100, 100
        if udeg(mp) != D or udeg(usqfree_part(mp)) != D:
            continue
        one = [Fraction(0)] * D
        one[quot.index[(0,) * n]] = Fraction(1)
        powers = [one]
        vec = one
        for _ in range(D - 1):
            vec = M.mulvec(vec)
            powers.append(vec)
        K = Matrix([[powers[k][i] for k in range(D)] for i in range(D)], D)
        coords = []
        ok = True
        for i in range(n):
            a = K.solve(quot.var_vector(i))
            if a is None:
                ok = False
                break
            coords.append(utrim(a))
        if ok:
            return u, mp, coords
    return None


def _rational_roots(coeffs):
    roots = []
    for fac, _m in ufactor_q(coeffs)[1]:
        if udeg(fac) == 1:
            roots.append(-fac[0] / fac[1])
    roots.sort()
    return roots


def _as_rational_list(coeffs):
    out = []
    for c in coeffs:
        if isinstance(c, FieldElem):
            if not c.is_rational():
                return None
            out.append(c.rational_value())
        else:
            out.append(Fraction(c))
    return out


def _roots_in_tower(coeffs, tower):
    """Roots lying in Q (tower None) or in the given extension field."""
    if tower is None:
        fr = _as_rational_list(coeffs)
        if fr is None:
            raise ValueError("rational root search on non rational data")
        return [FieldElem.of(r) for r in _rational_roots(fr)]
    theta = sympy.CRootOf(u_to_sympy(list(tower.minpoly)).as_expr(), 0)
    dom = sympy.QQ.algebraic_field(theta)
    x = sympy.Symbol("_w5_x")
    expr = sympy.Integer(0)
    for i, c in enumerate(coeffs):
        if isinstance(c, FieldElem) and c.tower is not None:
            ce = sum((sympy.Rational(q) * theta ** k for k, q in enumerate(c.coords)),
                     sympy.Integer(0))
        else:
            q = c.rational_value() if isinstance(c, FieldElem) else Fraction(c)
            ce = sympy.Rational(q)
        expr = expr + ce * x ** i
    poly = sympy.Poly(expr, x, domain=dom)
    roots = []
    for fac, _m in poly.factor_list()[1]:
        if fac.degree() != 1:
            continue
        c1, c0 = fac.all_coeffs()
        anp = dom.from_sympy(sympy.expand(-c0 / c1))
        rep = list(reversed(anp.to_list()))  # low -> high in the generator
        coords = [Fraction(int(t.numerator), int(t.denominator)) for t in rep]
        coords += [Fraction(0)] * (tower.degree - len(coords))
        roots.append(FieldElem(tower, tuple(coords[:tower.degree])))
    return roots


def _points_from_rur(mp, coords, tower, precision, allow_extension,
                     ext_bound, label):
    n = len(coords)
    out_tower = tower
    exact_roots = _roots_in_tower(mp, tower)
    if len(exact_roots) < udeg(mp) and tower is None and allow_extension:
        fr = _as_rational_list(mp)
        nonlinear = [f for f, _m in ufactor_q(fr)[1] if udeg(f) > 1]
        if len(nonlinear) == 1 and udeg(nonlinear[0]) == 2 and ext_bound >= 2:
            quad = umonic(nonlinear[0])
            ext = ExtField(quad, label=label)
            r1 = ext.gen()
            r2 = FieldElem.of(-quad[1], ext) - r1  # root sum is -b
            exact_roots = [FieldElem.of(r.rational_value(), ext)
                           for r in exact_roots] + [r1, r2]
            out_tower = ext
    exact_points = None
    if len(exact_roots) == udeg(mp):
        exact_points = []
        for r in exact_roots:
            pt = []
            for i in range(n):
                acc = FieldElem.of(0, r.tower)
                for cf in reversed(coords[i]):
                    acc = acc * r + FieldElem.of(cf, r.tower)
                pt.append(acc)
            exact_points.append(normalize_point(tuple(pt)))
    numeric = _numeric_points(mp, coords, precision)
    return PointSet(exact_points, mp, numeric, out_tower)


def _numeric_points(mp, coords, precision):
    fr_mp = _as_rational_list(mp)
    if fr_mp is None:
        return _numeric_points_tower(mp, coords, precision)
    boxes = isolate_roots(fr_mp, precision=precision)
    out = []
    for box, _m in boxes:
        pt = []
        for c in coords:
            fc = _as_rational_list(c)
            pt.append(box_eval_upoly(fc, box))
        out.append(tuple(pt))
    return out


def _numeric_points_tower(mp, coords, precision):
    """Numeric points when data lives over an extension: embed the generator
    through its first root (deterministic ordering), then approximate."""
    from .fieldarith import embed_numeric
    tower = next(c.tower for poly in [mp] + list(coords) for c in poly
                 if isinstance(c, FieldElem) and c.tower is not None)
    gen_box = embed_numeric(tower.gen(), 0, precision)

    def embed(c):
        if isinstance(c, FieldElem) and c.tower is not None:
            return box_eval_upoly(list(c.coords), gen_box)
        q = c.rational_value() if isinstance(c, FieldElem) else Fraction(c)
        return ComplexBox.point(q)

    mp_boxes = [embed(c) for c in mp]
    roots = _box_poly_roots(mp_boxes, precision)
    out = []
    for box in roots:
        pt = []
        for c in coords:
            acc = ComplexBox.point(0)
            for cf in reversed(c):
                acc = acc * box + embed(cf)
            pt.append(acc)
        out.append(tuple(pt))
    return out


def _box_poly_roots(coeff_boxes, precision):
    """Approximate roots of a polynomial given by narrow coefficient boxes,
    padded into boxes; used only for display and residual estimates."""
    import mpmath
    mpmath.mp.prec = max(2 * precision, 128)
    mid = [mpmath.mpc(float(b.mid()[0]), float(b.mid()[1])) for b in coeff_boxes]
    while mid and mid[-1] == 0:
        mid.pop()
    roots = mpmath.polyroots(list(reversed(mid)), maxsteps=300, extraprec=300)
    pad = Fraction(1, 1 << max(24, precision // 2))
    out = []
    for r in sorted(roots, key=lambda z: (float(z.real), float(z.imag))):
        re = Fraction(float(r.real)).limit_denominator(1 << 80)
        im = Fraction(float(r.imag)).limit_denominator(1 << 80)
        out.append(ComplexBox((re - pad, re + pad), (im - pad, im + pad)))
    return out


def solve_points(ideal_or_gb, rng, tower=None, precision=64,
                 allow_extension=False, ext_bound=8, label="a"):
    """Points of a reduced zero-dimensional projective scheme via a generic
    chart, multiplication matrices and eigenvalue coordinates."""
    gb = groebner(ideal_or_gb)
    pdim, degree, _ = hilbert_data(gb)
    if pdim != 0:
        raise ValueError("solve_points needs a zero-dimensional scheme")
    n = gb.ring.nvars
    for attempt in range(6):
        chart = _random_units(rng, n, -5 - attempt, 5 + attempt)
        try:
            quot = AffineQuotient(groebner(dehomogenize(gb, chart)))
        except GenericityError:
            continue
        if quot.dim != degree:
            continue
        got = _eliminant_and_coords(quot, rng)
        if got is None:
            continue
        _u, mp, coords = got
        return _points_from_rur(mp, coords, tower, precision,
                                allow_extension, ext_bound, label)
    raise GenericityError("no generic chart found for point extraction")


def is_reduced_zero_dim(ideal_or_gb, rng):
    """Radical test for a projective zero-dimensional ideal: square-free
    minimal polynomial of a generic multiplication operator with full degree.
    Degree shortfall forces a retry, never a wrong answer."""
    gb = groebner(ideal_or_gb)
    pdim, degree, _ = hilbert_data(gb)
    if pdim != 0:
        raise ValueError("is_reduced_zero_dim needs a zero-dimensional scheme")
    n = gb.ring.nvars
    for attempt in range(6):
        chart = _random_units(rng, n, -5 - attempt, 5 + attempt)
        try:
            quot = AffineQuotient(groebner(dehomogenize(gb, chart)))
        except GenericityError:
            continue
        if quot.dim != degree:
            continue
        lo, hi = -10, 10
        for _k in range(3):
            u = _random_units(rng, n, lo, hi)
            mp = quot.mult_matrix(u).minpoly()
            lo, hi = -100, 100
            if udeg(mp) == quot.dim:
                return udeg(usqfree_part(mp)) == quot.dim
        return False
    raise GenericityError("no usable chart for reducedness test")


# ---------------------------------------------------------------------------
# scheme reports
# ---------------------------------------------------------------------------

class Component:
    __slots__ = ("kind", "point", "multiplicity", "data")

    def __init__(self, kind, point=None, multiplicity=1, data=None):
        self.kind = kind  # point | fat-point | line | plane | conic | other
        self.point = point
        self.multiplicity = multiplicity
        self.data = data or {}

    def __repr__(self):
        if self.kind in ("point", "fat-point"):
            return f"{self.kind}(mult={self.multiplicity}, {self.point})"
        return self.kind


class SchemeReport:
    __slots__ = ("proj_dim", "degree", "is_reduced", "components", "points",
                 "pattern", "gb")

    def __init__(self, proj_dim, degree, is_reduced, components, points=None,
                 pattern="other", gb=None):
        self.proj_dim = proj_dim
        self.degree = degree
        self.is_reduced = is_reduced
        self.components = components
        self.points = points
        self.pattern = pattern
        self.gb = gb

    def simple_points(self):
        return [c.point for c in self.components
                if c.kind == "point" and c.point is not None]

    def __repr__(self):
        return (f"SchemeReport(dim={self.proj_dim}, deg={self.degree}, "
                f"reduced={self.is_reduced}, pattern={self.pattern})")


def scheme_analyze(ideal, rng, tower=None, solve=True):
    """Structure of Z(I), specialized to the patterns the rank table needs:
    "empty", "points", "point+fat"/"fat", "conic", "line"/"line+points",
    "plane+points"; everything else reports "other"."""
    if not ideal.gens:
        n = ideal.ring.nvars
        return SchemeReport(n - 1, 0, False, [Component("other")], pattern="other")
    gb = groebner(ideal)
    pdim, degree, _hf = hilbert_data(gb)
    if pdim == -1:
        return SchemeReport(-1, 0, True, [], pattern="empty", gb=gb)
    if pdim == 0:
        return _analyze_dim0(gb, degree, rng, tower, solve)
    if pdim == 1 and degree == 1:
        return _analyze_line_plus_points(gb, rng, tower)
    if pdim == 1 and degree == 2 and gb.ring.nvars == 3:
        return SchemeReport(1, 2, False, [Component("conic", data={"gb": gb})],
                            pattern="conic", gb=gb)
    if pdim == 2:
        rep = _analyze_plane_plus_points(gb, rng, tower, solve)
        if rep is not None:
            return rep
    return SchemeReport(pdim, degree, False, [Component("other")],
                        pattern="other", gb=gb)


def _analyze_dim0(gb, degree, rng, tower, solve):
    n = gb.ring.nvars
    quot = None
    for attempt in range(6):
        chart = _random_units(rng, n, -5 - attempt, 5 + attempt)
        try:
            q = AffineQuotient(groebner(dehomogenize(gb, chart)))
        except GenericityError:
            continue
        if q.dim == degree:
            quot = q
            break
    if quot is None:
        raise GenericityError("zero-dimensional analysis found no generic chart")
    got = _eliminant_and_coords(quot, rng)
    if got is not None:
        _u, mp, coords = got
        pts = None
        comps = []
        if solve:
            pts = _points_from_rur(mp, coords, tower, 64, False, 8, "a")
            exact = pts.exact_points
            for k in range(degree):
                comps.append(Component("point",
                                       point=exact[k] if exact else None))
        else:
            comps = [Component("point") for _ in range(degree)]
        return SchemeReport(0, degree, True, comps, points=pts,
                            pattern="points", gb=gb)
    rep = _support_components(quot, rng)
    if rep is None:
        return SchemeReport(0, degree, False, [Component("other")],
                            pattern="other", gb=gb)
    comps, reduced = rep
    if all(c.kind == "point" for c in comps):
        pattern = "points"
    elif any(c.kind == "point" for c in comps):
        pattern = "point+fat"
    else:
        pattern = "fat"
    return SchemeReport(0, degree, reduced, comps, pattern=pattern, gb=gb)


def _support_components(quot, rng):
    """Supports and local multiplicities of a (possibly non reduced)
    zero-dimensional affine scheme, from the charpoly of a generic operator;
    coordinates attached for supports rational over the base field."""
    n = quot.ring.nvars
    best = None
    for k in range(3):
        u = _random_units(rng, n, -10 - 40 * k, 10 + 40 * k)
        M = quot.mult_matrix(u)
        cp = M.charpoly()
        sq = usqfree_part(cp)
        if best is None or udeg(sq) > udeg(best[2]):
            best = (u, M, sq, cp)
    u, M, sq, cp = best
    fr = _as_rational_list(cp)
    if fr is None:
        return None
    comps = []
    total = 0
    for fac, m in ufactor_q(fr)[1]:
        for _ in range(udeg(fac)):
            comps.append(Component("point" if m == 1 else "fat-point",
                                   multiplicity=m))
            total += m
        if udeg(fac) == 1 and comps:
            lam = -fac[0] / fac[1]
            vec = _left_eigen_point(quot, M, lam)
            if vec is not None:
                for c in comps:
                    if c.multiplicity == m and c.point is None:
                        c.point = vec
                        break
    if total != quot.dim:
        return None
    reduced = all(c.multiplicity == 1 for c in comps)
    return comps, reduced


def _left_eigen_point(quot, M, lam):
    """Coordinates of the support with operator eigenvalue lam, from the
    left eigenvector (the evaluation functional)."""
    n = quot.ring.nvars
    D = quot.dim
    A = Matrix([[M.rows[j][i] - (lam if i == j else 0) for j in range(D)]
                for i in range(D)], D)
    ker = A.kernel()
    if ker.ncols != 1:
        return None
    w = [ker.rows[i][0] for i in range(D)]
    one_pos = quot.index[(0,) * n]
    if not w[one_pos]:
        return None
    scale = _inv_scalar(w[one_pos])
    w = [x * scale for x in w]
    pt = []
    for i in range(n):
        vec = quot.var_vector(i)
        pt.append(sum((a * b for a, b in zip(vec, w) if a and b),
                      start=Fraction(0)))
    try:
        return normalize_point(tuple(pt))
    except Exception:
        return None


def _analyze_line_plus_points(gb, rng, tower):
    """One degree-1 curve component (a line) plus isolated points."""
    ring = gb.ring
    n = ring.nvars
    slice_pts = []
    for k in range(8):
        if len(slice_pts) >= 2:
            break
        h = _random_units(rng, n, -7 - k, 7 + k)
        terms = {}
        for i, c in enumerate(h):
            if c:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = Fraction(c)
        hp = Poly(ring, 1, terms)
        try:
            sub_gb = groebner(IdealGens(list(gb.gens) + [hp], ring))
            spdim, sdeg, _ = hilbert_data(sub_gb)
            if spdim != 0:
                continue
            sub = _analyze_dim0(sub_gb, sdeg, rng, tower, solve=True)
        except (GenericityError, ScopeError):
            continue
        if sub.is_reduced and sub.points and sub.points.exact_points:
            for p in sub.points.exact_points:
                if not any(_same_proj_point(p, q) for q in slice_pts):
                    slice_pts.append(p)
    line = _line_through(slice_pts, ring) if len(slice_pts) >= 2 else None
    if line is None or not _ideal_vanishes_on_line(gb, line, ring):
        return SchemeReport(1, 1, False, [Component("other")],
                            pattern="other", gb=gb)
    iso = _isolated_points_off_line(gb, line, rng)
    comps = [Component("line", data={"ideal": line})]
    for p, mult in iso:
        comps.append(Component("point" if mult == 1 else "fat-point",
                               point=p, multiplicity=mult))
    pattern = "line+points" if iso else "line"
    return SchemeReport(1, 1, all(m == 1 for _p, m in iso), comps,
                        pattern=pattern, gb=gb)


def _line_through(pts, ring):
    n = ring.nvars
    A = Matrix([list(p) for p in pts[:2]], n)
    K = A.kernel()
    lins = []
    for j in range(K.ncols):
        items = []
        for i in range(n):
            if K.rows[i][j]:
                e = [0] * n
                e[i] = 1
                items.append((tuple(e), K.rows[i][j]))
        lins.append(Poly.from_terms(ring, items, degree=1))
    return lins if len(lins) == n - 2 else None


def _ideal_vanishes_on_line(gb, line_forms, ring):
    n = ring.nvars
    A = Matrix([f.coeff_vector() for f in line_forms], n)
    K = A.kernel()
    if K.ncols != 2:
        return False
    par = [[K.rows[i][0], K.rows[i][1]] for i in range(n)]
    t2 = Ring.standard(2, prefix="t")
    return all(not substitute_linear(g, par, t2) for g in gb.gens)


def _isolated_points_off_line(gb, line_forms, rng):
    """Isolated points found in charts that place the line at infinity."""
    found = []
    a = line_forms[0].coeff_vector()
    combos = [a]
    if len(line_forms) >= 2:
        b = line_forms[1].coeff_vector()
        combos = [a, b,
                  [x + y for x, y in zip(a, b)],
                  [x - y for x, y in zip(a, b)],
                  [x + 2 * y for x, y in zip(a, b)]]
    for chart in combos:
        try:
            quot = AffineQuotient(groebner(dehomogenize(gb, chart)))
        except (GenericityError, ScopeError):
            continue
        if quot.dim == 0:
            continue
        rep = _support_components(quot, rng)
        if rep is None:
            continue
        for c in rep[0]:
            if c.point is None:
                continue
            if any(_same_proj_point(c.point, q) for q, _m in found):
                continue
            found.append((c.point, c.multiplicity))
    return found


def _same_proj_point(p, q):
    try:
        return all(a == b for a, b in zip(normalize_point(p), normalize_point(q)))
    except Exception:
        return False


def _analyze_plane_plus_points(gb, rng, tower, solve):
    """P union H: every generator divisible by one linear form."""
    ring = gb.ring
    lin = _common_linear_factor(gb)
    if lin is None:
        return None
    cof = [divide_form(g, lin) for g in gb.gens]
    if any(c is None for c in cof):
        return None
    try:
        sub = scheme_analyze(IdealGens([c for c in cof if not c.is_zero()], ring),
                             rng, tower, solve)
    except (GenericityError, ScopeError):
        return None
    comps = [Component("plane", data={"ideal": [lin]})] + list(sub.components)
    return SchemeReport(2, 1, False, comps, points=sub.points,
                        pattern="plane+points", gb=gb)


def _common_linear_factor(gb):
    for lin in linear_factors(gb.gens[0]):
        if all(divide_form(g, lin) is not None for g in gb.gens):
            return lin
    return None


def divide_form(g, divisor):
    """Exact quotient g / divisor or None, via a linear solve on the unknown
    cofactor coefficients."""
    ring = g.ring
    n = ring.nvars
    dq = g.degree - divisor.degree
    if dq < 0:
        return None
    cols_m = monomials(n, dq)
    rows_idx = monomial_index(n, g.degree)
    data = [[Fraction(0)] * len(cols_m) for _ in range(len(rows_idx))]
    for j, m in enumerate(cols_m):
        for dm, dc in divisor.terms.items():
            t = tuple(x + y for x, y in zip(m, dm))
            data[rows_idx[t]][j] = data[rows_idx[t]][j] + dc
    b = [Fraction(0)] * len(rows_idx)
    for m, c in g.terms.items():
        b[rows_idx[m]] = c
    sol = Matrix(data, len(cols_m)).solve(b)
    if sol is None:
        return None
    items = [(cols_m[j], sol[j]) for j in range(len(cols_m)) if sol[j]]
    return Poly.from_terms(ring, items, degree=dq) if items else Poly.zero(ring, dq)


def linear_factors(g):
    """Candidate linear factors: exact for linear and quadric inputs,
    variable factors for higher degree (enough to seed divisibility checks)."""
    ring = g.ring
    n = ring.nvars
    if g.degree == 1:
        return [g]
    if g.degree == 2:
        split = quadric_split(g)
        if split is not None and split[0] in ("two-lines", "double-line"):
            return list(split[1])
        return []
    out = []
    for i in range(n):
        if all(m[i] > 0 for m in g.terms):
            e = [0] * n
            e[i] = 1
            out.append(Poly.from_terms(ring, [(tuple(e), Fraction(1))]))
    return out


# ---------------------------------------------------------------------------
# quadrics
# ---------------------------------------------------------------------------

def quadric_matrix(q):
    n = q.ring.nvars
    M = [[Fraction(0)] * n for _ in range(n)]
    for m, c in q.terms.items():
        idx = [i for i, e in enumerate(m) for _ in range(e)]
        i, j = idx[0], idx[1]
        if i == j:
            M[i][i] = M[i][i] + c
        else:
            half = c * Fraction(1, 2)
            M[i][j] = M[i][j] + half
            M[j][i] = M[j][i] + half
    return Matrix(M, n)


def quadric_split(q):
    """Structure of a rank <= 2 quadratic form: ("double-line", [l]),
    ("two-lines", [l1, l2]), or ("two-lines-conjugate", vertex, ratio) when
    the split needs adjoining sqrt(ratio); None when rank > 2."""
    ring = q.ring
    M = quadric_matrix(q)
    r = M.rank()
    if r > 2 or r == 0:
        return None
    n = ring.nvars

    def bform(x, y):
        return sum((x[i] * sum((M.rows[i][j] * y[j] for j in range(n) if y[j]),
                               start=Fraction(0))
                    for i in range(n) if x[i]), start=Fraction(0))

    cands = [[Fraction(int(k == i)) for k in range(n)] for i in range(n)]
    cands += [[Fraction(int(k == i) + int(k == j)) for k in range(n)]
              for i in range(n) for j in range(i + 1, n)]
    u = next((c for c in cands if bform(c, c)), None)
    if u is None:
        return ("two-lines-conjugate", _quadric_vertex(M), None)
    a = bform(u, u)
    items = []
    for i in range(n):
        ci = sum((M.rows[i][j] * u[j] for j in range(n) if u[j]), start=Fraction(0))
        if ci:
            e = [0] * n
            e[i] = 1
            items.append((tuple(e), ci / a))
    L1 = Poly.from_terms(ring, items, degree=1)
    rest = q - (L1 * L1).scale(a)
    if rest.is_zero():
        return ("double-line", [L1.monic()])
    M2 = quadric_matrix(rest)
    row = next(i for i in range(n) if any(M2.rows[i]))
    c2 = M2.rows[row][row]
    if not c2:
        return ("two-lines-conjugate", _quadric_vertex(M), None)
    items = []
    for i in range(n):
        ci = M2.rows[row][i] / c2
        if ci:
            e = [0] * n
            e[i] = 1
            items.append((tuple(e), ci))
    L2 = Poly.from_terms(ring, items, degree=1)
    ratio = -c2 / a
    num, den = ratio.numerator, ratio.denominator
    if num >= 0:
        rn, rd = isqrt(num), isqrt(den)
        if rn * rn == num and rd * rd == den:
            s = Fraction(rn, rd)
            return ("two-lines", [(L1 + L2.scale(s)).monic(),
                                  (L1 - L2.scale(s)).monic()])
    return ("two-lines-conjugate", _quadric_vertex(M), ratio)


def _quadric_vertex(M):
    K = M.kernel()
    if K.ncols != 1:
        return None
    return normalize_point(tuple(K.rows[i][0] for i in range(K.nrows)))


# ---------------------------------------------------------------------------
# ideals of points and unions
# ---------------------------------------------------------------------------

def ideal_of_points(points, dual_ring, max_deg=7):
    """Generators (all graded kernel elements up to regularity + 1) of the
    ideal of a finite set of distinct points; also returns the regularity."""
    r = len(points)
    n = dual_ring.nvars
    gens = []
    reg = None
    for k in range(1, max_deg + 1):
        V = vandermonde(points, k, n)
        if reg is None and V.rank() == r:
            reg = k
        K = V.kernel()
        mons = monomials(n, k)
        for j in range(K.ncols):
            items = [(mons[i], K.rows[i][j]) for i in range(K.nrows)
                     if K.rows[i][j]]
            gens.append(Poly.from_terms(dual_ring, items, degree=k))
        if reg is not None and k >= reg + 1:
            break
    if reg is None:
        raise ValueError("points not separated within the degree cap")
    return IdealGens(_prune_generators(gens, dual_ring), dual_ring), reg


def graded_piece(gens, ring, k):
    """Echelon basis (rows) of the degree-k span of the ideal generated by
    gens, as coefficient vectors in T_k."""
    mons_k = monomials(ring.nvars, k)
    idx = monomial_index(ring.nvars, k)
    rows = []
    for g in gens:
        if g.degree > k:
            continue
        for m in monomials(ring.nvars, k - g.degree):
            vec = [Fraction(0)] * len(mons_k)
            for gm, gc in g.terms.items():
                t = tuple(x + y for x, y in zip(gm, m))
                vec[idx[t]] = vec[idx[t]] + gc
            rows.append(vec)
    if not rows:
        return Matrix([], len(mons_k))
    ech, _p = Matrix(rows, len(mons_k))._echelon()
    return Matrix(ech, len(mons_k))


class _EchelonSpan:
    """Incremental exact row echelon; rational vectors run fraction-free on
    content-reduced integers, extension vectors fall back to generic field
    arithmetic."""

    __slots__ = ("ncols", "rows", "pivots", "_int_mode")

    def __init__(self, ncols):
        self.ncols = ncols
        self.rows = []
        self.pivots = []
        self._int_mode = True

    @staticmethod
    def _intify(vec):
        from math import gcd, lcm
        den = 1
        for x in vec:
            if isinstance(x, FieldElem):
                if not x.is_rational():
                    return None
                x = x.rational_value()
            den = lcm(den, Fraction(x).denominator)
        ints = [int(Fraction(x.rational_value() if isinstance(x, FieldElem) else x) * den) for x in vec]
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        if g > 1:
            ints = [v // g for v in ints]
        return ints

    def reduce(self, vec):
        if self._int_mode:
            iv = self._intify(vec)
            if iv is not None:
                from math import gcd
                for row, p in zip(self.rows, self.pivots):
                    if iv[p]:
                        rp, vp = row[p], iv[p]
                        iv = [a * rp - b * vp for a, b in zip(iv, row)]
                        g = 0
                        for v in iv:
                            g = gcd(g, abs(v))
                        if g > 1:
                            iv = [v // g for v in iv]
                return iv
            self._demote()
        v = list(vec)
        for row, p in zip(self.rows, self.pivots):
            if v[p]:
                s = v[p] * _inv_scalar(row[p])
                v = [a - s * b for a, b in zip(v, row)]
        return v

    def _demote(self):
        if self._int_mode:
            self._int_mode = False
            self.rows = [[Fraction(x) for x in row] for row in self.rows]

    def add(self, vec):
        """Reduce and insert; returns the remainder or None if dependent."""
        v = self.reduce(vec)
        p = next((i for i, x in enumerate(v) if x), None)
        if p is None:
            return None
        self.rows.append(v)
        self.pivots.append(p)
        return v

    @property
    def dim(self):
        return len(self.rows)


def _eval_monomials_at(mons, pnorm):
    out = []
    for m in mons:
        v = Fraction(1)
        for x, e in zip(pnorm, m):
            for _ in range(e):
                v = v * x
        out.append(v)
    return out


def intersect_with_point_ideal(gens, ring, point, total_degree, max_deg=7):
    """Generators of I intersect m_P by graded pieces: the degree-k piece is
    the subspace of I_k vanishing at P.  Only genuinely new generators (not
    in T_1 times the ideal collected so far) are kept."""
    out = []
    hits = 0
    pnorm = normalize_point(point)
    n = ring.nvars
    for k in range(1, max_deg + 1):
        mons_k = monomials(n, k)
        idx = monomial_index(n, k)
        ev = _eval_monomials_at(mons_k, pnorm)
        A = graded_piece(gens, ring, k)
        rows = [list(A.rows[i]) for i in range(A.nrows)]
        if rows:
            vals = [sum((r[c] * ev[c] for c in range(len(ev)) if r[c]),
                        start=Fraction(0)) for r in rows]
            base = next((i for i, v in enumerate(vals) if v), None)
            kept = []
            for i, r in enumerate(rows):
                if not vals[i]:
                    kept.append(r)
                elif base is not None and i != base:
                    s = vals[i] * _inv_scalar(vals[base])
                    kept.append([x - s * y for x, y in zip(r, rows[base])])
            rows = kept
        # span of the ideal generated so far, in degree k
        span = _EchelonSpan(len(mons_k))
        for g in out:
            if g.degree > k:
                continue
            for m in monomials(n, k - g.degree):
                vec = [Fraction(0)] * len(mons_k)
                for gm, gc in g.terms.items():
                    t = tuple(x + y for x, y in zip(gm, m))
                    vec[idx[t]] = vec[idx[t]] + gc
                span.add(vec)
        piece = _EchelonSpan(len(mons_k))
        piece_dim = 0
        for r in rows:
            if piece.add(r) is not None:
                piece_dim += 1
        for r in piece.rows:
            rem = span.add(r)
            if rem is not None:
                items = [(mons_k[c], rem[c] if isinstance(rem[c], FieldElem)
                          else Fraction(rem[c]))
                         for c in range(len(mons_k)) if rem[c]]
                out.append(Poly.from_terms(ring, items, degree=k))
        hf = len(mons_k) - piece_dim
        if hf == total_degree:
            hits += 1
            if hits >= 2:
                break
        else:
            hits = 0
    return IdealGens(out, ring)


def _prune_generators(gens, ring):
    """Drop generators lying in the ideal of the earlier (lower) ones."""
    gens = sorted(gens, key=lambda g: (g.degree, grevlex_key(_lt(g)[0])))
    kept = []
    for g in gens:
        if kept:
            A = graded_piece(kept, ring, g.degree)
            idx = monomial_index(ring.nvars, g.degree)
            vec = [Fraction(0)] * len(monomials(ring.nvars, g.degree))
            for m, c in g.terms.items():
                vec[idx[m]] = c
            if A.nrows:
                stacked = Matrix(list(A.rows) + [vec], A.ncols)
                if stacked.rank() == A.nrows:
                    continue
        kept.append(g)
    return kept
