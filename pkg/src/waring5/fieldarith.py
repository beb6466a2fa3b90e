"""Exact scalars: big rationals, simple algebraic extensions Q[a]/(m(a)), and
certified complex interval boxes with rational endpoints.

Rationals are `fractions.Fraction`.  An extension element is a coordinate
vector in the power basis of the generator.  All values are immutable.
"""

from fractions import Fraction
from math import isqrt

import sympy

Rational = Fraction

_Y = sympy.Symbol("_w5_t")


class FieldError(ValueError):
    pass


# ---------------------------------------------------------------------------
# dense univariate polynomials over a field, coefficients low -> high
# ---------------------------------------------------------------------------

def utrim(c):
    c = list(c)
    while c and not c[-1]:
        c.pop()
    return c


def udeg(c):
    return len(c) - 1


def uadd(p, q):
    n = max(len(p), len(q))
    out = []
    for i in range(n):
        a = p[i] if i < len(p) else 0
        b = q[i] if i < len(q) else 0
        out.append(a + b)
    return utrim(out)


def usub(p, q):
    n = max(len(p), len(q))
    out = []
    for i in range(n):
        a = p[i] if i < len(p) else 0
        b = q[i] if i < len(q) else 0
        out.append(a - b)
    return utrim(out)


def uscale(p, s):
    if not s:
        return []
    return [c * s for c in p]


def umul(p, q):
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            if b:
                out[i + j] = out[i + j] + a * b
    return utrim(out)


def udivmod(p, q):
    """Quotient and remainder over a field; q must be nonzero."""
    if not q:
        raise ZeroDivisionError("division by zero polynomial")
    r = list(p)
    qd = len(q) - 1
    lead = q[-1]
    quo = [0] * max(0, len(p) - qd)
    while len(r) - 1 >= qd and utrim(r):
        r = utrim(r)
        if len(r) - 1 < qd:
            break
        s = r[-1] / lead
        k = len(r) - 1 - qd
        quo[k] = s
        for i, b in enumerate(q):
            r[k + i] = r[k + i] - s * b
        r.pop()
    return utrim(quo), utrim(r)


def umonic(p):
    p = utrim(p)
    if not p:
        return []
    lc = p[-1]
    if lc == 1:
        return list(p)
    return [c / lc for c in p]


def ugcd(p, q):
    """Monic gcd over a field; ugcd(p, 0) = monic(p)."""
    a, b = utrim(p), utrim(q)
    while b:
        a, b = b, udivmod(a, b)[1]
    return umonic(a)


def uderiv(p):
    return utrim([i * c for i, c in enumerate(p)][1:])


def usqfree_part(p):
    g = ugcd(p, uderiv(p))
    if udeg(g) <= 0:
        return umonic(p)
    return umonic(udivmod(p, g)[0])


def ueval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def u_to_sympy(coeffs):
    return sympy.Poly([sympy.Rational(c) for c in reversed(coeffs)], _Y)


def u_from_sympy(poly):
    return utrim([Fraction(c.p, c.q) for c in reversed(poly.all_coeffs())])


def uirreducible_q(coeffs):
    """Irreducibility over Q.  Degree 0 polynomials are not irreducible."""
    c = utrim(coeffs)
    if udeg(c) < 1:
        return False
    if udeg(c) == 1:
        return True
    _, factors = u_to_sympy(c).factor_list()
    return len(factors) == 1 and factors[0][1] == 1


def ufactor_q(coeffs):
    """Factor over Q: returns (content, [(factor_coeffs, multiplicity)])."""
    content, factors = u_to_sympy(coeffs).factor_list()
    out = [(u_from_sympy(f), m) for f, m in factors]
    return Fraction(content.p, content.q), out


def urational_roots(coeffs):
    """All rational roots (with multiplicity collapsed to distinct values)."""
    roots = []
    for fac, _ in ufactor_q(coeffs)[1]:
        if udeg(fac) == 1:
            roots.append(-fac[0] / fac[1])
    roots.sort()
    return roots


# ---------------------------------------------------------------------------
# extension fields
# ---------------------------------------------------------------------------

class ExtField:
    """Q[a]/(m(a)) for a monic irreducible m; irreducibility checked here."""

    __slots__ = ("minpoly", "label", "_red")

    def __init__(self, minpoly, label="a", degree_bound=8):
        m = [Fraction(c) for c in utrim(minpoly)]
        if not m or m[-1] != 1:
            raise FieldError("minimal polynomial must be monic")
        if udeg(m) < 1:
            raise FieldError("minimal polynomial must have degree >= 1")
        if udeg(m) > degree_bound:
            raise FieldError(
                f"extension degree {udeg(m)} exceeds bound {degree_bound}")
        if not uirreducible_q(m):
            raise FieldError("minimal polynomial is not irreducible over Q")
        self.minpoly = tuple(m)
        self.label = label
        # power-basis reduction table for a^k, k = deg .. 2*deg-2
        d = udeg(m)
        red = []
        cur = [-c for c in m[:-1]]  # a^d
        red.append(list(cur))
        for _ in range(d - 2):
            cur = [0] + cur
            if len(cur) > d:
                hi = cur.pop()
                cur = [ci + hi * ri for ci, ri in zip(cur, red[0])]
            red.append(list(cur))
        self._red = [tuple(r) for r in red]

    @property
    def degree(self):
        return udeg(list(self.minpoly))

    def __eq__(self, other):
        return (isinstance(other, ExtField)
                and self.minpoly == other.minpoly and self.label == other.label)

    def __hash__(self):
        return hash((self.minpoly, self.label))

    def __repr__(self):
        return f"ExtField({self.label}; {upoly_str(self.minpoly, self.label)})"

    def gen(self):
        if self.degree == 1:
            return FieldElem(self, (-self.minpoly[0],))
        coords = [Fraction(0)] * self.degree
        coords[1] = Fraction(1)
        return FieldElem(self, tuple(coords))


def upoly_str(coeffs, var="t"):
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if not c:
            continue
        if i == 0:
            parts.append(str(c))
        else:
            head = "" if c == 1 else ("-" if c == -1 else f"{c}*")
            parts.append(f"{head}{var}" + (f"^{i}" if i > 1 else ""))
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


class FieldElem:
    """Element of Q or of a simple extension, in the generator power basis."""

    __slots__ = ("tower", "coords")

    def __init__(self, tower, coords):
        self.tower = tower
        self.coords = tuple(coords)

    @staticmethod
    def of(value, tower=None):
        if isinstance(value, FieldElem):
            if tower is None or value.tower == tower:
                return value
            if value.tower is None:
                return FieldElem.of(value.coords[0], tower)
            raise FieldError("tower mismatch")
        q = Fraction(value)
        if tower is None:
            return FieldElem(None, (q,))
        coords = [Fraction(0)] * tower.degree
        coords[0] = q
        return FieldElem(tower, tuple(coords))

    # -- helpers -----------------------------------------------------------

    def _pair(self, other):
        if isinstance(other, FieldElem):
            if self.tower == other.tower:
                return self, other
            if self.tower is None:
                return FieldElem.of(self.coords[0], other.tower), other
            if other.tower is None:
                return self, FieldElem.of(other.coords[0], self.tower)
            raise FieldError("tower mismatch")
        if isinstance(other, (int, Fraction)):
            return self, FieldElem.of(other, self.tower)
        return self, NotImplemented

    def is_zero(self):
        return all(not c for c in self.coords)

    def is_rational(self):
        return self.tower is None or all(not c for c in self.coords[1:])

    def rational_value(self):
        if not self.is_rational():
            raise FieldError("element is not rational")
        return self.coords[0]

    def __bool__(self):
        return not self.is_zero()

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        a, b = self._pair(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElem(a.tower, tuple(x + y for x, y in zip(a.coords, b.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.tower, tuple(-x for x in self.coords))

    def __sub__(self, other):
        a, b = self._pair(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElem(a.tower, tuple(x - y for x, y in zip(a.coords, b.coords)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        a, b = self._pair(other)
        if b is NotImplemented:
            return NotImplemented
        if a.tower is None:
            return FieldElem(None, (a.coords[0] * b.coords[0],))
        d = a.tower.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, x in enumerate(a.coords):
            if not x:
                continue
            for j, y in enumerate(b.coords):
                if y:
                    prod[i + j] += x * y
        out = list(prod[:d])
        red = a.tower._red
        for k in range(d, 2 * d - 1):
            hi = prod[k]
            if hi:
                row = red[k - d]
                for i in range(len(row)):
                    if row[i]:
                        out[i] += hi * row[i]
        return FieldElem(a.tower, tuple(out))

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("field element division by zero")
        if self.tower is None:
            return FieldElem(None, (1 / self.coords[0],))
        # extended Euclid: s*self + t*minpoly = 1 in Q[a]
        a = utrim(list(self.coords))
        m = list(self.tower.minpoly)
        r0, r1 = m, a
        s0, s1 = [], [Fraction(1)]
        while udeg(r1) > 0:
            q, r = udivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, usub(s0, umul(q, s1))
        if not r1:
            raise FieldError("non invertible element (minpoly not irreducible?)")
        inv = uscale(s1, 1 / r1[0])
        coords = [Fraction(0)] * self.tower.degree
        for i, c in enumerate(inv):
            coords[i] = c
        return FieldElem(self.tower, tuple(coords))

    def __truediv__(self, other):
        a, b = self._pair(other)
        if b is NotImplemented:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = FieldElem.of(1, self.tower)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = FieldElem.of(other, self.tower)
        if not isinstance(other, FieldElem):
            return NotImplemented
        a, b = self._pair(other)
        return a.coords == b.coords

    def __hash__(self):
        if self.is_rational():
            return hash(self.coords[0])
        return hash((self.tower, self.coords))

    def __repr__(self):
        if self.tower is None:
            return str(self.coords[0])
        return upoly_str(self.coords, self.tower.label)


def field_add(a, b):
    return FieldElem.of(a) + b if not isinstance(a, FieldElem) else a + b


def field_sub(a, b):
    return FieldElem.of(a) - b if not isinstance(a, FieldElem) else a - b


def field_mul(a, b):
    return FieldElem.of(a) * b if not isinstance(a, FieldElem) else a * b


def field_div(a, b):
    if not isinstance(a, FieldElem):
        a = FieldElem.of(a)
    return a / b


# ---------------------------------------------------------------------------
# complex boxes
# ---------------------------------------------------------------------------

def _sqrt_bounds(q, scale_bits=64):
    """Rational lower/upper bounds for sqrt(q), q >= 0."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("sqrt of negative rational")
    if q == 0:
        return Fraction(0), Fraction(0)
    s = 1 << scale_bits
    n = q.numerator * q.denominator * s * s
    r = isqrt(n)
    den = q.denominator * s
    lo = Fraction(r, den)
    hi = Fraction(r + 1, den)
    return lo, hi


class ComplexBox:
    """Axis-aligned rectangle with exact rational corners."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=(0, 0)):
        self.re = (Fraction(re[0]), Fraction(re[1]))
        self.im = (Fraction(im[0]), Fraction(im[1]))
        if self.re[0] > self.re[1] or self.im[0] > self.im[1]:
            raise ValueError("malformed box")

    @staticmethod
    def point(re, im=0):
        re = Fraction(re)
        im = Fraction(im)
        return ComplexBox((re, re), (im, im))

    def width(self):
        return max(self.re[1] - self.re[0], self.im[1] - self.im[0])

    def mid(self):
        return ((self.re[0] + self.re[1]) / 2, (self.im[0] + self.im[1]) / 2)

    def is_point(self):
        return self.re[0] == self.re[1] and self.im[0] == self.im[1]

    def contains_zero(self):
        return (self.re[0] <= 0 <= self.re[1]) and (self.im[0] <= 0 <= self.im[1])

    def contains(self, other):
        return (self.re[0] <= other.re[0] and other.re[1] <= self.re[1]
                and self.im[0] <= other.im[0] and other.im[1] <= self.im[1])

    def overlaps(self, other):
        return not (self.re[1] < other.re[0] or other.re[1] < self.re[0]
                    or self.im[1] < other.im[0] or other.im[1] < self.im[0])

    def __add__(self, other):
        other = _as_box(other)
        return ComplexBox((self.re[0] + other.re[0], self.re[1] + other.re[1]),
                          (self.im[0] + other.im[0], self.im[1] + other.im[1]))

    __radd__ = __add__

    def __neg__(self):
        return ComplexBox((-self.re[1], -self.re[0]), (-self.im[1], -self.im[0]))

    def __sub__(self, other):
        return self + (-_as_box(other))

    def __rsub__(self, other):
        return _as_box(other) + (-self)

    def __mul__(self, other):
        other = _as_box(other)
        a1, a2 = self.re
        b1, b2 = self.im
        c1, c2 = other.re
        d1, d2 = other.im
        ac = [a1 * c1, a1 * c2, a2 * c1, a2 * c2]
        bd = [b1 * d1, b1 * d2, b2 * d1, b2 * d2]
        ad = [a1 * d1, a1 * d2, a2 * d1, a2 * d2]
        bc = [b1 * c1, b1 * c2, b2 * c1, b2 * c2]
        re_lo = min(ac) - max(bd)
        re_hi = max(ac) - min(bd)
        im_lo = min(ad) + min(bc)
        im_hi = max(ad) + max(bc)
        return ComplexBox((re_lo, re_hi), (im_lo, im_hi))

    __rmul__ = __mul__

    def abs_upper(self):
        m = max(abs(self.re[0]), abs(self.re[1]))
        n = max(abs(self.im[0]), abs(self.im[1]))
        return _sqrt_bounds(m * m + n * n)[1]

    def abs_lower(self):
        if self.contains_zero():
            return Fraction(0)
        m = min(abs(self.re[0]), abs(self.re[1])) if not (self.re[0] <= 0 <= self.re[1]) else Fraction(0)
        n = min(abs(self.im[0]), abs(self.im[1])) if not (self.im[0] <= 0 <= self.im[1]) else Fraction(0)
        return _sqrt_bounds(m * m + n * n)[0]

    def rounded(self, bits=256):
        """Outward rounding to the 2^-bits grid; keeps denominators small
        while preserving containment."""
        s = 1 << bits

        def lo(x):
            return Fraction((x.numerator * s) // x.denominator, s)

        def hi(x):
            return Fraction(-((-x.numerator * s) // x.denominator), s)

        return ComplexBox((lo(self.re[0]), hi(self.re[1])),
                          (lo(self.im[0]), hi(self.im[1])))

    def __repr__(self):
        rm, im = self.mid()
        return f"Box({float(rm):.6g}{float(im):+.6g}j; w={float(self.width()):.2g})"

    def to_json(self):
        return {"re": [str(self.re[0]), str(self.re[1])],
                "im": [str(self.im[0]), str(self.im[1])]}


def _as_box(x):
    if isinstance(x, ComplexBox):
        return x
    if isinstance(x, FieldElem):
        if x.is_rational():
            return ComplexBox.point(x.rational_value())
        raise FieldError("cannot coerce non rational FieldElem to box without embedding")
    return ComplexBox.point(Fraction(x))


def box_eval_upoly(coeffs, box):
    """Interval Horner evaluation of a rational-coefficient polynomial."""
    acc = ComplexBox.point(0)
    for c in reversed(coeffs):
        acc = acc * box + _as_box(c)
    return acc


# ---------------------------------------------------------------------------
# root isolation and numeric embedding
# ---------------------------------------------------------------------------

def isolate_roots(coeffs, precision=53):
    """Isolating boxes for all distinct complex roots of a rational polynomial.

    Returns a list of (ComplexBox, multiplicity), ordered by (re, im) of the
    box midpoints.  Boxes are pairwise disjoint, each containing exactly one
    distinct root; multiplicities come from square-free factorization and sum
    to deg(p).
    """
    c = utrim([Fraction(x) for x in coeffs])
    if not c:
        raise ValueError("cannot isolate roots of the zero polynomial")
    if udeg(c) == 0:
        return []
    eps = sympy.Rational(1, 1 << precision)
    out = []
    for fac, mult in ufactor_q(c)[1]:
        poly = u_to_sympy(fac)
        real_iv, cplx_iv = poly.intervals(all=True, eps=eps, sqf=True)
        for lo, hi in real_iv:
            box = ComplexBox((Fraction(lo.p, lo.q), Fraction(hi.p, hi.q)))
            out.append((box, mult))
        for c1, c2 in cplx_iv:
            re1, im1 = c1.as_real_imag()
            re2, im2 = c2.as_real_imag()
            box = ComplexBox((Fraction(re1.p, re1.q), Fraction(re2.p, re2.q)),
                             (Fraction(im1.p, im1.q), Fraction(im2.p, im2.q)))
            out.append((box, mult))
    out.sort(key=lambda bm: bm[0].mid())
    return out


def embed_numeric(x, root_choice=0, precision=53):
    """Certified box containing x under the chosen embedding of its tower.

    Roots of the minimal polynomial are ordered deterministically by
    (real, imaginary) parts of box midpoints at a 64-bit reference isolation.
    """
    x = x if isinstance(x, FieldElem) else FieldElem.of(x)
    if x.tower is None:
        return ComplexBox.point(x.coords[0])
    m = list(x.tower.minpoly)
    nroots = udeg(m)
    if not 0 <= root_choice < nroots:
        raise FieldError(f"root_choice {root_choice} out of range for degree {nroots}")
    target = Fraction(1, 1 << precision)
    prec = max(64, precision)
    while True:
        boxes = isolate_roots(m, precision=prec)
        root = boxes[root_choice][0]
        val = box_eval_upoly(list(x.coords), root)
        if val.width() <= target:
            return val
        prec *= 2
