"""Sparse multivariate homogeneous polynomials and the apolar differential
action.

Terms are stored as {exponent tuple: coefficient}; coefficients are Fraction
or FieldElem.  Monomial order everywhere is graded reverse lexicographic with
x0 > x1 > ... (deterministic kernels and reproducible output depend on it).
Dual polynomials (differential operators) reuse the same representation; the
action of a dual monomial y^a is plain partial differentiation d^a.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .fieldarith import (ComplexBox, FieldElem, udeg, uderiv, ugcd, umonic,
                         utrim)


class PolyError(ValueError):
    pass


def grevlex_key(e):
    """Sort key: m1 > m2 in grevlex iff key(m1) > key(m2)."""
    return (sum(e), tuple(-x for x in reversed(e)))


@lru_cache(maxsize=None)
def monomials(nvars, degree):
    """All exponent tuples of the given total degree, grevlex-descending."""
    out = []

    def rec(prefix, left, pos):
        if pos == nvars - 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, pos + 1)

    if nvars == 0:
        return ()
    rec((), degree, 0)
    out.sort(key=grevlex_key, reverse=True)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(nvars, degree):
    return {m: i for i, m in enumerate(monomials(nvars, degree))}


class Ring:
    """Variable context: names fix the count and print order."""

    __slots__ = ("names",)

    def __init__(self, names):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise PolyError("duplicate variable names")

    @staticmethod
    def standard(n, prefix="x"):
        return Ring(tuple(f"{prefix}{i}" for i in range(n)))

    @property
    def nvars(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, Ring) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Ring({','.join(self.names)})"

    def dual(self, prefix="y"):
        return Ring(tuple(f"{prefix}{i}" for i in range(self.nvars)))


class Poly:
    """Homogeneous polynomial; zero polynomial keeps a declared degree."""

    __slots__ = ("ring", "degree", "terms")

    def __init__(self, ring, degree, terms):
        self.ring = ring
        self.degree = degree
        self.terms = terms  # dict, nonzero coefficients only

    @staticmethod
    def zero(ring, degree):
        return Poly(ring, degree, {})

    @staticmethod
    def from_terms(ring, items, degree=None):
        terms = {}
        deg = degree
        for exp, coef in items:
            exp = tuple(exp)
            if len(exp) != ring.nvars:
                raise PolyError("exponent length does not match ring")
            d = sum(exp)
            if deg is None:
                deg = d
            elif d != deg:
                raise PolyError(
                    f"inhomogeneous terms: degrees {sorted({deg, d})}")
            c = terms.get(exp, 0) + coef
            if c:
                terms[exp] = c
            elif exp in terms:
                del terms[exp]
        if deg is None:
            raise PolyError("degree required for the zero polynomial")
        return Poly(ring, deg, terms)

    @staticmethod
    def monomial(ring, exp, coef=Fraction(1)):
        return Poly.from_terms(ring, [(exp, Fraction(coef) if not isinstance(coef, FieldElem) else coef)])

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return (self.ring == other.ring and self.terms == other.terms
                and (self.terms or self.degree == other.degree))

    def __hash__(self):
        return hash((self.ring, self.degree, tuple(sorted(self.terms.items(), key=lambda t: grevlex_key(t[0])))))

    def __add__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if self.ring != other.ring:
            raise PolyError("ring mismatch")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise PolyError("sum of different degrees is inhomogeneous")
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = terms.get(m, 0) + c
            if v:
                terms[m] = v
            elif m in terms:
                del terms[m]
        return Poly(self.ring, self.degree, terms)

    def __neg__(self):
        return Poly(self.ring, self.degree, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.ring != other.ring:
                raise PolyError("ring mismatch")
            terms = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    m = tuple(a + b for a, b in zip(m1, m2))
                    v = terms.get(m, 0) + c1 * c2
                    if v:
                        terms[m] = v
                    elif m in terms:
                        del terms[m]
            return Poly(self.ring, self.degree + other.degree, terms)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, s):
        if not s:
            return Poly.zero(self.ring, self.degree)
        return Poly(self.ring, self.degree, {m: c * s for m, c in self.terms.items()})

    def coeff(self, exp):
        return self.terms.get(tuple(exp), Fraction(0))

    def coeff_vector(self):
        """Coefficients in the grevlex-descending monomial basis of S_d."""
        mons = monomials(self.ring.nvars, self.degree)
        return [self.terms.get(m, Fraction(0)) for m in mons]

    def leading(self):
        if not self.terms:
            return None
        m = max(self.terms, key=grevlex_key)
        return m, self.terms[m]

    def monic(self):
        lead = self.leading()
        if lead is None:
            return self
        return self.scale(1 / lead[1] if not isinstance(lead[1], FieldElem) else lead[1].inverse())

    def support_vars(self):
        used = [False] * self.ring.nvars
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used[i] = True
        return [i for i, u in enumerate(used) if u]

    def tower(self):
        for c in self.terms.values():
            if isinstance(c, FieldElem) and c.tower is not None:
                return c.tower
        return None

    def map_coeffs(self, fn):
        terms = {}
        for m, c in self.terms.items():
            v = fn(c)
            if v:
                terms[m] = v
        return Poly(self.ring, self.degree, terms)

    def __repr__(self):
        return poly_str(self)

    def to_json(self):
        items = sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)
        return {
            "vars": list(self.ring.names),
            "degree": self.degree,
            "terms": [{"exp": list(m), "coef": _coef_json(c)} for m, c in items],
        }


DualPoly = Poly  # dual polynomials share the representation


def _coef_json(c):
    if isinstance(c, FieldElem):
        if c.is_rational():
            return str(c.rational_value())
        return {"coords": [str(q) for q in c.coords],
                "minpoly": [str(q) for q in c.tower.minpoly],
                "label": c.tower.label}
    return str(c)


def poly_str(p):
    if p.is_zero():
        return "0"
    parts = []
    for m in sorted(p.terms, key=grevlex_key, reverse=True):
        c = p.terms[m]
        mono = "*".join(
            f"{p.ring.names[i]}^{e}" if e > 1 else p.ring.names[i]
            for i, e in enumerate(m) if e)
        cs = str(c)
        neg = cs.startswith("-") and "+" not in cs[1:] and "-" not in cs[1:]
        if isinstance(c, FieldElem) and not c.is_rational():
            cs, neg = f"({c})", False
        if not mono:
            text = cs
        elif cs == "1":
            text = mono
        elif cs == "-1":
            text = f"-{mono}"
        else:
            text = f"{cs}*{mono}"
        if parts and not text.startswith("-"):
            parts.append("+ " + text)
        elif parts:
            parts.append("- " + text[1:])
        else:
            parts.append(text)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class _Parser:
    """Recursive descent for sums of products of powers; exact rationals."""

    def __init__(self, text, ring):
        self.text = text
        self.pos = 0
        self.ring = ring
        self.index = {name: i for i, name in enumerate(ring.names)}

    def error(self, msg):
        raise PolyError(f"parse error at position {self.pos}: {msg}")

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self):
        ch = self.peek()
        sign = 1
        while ch in "+-":
            if ch == "-":
                sign = -sign
            self.pos += 1
            ch = self.peek()
        acc = self.term()
        if sign < 0:
            acc = {m: -c for m, c in acc.items()}
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                t = self.term()
                _acc_add(acc, t, 1)
            elif ch == "-":
                self.pos += 1
                t = self.term()
                _acc_add(acc, t, -1)
            else:
                return acc

    def term(self):
        acc = self.factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                acc = _acc_mul(acc, self.factor(), self.ring.nvars)
            elif ch == "(" or ch.isalpha() or ch == "_":
                acc = _acc_mul(acc, self.factor(), self.ring.nvars)
            else:
                return acc

    def factor(self):
        base = self.atom()
        ch = self.peek()
        if ch == "^":
            self.pos += 1
            n = self.integer()
            out = {(0,) * self.ring.nvars: Fraction(1)}
            for _ in range(n):
                out = _acc_mul(out, base, self.ring.nvars)
            return out
        return base

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return inner
        if ch.isdigit():
            num = self.integer()
            if self.peek() == "/":
                self.pos += 1
                den = self.integer()
                if den == 0:
                    self.error("zero denominator")
                return {(0,) * self.ring.nvars: Fraction(num, den)}
            return {(0,) * self.ring.nvars: Fraction(num)}
        if ch.isalpha() or ch == "_":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name not in self.index:
                self.pos = start
                self.error(f"unknown variable '{name}'")
            exp = [0] * self.ring.nvars
            exp[self.index[name]] = 1
            return {tuple(exp): Fraction(1)}
        if ch == "-":
            self.pos += 1
            inner = self.atom()
            return {m: -c for m, c in inner.items()}
        self.error("expected a term")

    def integer(self):
        ch = self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            self.error("expected an integer")
        return int(self.text[start:self.pos])


def _acc_add(acc, other, sign):
    for m, c in other.items():
        v = acc.get(m, 0) + sign * c
        if v:
            acc[m] = v
        elif m in acc:
            del acc[m]


def _acc_mul(a, b, nvars):
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            elif m in out:
                del out[m]
    return out


def parse_poly(text, ring_or_names):
    """Parse a homogeneous polynomial; rejects inhomogeneous input."""
    ring = ring_or_names if isinstance(ring_or_names, Ring) else Ring(tuple(ring_or_names))
    parser = _Parser(text, ring)
    acc = parser.expr()
    if parser.peek() != "":
        parser.error("trailing input")
    if not acc:
        raise PolyError("zero polynomial has no degree; supply a nonzero input")
    degs = sorted({sum(m) for m in acc})
    if len(degs) > 1:
        raise PolyError(f"inhomogeneous input: term degrees {degs}")
    return Poly(ring, degs[0], acc)


# ---------------------------------------------------------------------------
# the apolar action and friends
# ---------------------------------------------------------------------------

def apolar_apply(g, f):
    """g acting on f by plain partial differentiation, g(d0,...,dn) . f."""
    if g.ring.nvars != f.ring.nvars:
        raise PolyError("variable count mismatch in apolar action")
    if g.degree > f.degree:
        return Poly.zero(f.ring, 0)
    out = {}
    for beta, cg in g.terms.items():
        for alpha, cf in f.terms.items():
            scale = 1
            target = []
            ok = True
            for a, b in zip(alpha, beta):
                if b > a:
                    ok = False
                    break
                target.append(a - b)
                # falling factorial a (a-1) ... (a-b+1)
                for k in range(b):
                    scale *= (a - k)
            if not ok:
                continue
            m = tuple(target)
            v = out.get(m, 0) + cg * cf * scale
            if v:
                out[m] = v
            elif m in out:
                del out[m]
    return Poly(f.ring, f.degree - g.degree, out)


def linear_form(ring, coeffs):
    items = []
    for i, c in enumerate(coeffs):
        if c:
            exp = [0] * ring.nvars
            exp[i] = 1
            items.append((tuple(exp), c if isinstance(c, FieldElem) else Fraction(c)))
    return Poly.from_terms(ring, items, degree=1)


def linform_power(ring, coeffs, d):
    """Exact expansion of (c0 x0 + ... + cn xn)^d by multinomial walk."""
    n = ring.nvars
    coeffs = [c if isinstance(c, FieldElem) else Fraction(c) for c in coeffs]
    terms = {}

    def rec(pos, left, exp, partial):
        if pos == n - 1:
            c = partial * coeffs[-1] ** left if left else partial
            if c:
                terms[tuple(exp + [left])] = c * _multinomial(d, exp + [left])
            return
        ci = coeffs[pos]
        if not ci:
            rec(pos + 1, left, exp + [0], partial)
            return
        p = partial
        for e in range(left + 1):
            rec(pos + 1, left - e, exp + [e], p)
            p = p * ci
        # p now partial * ci^(left+1), discarded

    rec(0, d, [], Fraction(1) if not isinstance(coeffs[0], FieldElem) else FieldElem.of(1, coeffs[0].tower))
    return Poly(ring, d, {m: c for m, c in terms.items() if c})


def _multinomial(d, exps):
    out = factorial(d)
    for e in exps:
        out //= factorial(e)
    return out


def substitute_linear(f, matrix, target_ring):
    """Exact f(M Y) for the substitution x_i <- sum_j M[i][j] Y_j.

    Computed by iterated directional differentiation: the Y^b coefficient of
    the result is (1/b!) (prod_j (col_j . grad)^(b_j) f)(0), which keeps the
    work proportional to the shrinking derivative polynomials.
    """
    nsrc = f.ring.nvars
    ntgt = target_ring.nvars
    if len(matrix) != nsrc or any(len(row) != ntgt for row in matrix):
        raise PolyError("substitution matrix has wrong shape")
    d = f.degree
    if f.is_zero():
        return Poly.zero(target_ring, d)
    cols = [[matrix[i][j] for i in range(nsrc)] for j in range(ntgt)]

    def direct(col, p):
        out = {}
        for m, c in p.items():
            for i, ci in enumerate(col):
                if not ci or not m[i]:
                    continue
                mm = list(m)
                e = mm[i]
                mm[i] = e - 1
                mm = tuple(mm)
                v = out.get(mm, 0) + c * ci * e
                if v:
                    out[mm] = v
                elif mm in out:
                    del out[mm]
        return out

    level = {(0,) * ntgt: dict(f.terms)}
    for _step in range(d):
        nxt = {}
        for beta, poly in level.items():
            if not poly:
                continue
            start = next((j for j in range(ntgt - 1, -1, -1) if beta[j]), -1)
            lo = start if start >= 0 else 0
            for j in range(lo, ntgt):
                bb = list(beta)
                bb[j] += 1
                bb = tuple(bb)
                if bb in nxt:
                    continue
                nxt[bb] = direct(cols[j], poly)
        level = nxt
    zero_src = (0,) * nsrc
    out = {}
    for beta, poly in level.items():
        c = poly.get(zero_src, 0)
        if c:
            fact = 1
            for e in beta:
                fact *= factorial(e)
            out[beta] = c * Fraction(1, fact)
    return Poly(target_ring, d, {m: c for m, c in out.items() if c})


def eval_poly(f, point):
    """Exact or interval value of f at the point."""
    if len(point) != f.ring.nvars:
        raise PolyError("point length does not match variable count")
    boxed = any(isinstance(x, ComplexBox) for x in point)
    if boxed:
        point = [x if isinstance(x, ComplexBox) else ComplexBox.point(x if not isinstance(x, FieldElem) else x.rational_value()) for x in point]
        acc = ComplexBox.point(0)
    else:
        acc = Fraction(0)
    for m, c in f.terms.items():
        v = c if not boxed else ComplexBox.point(c) if not isinstance(c, (ComplexBox, FieldElem)) else (c if isinstance(c, ComplexBox) else ComplexBox.point(c.rational_value()))
        for x, e in zip(point, m):
            for _ in range(e):
                v = v * x
        acc = acc + v
    return acc


def dehomogenize_binary(p, var_keep=0):
    """Binary form -> dense univariate coefficients (low to high) in the
    chart where the other variable is 1."""
    if p.ring.nvars != 2:
        raise PolyError("expected a binary form")
    coeffs = [0] * (p.degree + 1)
    for (e0, e1), c in p.terms.items():
        coeffs[e0 if var_keep == 0 else e1] = c
    return utrim(coeffs)


def poly_gcd_univariate(p, q):
    """Monic gcd of two univariate polynomials given as Poly in one shared
    variable; gcd(p, 0) = monic(p)."""
    ring = p.ring
    if q.ring != ring:
        raise PolyError("ring mismatch")
    sup = set(p.support_vars()) | set(q.support_vars())
    if len(sup) > 1:
        raise PolyError("inputs are not univariate in a common variable")
    var = sup.pop() if sup else 0

    def to_dense(f):
        out = [0] * (f.degree + 1)
        for m, c in f.terms.items():
            out[m[var]] = c
        return utrim(out)

    g = ugcd(to_dense(p), to_dense(q)) if q else umonic(to_dense(p))
    if not g:
        return Poly.zero(ring, 0)
    items = []
    for e, c in enumerate(g):
        if c:
            exp = [0] * ring.nvars
            exp[var] = e
            items.append((tuple(exp), c))
    return Poly.from_terms(ring, items, degree=len(g) - 1)


def binary_squarefree(p):
    """Square-freeness of a binary form, including the root at infinity."""
    if p.is_zero():
        return False
    e1_vals = [m[1] for m in p.terms]
    if min(e1_vals) >= 2:
        return False  # x1^2 divides p, double root at (1:0)
    dense = dehomogenize_binary(p, var_keep=0)
    g = ugcd(dense, uderiv(dense))
    return udeg(g) <= 0
