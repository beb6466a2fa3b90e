"""Dense exact matrices over Fraction or FieldElem entries.

Rational matrices are eliminated fraction-free (Bareiss) after clearing row
denominators; extension-field matrices fall back to ordinary exact Gaussian
elimination.  Kernel bases are deterministic under the fixed column order and
returned as content-free integer columns when rational.
"""

from fractions import Fraction
from math import gcd, lcm

from .fieldarith import FieldElem
from .polycore import Poly, monomials


class MatrixError(ValueError):
    pass


def _is_rational_entry(x):
    return isinstance(x, (int, Fraction)) or (isinstance(x, FieldElem) and x.tower is None)


def _as_fraction(x):
    if isinstance(x, FieldElem):
        return x.rational_value()
    return Fraction(x)


class Matrix:
    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows, ncols=None):
        self.rows = [list(r) for r in rows]
        self.nrows = len(self.rows)
        if self.nrows:
            self.ncols = len(self.rows[0])
            if any(len(r) != self.ncols for r in self.rows):
                raise MatrixError("ragged rows")
        else:
            self.ncols = 0 if ncols is None else ncols

    @staticmethod
    def identity(n):
        return Matrix([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])

    @staticmethod
    def zero(nrows, ncols):
        return Matrix([[Fraction(0)] * ncols for _ in range(nrows)], ncols)

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            return False
        return all(self.rows[i][j] == other.rows[i][j]
                   for i in range(self.nrows) for j in range(self.ncols))

    def transpose(self):
        return Matrix([[self.rows[i][j] for i in range(self.nrows)]
                       for j in range(self.ncols)], self.nrows)

    def mul(self, other):
        if self.ncols != other.nrows:
            raise MatrixError("dimension mismatch in product")
        out = []
        for i in range(self.nrows):
            row = []
            for j in range(other.ncols):
                s = 0
                for k in range(self.ncols):
                    a = self.rows[i][k]
                    if a:
                        s = s + a * other.rows[k][j]
            # keep exact zero as Fraction
                row.append(s if s else Fraction(0))
            out.append(row)
        return Matrix(out, other.ncols)

    def mulvec(self, vec):
        if self.ncols != len(vec):
            raise MatrixError("dimension mismatch in matrix-vector product")
        out = []
        for i in range(self.nrows):
            s = 0
            for k in range(self.ncols):
                a = self.rows[i][k]
                if a and vec[k]:
                    s = s + a * vec[k]
        # normalize zero
            out.append(s if s else Fraction(0))
        return out

    def is_rational(self):
        return all(_is_rational_entry(x) for row in self.rows for x in row)

    def __repr__(self):
        return "Matrix(" + "; ".join(
            " ".join(str(x) for x in row) for row in self.rows) + ")"

    def to_json(self):
        def enc(x):
            if isinstance(x, FieldElem) and not x.is_rational():
                return {"coords": [str(c) for c in x.coords]}
            return str(_as_fraction(x)) if _is_rational_entry(x) else str(x)
        return [[enc(x) for x in row] for row in self.rows]

    # -- elimination cores ---------------------------------------------------

    def _int_rows(self):
        out = []
        for row in self.rows:
            fr = [_as_fraction(x) for x in row]
            den = 1
            for x in fr:
                den = lcm(den, x.denominator)
            ints = [int(x * den) for x in fr]
            g = 0
            for v in ints:
                g = gcd(g, abs(v))
            if g > 1:
                ints = [v // g for v in ints]
            out.append(ints)
        return out

    def _echelon(self):
        """Returns (echelon rows over Fraction/FieldElem, pivot column list)."""
        if self.is_rational():
            rows = self._int_rows()
            piv_cols = []
            prev = 1
            r = 0
            for c in range(self.ncols):
                p = next((i for i in range(r, self.nrows) if rows[i][c]), None)
                if p is None:
                    continue
                rows[r], rows[p] = rows[p], rows[r]
                pivot = rows[r][c]
                for i in range(r + 1, self.nrows):
                    if not any(rows[i][c:]):
                        continue
                    ric = rows[i][c]
                    row_i = rows[i]
                    row_r = rows[r]
                    for j in range(c, self.ncols):
                        row_i[j] = (pivot * row_i[j] - ric * row_r[j]) // prev
                prev = pivot
                piv_cols.append(c)
                r += 1
                if r == self.nrows:
                    break
            ech = [[Fraction(v) for v in row] for row in rows[:r]]
            return ech, piv_cols
        # generic exact Gaussian elimination
        rows = [list(r) for r in self.rows]
        piv_cols = []
        r = 0
        for c in range(self.ncols):
            p = next((i for i in range(r, self.nrows) if rows[i][c]), None)
            if p is None:
                continue
            rows[r], rows[p] = rows[p], rows[r]
            inv = _inv(rows[r][c])
            rows[r] = [x * inv for x in rows[r]]
            for i in range(r + 1, self.nrows):
                f = rows[i][c]
                if f:
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            piv_cols.append(c)
            r += 1
            if r == self.nrows:
                break
        return rows[:r], piv_cols

    def rank(self):
        return len(self._echelon()[1])

    def kernel(self):
        """Columns form a deterministic basis of the right null space."""
        ech, piv = self._echelon()
        free = [c for c in range(self.ncols) if c not in piv]
        basis = []
        for fc in free:
            x = [Fraction(0)] * self.ncols
            x[fc] = Fraction(1)
            for r in range(len(piv) - 1, -1, -1):
                c = piv[r]
                s = sum((ech[r][j] * x[j] for j in range(c + 1, self.ncols) if x[j]), start=Fraction(0))
                x[c] = -s / ech[r][c] if not isinstance(s, FieldElem) else -s * _inv(ech[r][c])
            basis.append(_normalize_vec(x))
        return Matrix([[basis[k][i] for k in range(len(basis))]
                       for i in range(self.ncols)], len(basis))

    def solve(self, b):
        """A particular exact solution of M x = b with free variables zero,
        or None when inconsistent."""
        if len(b) != self.nrows:
            raise MatrixError("right-hand side length mismatch")
        aug = Matrix([list(row) + [bv] for row, bv in zip(self.rows, b)],
                     self.ncols + 1)
        ech, piv = aug._echelon()
        if self.ncols in piv:
            return None
        x = [Fraction(0)] * self.ncols
        for r in range(len(piv) - 1, -1, -1):
            c = piv[r]
            s = ech[r][self.ncols]
            for j in range(c + 1, self.ncols):
                if x[j]:
                    s = s - ech[r][j] * x[j]
            x[c] = s / ech[r][c] if not isinstance(s, FieldElem) or not isinstance(ech[r][c], FieldElem) else s * _inv(ech[r][c])
        return x

    def det(self):
        if self.nrows != self.ncols:
            raise MatrixError("determinant of a non square matrix")
        n = self.nrows
        if n == 0:
            return Fraction(1)
        rows = [list(r) for r in self.rows]
        sign = 1
        acc_den = None
        if self.is_rational():
            irows = self._int_rows()
            dens = []
            for row, irow in zip(self.rows, irows):
                fr = [_as_fraction(x) for x in row]
                d = 1
                for x in fr:
                    d = lcm(d, x.denominator)
                g = 0
                for v in [int(x * d) for x in fr]:
                    g = gcd(g, abs(v))
                dens.append(Fraction(max(g, 1), d))
            prev = 1
            for k in range(n - 1):
                p = next((i for i in range(k, n) if irows[i][k]), None)
                if p is None:
                    return Fraction(0)
                if p != k:
                    irows[k], irows[p] = irows[p], irows[k]
                    sign = -sign
                for i in range(k + 1, n):
                    for j in range(k + 1, n):
                        irows[i][j] = (irows[k][k] * irows[i][j]
                                       - irows[i][k] * irows[k][j]) // prev
                    irows[i][k] = 0
                prev = irows[k][k]
            out = Fraction(sign * irows[n - 1][n - 1])
            for s in dens:
                out *= s
            return out
        det = FieldElem.of(1) if isinstance(rows[0][0], FieldElem) else Fraction(1)
        for k in range(n):
            p = next((i for i in range(k, n) if rows[i][k]), None)
            if p is None:
                return Fraction(0)
            if p != k:
                rows[k], rows[p] = rows[p], rows[k]
                sign = -sign
            pivot = rows[k][k]
            det = det * pivot
            inv = _inv(pivot)
            for i in range(k + 1, n):
                f = rows[i][k]
                if f:
                    fr = f * inv
                    rows[i] = [a - fr * b for a, b in zip(rows[i], rows[k])]
        return det * sign

    def charpoly(self):
        """Characteristic polynomial det(t I - M), low-to-high coefficients,
        by Faddeev-LeVerrier (divisions by integers only)."""
        if self.nrows != self.ncols:
            raise MatrixError("charpoly of a non square matrix")
        n = self.nrows
        coeffs = [Fraction(1)]  # leading
        Mk = Matrix.identity(n)
        cs = []
        for k in range(1, n + 1):
            Mk = self.mul(Mk)
            tr = sum((Mk.rows[i][i] for i in range(n)), start=Fraction(0))
            ck = -tr * Fraction(1, k)
            cs.append(ck)
            if k < n:
                for i in range(n):
                    Mk.rows[i][i] = Mk.rows[i][i] + ck
        return [*(reversed(cs)), Fraction(1)] if n else [Fraction(1)]

    def minpoly(self):
        """Minimal polynomial, low-to-high, monic: incremental Krylov echelon
        detects the first dependency, one solve recovers the relation."""
        if self.nrows != self.ncols:
            raise MatrixError("minpoly of a non square matrix")
        n = self.nrows
        rational = self.is_rational()
        span_rows = []
        span_pivots = []
        flats = []
        P = Matrix.identity(n)
        while True:
            flat = [P.rows[i][j] for i in range(n) for j in range(n)]
            red = _span_reduce(span_rows, span_pivots, flat, rational)
            if red is None:
                k = len(flats)
                A = Matrix([[flats[j][i] for j in range(k)]
                            for i in range(n * n)], k)
                sol = A.solve(flat)
                coeffs = [-s for s in sol] + [Fraction(1)]
                return coeffs
            flats.append(flat)
            P = self.mul(P)

    def pfaffian(self):
        """Pfaffian of a skew-symmetric matrix by division-free expansion
        along the first row; generic over any commutative coefficient ring
        (entries may be polynomials)."""
        n = self.nrows
        if n != self.ncols:
            raise MatrixError("pfaffian of a non square matrix")
        for i in range(n):
            for j in range(i, n):
                a, b = self.rows[i][j], self.rows[j][i]
                bad = bool(a + b) if isinstance(a, Poly) or isinstance(b, Poly) else (a + b != 0)
                if bad:
                    raise MatrixError("matrix is not skew-symmetric")
        if n % 2 == 1:
            return Fraction(0)

        def rec(idx):
            if not idx:
                return Fraction(1)
            i0 = idx[0]
            rest = idx[1:]
            total = None
            for pos, j in enumerate(rest):
                a = self.rows[i0][j]
                if not a:
                    continue
                sub = rest[:pos] + rest[pos + 1:]
                term = a * rec(sub)
                if pos % 2 == 1:
                    term = -term
                total = term if total is None else total + term
            if total is None:
                return Fraction(0)
            return total

        return rec(tuple(range(n)))


def _inv(x):
    if isinstance(x, FieldElem):
        return x.inverse()
    return 1 / Fraction(x)


def _span_reduce(rows, pivots, vec, rational):
    """Reduce vec against the incremental echelon and insert it; returns the
    inserted row, or None when vec was dependent.  Rational data runs
    fraction-free on content-reduced integers."""
    if rational:
        den = 1
        for x in vec:
            den = lcm(den, _as_fraction(x).denominator)
        v = [int(_as_fraction(x) * den) for x in vec]
        g = 0
        for t in v:
            g = gcd(g, abs(t))
        if g > 1:
            v = [t // g for t in v]
        for row, p in zip(rows, pivots):
            if v[p]:
                rp, vp = row[p], v[p]
                v = [a * rp - b * vp for a, b in zip(v, row)]
                g = 0
                for t in v:
                    g = gcd(g, abs(t))
                if g > 1:
                    v = [t // g for t in v]
    else:
        v = list(vec)
        for row, p in zip(rows, pivots):
            if v[p]:
                s = v[p] * _inv(row[p])
                v = [a - s * b for a, b in zip(v, row)]
    p = next((i for i, x in enumerate(v) if x), None)
    if p is None:
        return None
    rows.append(v)
    pivots.append(p)
    return v


def _normalize_vec(x):
    """Content-free integer vector with positive leading sign when rational;
    monic-style leading-one normalization otherwise."""
    if all(_is_rational_entry(v) for v in x):
        fr = [_as_fraction(v) for v in x]
        den = 1
        for v in fr:
            den = lcm(den, v.denominator)
        ints = [int(v * den) for v in fr]
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        if g:
            ints = [v // g for v in ints]
        lead = next((v for v in ints if v), 0)
        if lead < 0:
            ints = [-v for v in ints]
        return [Fraction(v) for v in ints]
    lead = next((v for v in x if v), None)
    if lead is None:
        return list(x)
    inv = _inv(lead)
    return [v * inv for v in x]


def normalize_point(point):
    """Projective normalization: first nonzero coordinate scaled to 1."""
    idx = next((i for i, v in enumerate(point) if v), None)
    if idx is None:
        raise MatrixError("zero vector is not a projective point")
    v = point[idx]
    inv = _inv(v)
    return tuple(x * inv if x else (Fraction(0) if not isinstance(x, FieldElem) else x) for x in point)


def vandermonde(points, k, nvars=None):
    """Rows indexed by the points, columns by degree-k monomials in grevlex
    order: entries point^alpha after the fixed chart normalization."""
    if not points:
        raise MatrixError("empty point list")
    n = len(points[0]) if nvars is None else nvars
    mons = monomials(n, k)
    rows = []
    for p in points:
        if len(p) != n:
            raise MatrixError("inconsistent point length")
        p = normalize_point(p)
        row = []
        for m in mons:
            v = Fraction(1)
            for x, e in zip(p, m):
                for _ in range(e):
                    v = v * x
            row.append(v)
        rows.append(row)
    return Matrix(rows, len(mons))


def pfaffian_matchings(m):
    """Independent Pfaffian oracle: sum over perfect matchings.

    pf(A) = sum over perfect matchings M of sign(M) prod_{(i<j) in M} A[i][j].
    """
    n = m.nrows
    if n % 2 == 1:
        return Fraction(0)

    def rec(avail):
        if not avail:
            return Fraction(1), True
        i = avail[0]
        rest = avail[1:]
        total = None
        for pos, j in enumerate(rest):
            a = m.rows[i][j]
            sub = rest[:pos] + rest[pos + 1:]
            val, _ = rec(sub)
            term = a * val
            if pos % 2 == 1:
                term = -term
            total = term if total is None else total + term
        return (total if total is not None else Fraction(0)), True

    return rec(tuple(range(n)))[0]
