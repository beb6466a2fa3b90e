"""Catalecticant matrices, apolar ideal graded pieces, Hilbert sequences,
differential length, and reduction to essential variables.

Convention: the production catalecticant uses the plain-derivative action
(y^a acts as d^a), so entries carry explicit multinomial factors relative to
the divided-power entries (c_{a+b}); both builders are exposed and their
kernels agree under the invertible diagonal rescaling diag(a!).
"""

from fractions import Fraction
from math import factorial

from .fieldarith import FieldElem
from .linalg import Matrix
from .polycore import Poly, PolyError, Ring, monomials, monomial_index, substitute_linear


def catalecticant(f, i, scaled=True):
    """Matrix of cat_i(f): T_i -> S_{d-i} in grevlex monomial bases.

    scaled=True is the plain-derivative convention used everywhere in the
    engine; scaled=False gives the divided-power entries (c_{a+b}).
    """
    d = f.degree
    if not 0 <= i <= d:
        raise PolyError(f"catalecticant index {i} out of range 0..{d}")
    n = f.ring.nvars
    cols = monomials(n, i)
    row_index = monomial_index(n, d - i)
    nrows = len(row_index)
    data = [[Fraction(0)] * len(cols) for _ in range(nrows)]
    for j, alpha in enumerate(cols):
        for gamma, c in f.terms.items():
            ok = True
            scale = 1
            beta = []
            for g, a in zip(gamma, alpha):
                if a > g:
                    ok = False
                    break
                beta.append(g - a)
                if scaled:
                    for k in range(a):
                        scale *= (g - k)
            if not ok:
                continue
            if not scaled:
                # divided-power: y^(a) . x^(a+b) = x^b, entry is c_{a+b}
                scale = Fraction(1)
            r = row_index[tuple(beta)]
            data[r][j] = data[r][j] + c * scale
    return Matrix(data, len(cols))


def hilbert_sequence(f):
    """[rank cat_0, ..., rank cat_d]; Gorenstein symmetry is asserted."""
    if f.is_zero():
        raise PolyError("Hilbert sequence of the zero polynomial")
    d = f.degree
    half = d // 2
    vals = [0] * (d + 1)
    for i in range(half + 1):
        vals[i] = catalecticant(f, i).rank()
    for i in range(half + 1, d + 1):
        vals[i] = vals[d - i]
    assert vals[0] == 1 and vals[d] == 1
    return vals


def differential_length(f):
    return max(hilbert_sequence(f))


def apolar_piece(f, i, dual_ring=None):
    """Basis of f-perp in degree i as dual polynomials (kernel of cat_i)."""
    n = f.ring.nvars
    dual = dual_ring if dual_ring is not None else f.ring.dual()
    if i == f.degree + 1:
        # whole of T_{d+1}; callers use degree bounds and never materialize it
        raise PolyError("degree d+1 piece is implicit; use degree bounds")
    K = catalecticant(f, i).kernel()
    mons = monomials(n, i)
    out = []
    for j in range(K.ncols):
        items = [(mons[r], K.rows[r][j]) for r in range(K.nrows) if K.rows[r][j]]
        out.append(Poly.from_terms(dual, items, degree=i))
    return out


def apolar_pieces_upto(f, k, dual_ring=None):
    gens = []
    for i in range(1, k + 1):
        gens.extend(apolar_piece(f, i, dual_ring))
    return gens


def diagonal_rescale_kernel(vec, i, n):
    """Map a plain-convention kernel vector to the divided-power convention:
    multiply the y^a coordinate by a!."""
    mons = monomials(n, i)
    out = []
    for a, v in zip(mons, vec):
        s = 1
        for e in a:
            s *= factorial(e)
        out.append(v * s)
    return out


class CoordMap:
    """Invertible linear change of coordinates x = M Y with exact inverse."""

    __slots__ = ("matrix", "inverse")

    def __init__(self, matrix, inverse=None):
        self.matrix = matrix
        if inverse is None:
            inverse = _invert(matrix)
        self.inverse = inverse

    @property
    def size(self):
        return self.matrix.nrows

    def point_back(self, reduced_point):
        """Map a point of the reduced dual space into the ambient one:
        ambient = M^{-T} (p, 0, ..., 0)."""
        n = self.size
        ext = list(reduced_point) + [Fraction(0)] * (n - len(reduced_point))
        mt = self.inverse.transpose()
        return tuple(mt.mulvec(ext))

    def point_forward(self, ambient_point):
        """Inverse of point_back; drops the trailing zero block."""
        mt = self.matrix.transpose()
        return tuple(mt.mulvec(list(ambient_point)))

    def dual_generator_back(self, g, ambient_dual_ring):
        """Rewrite a dual polynomial in reduced variables as an ambient one:
        ytilde_j <- sum_i M[i][j] y_i."""
        nred = g.ring.nvars
        sub = [[self.matrix.rows[i][j] for i in range(self.size)]
               for j in range(nred)]
        return substitute_linear(g, sub, ambient_dual_ring)

    def poly_forward(self, f, reduced_ring):
        """f(M Y) restricted to the reduced variables."""
        n = self.size
        sub = [[self.matrix.rows[i][j] for j in range(reduced_ring.nvars)]
               for i in range(n)]
        return substitute_linear(f, sub, reduced_ring)

    def to_json(self):
        return {"matrix": self.matrix.to_json()}


def _invert(m):
    n = m.nrows
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        x = m.solve(e)
        if x is None:
            raise PolyError("matrix is not invertible")
        cols.append(x)
    return Matrix([[cols[j][i] for j in range(n)] for i in range(n)], n)


class ConciseForm:
    __slots__ = ("reduced", "map", "essential_count")

    def __init__(self, reduced, coord_map, essential_count):
        self.reduced = reduced
        self.map = coord_map
        self.essential_count = essential_count


def essential_reduce(f, reduced_prefix="Y"):
    """Concise form of f: N = rank cat_1, an invertible change of coordinates
    whose last n+1-N dual directions span ker cat_1, and the reduced
    polynomial in the first N variables.

    The basis completion picks standard unit vectors greedily, which makes
    the reduced polynomial literally f with the non-pivot variables set to
    zero and the pivot variables renamed.
    """
    if f.is_zero():
        raise PolyError("cannot reduce the zero polynomial")
    n = f.ring.nvars
    K = catalecticant(f, 1).kernel()  # columns: dual linear forms killing f
    kdim = K.ncols
    N = n - kdim
    kcols = [[K.rows[i][j] for i in range(n)] for j in range(kdim)]
    pivots = []
    cur = [list(c) for c in kcols]
    rank = Matrix([[c[i] for c in cur] for i in range(n)], len(cur)).rank() if cur else 0
    for i in range(n):
        trial = cur + [[Fraction(int(r == i)) for r in range(n)]]
        tr = Matrix([[c[r] for c in trial] for r in range(n)], len(trial)).rank()
        if tr > rank:
            pivots.append(i)
            cur = trial
            rank = tr
        if len(pivots) == N:
            break
    cols = [[Fraction(int(r == i)) for r in range(n)] for i in pivots] + kcols
    M = Matrix([[cols[j][i] for j in range(n)] for i in range(n)], n)
    cmap = CoordMap(M)
    red_ring = Ring.standard(N, prefix=reduced_prefix)
    terms = {}
    pivset = set(pivots)
    for mono, c in f.terms.items():
        if any(e and i not in pivset for i, e in enumerate(mono)):
            continue
        terms[tuple(mono[i] for i in pivots)] = c
    reduced = Poly(red_ring, f.degree, terms)
    return ConciseForm(reduced, cmap, N)
