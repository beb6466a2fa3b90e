"""Independent verification layer: apolarity membership, reconstruction,
regularity, and rank certificates, usable as an oracle against the
decomposition engine."""

from fractions import Fraction

from .fieldarith import ComplexBox, FieldElem
from .linalg import Matrix, vandermonde
from .polycore import Poly, apolar_apply, linform_power, monomials
from .zerodim import IdealGens


class Certificate:
    __slots__ = ("lower_bound", "achieved", "apolarity_checked",
                 "reconstruction_residual", "regularity", "case_label",
                 "valid", "failures", "minimality")

    def __init__(self, **kw):
        for k in self.__slots__:
            setattr(self, k, kw.get(k))

    def __repr__(self):
        status = "valid" if self.valid else f"INVALID {self.failures}"
        return (f"Certificate({status}, lb={self.lower_bound}, "
                f"achieved={self.achieved}, residual={self.reconstruction_residual})")

    def to_json(self):
        return {
            "lowerBound": self.lower_bound,
            "achieved": self.achieved,
            "apolarityChecked": self.apolarity_checked,
            "reconstructionResidual": _res_json(self.reconstruction_residual),
            "regularity": self.regularity,
            "caseLabel": self.case_label.to_json() if self.case_label else None,
            "minimality": self.minimality,
            "valid": self.valid,
            "failures": self.failures,
        }


def _res_json(r):
    if r is None:
        return None
    if isinstance(r, Fraction):
        return str(r)
    return str(r)


def check_apolar(ideal, f):
    """True iff every generator annihilates f exactly (membership of the
    generators suffices since the apolar ideal is an ideal)."""
    gens = ideal.gens if isinstance(ideal, IdealGens) else list(ideal)
    for g in gens:
        if g.ring.nvars != f.ring.nvars:
            raise ValueError("generator/polynomial ring mismatch")
        ft = f
        tower = g.tower() if hasattr(g, "tower") else None
        if tower is not None and f.tower() is None:
            ft = f.map_coeffs(lambda x: FieldElem.of(x, tower))
        if not apolar_apply(g, ft).is_zero():
            return False
    return True


def reconstruct(points, f):
    """Solve f = sum c_i l_i^d against the given points.

    Exact points give an exact solve with residual 0 or an infinity marker
    when inconsistent; box points give an interval solve with a rigorous
    relative residual bound.
    """
    if not points:
        raise ValueError("reconstruct needs at least one point")
    numeric = any(isinstance(x, ComplexBox) for p in points for x in p)
    if not numeric:
        tower = next((x.tower for p in points for x in p
                      if isinstance(x, FieldElem) and x.tower is not None), None)
        cols = [linform_power(f.ring, list(p), f.degree).coeff_vector()
                for p in points]
        mons = monomials(f.ring.nvars, f.degree)
        A = Matrix([[cols[j][i] for j in range(len(cols))]
                    for i in range(len(mons))], len(cols))
        b = f.coeff_vector()
        if tower is not None:
            b = [FieldElem.of(x, tower) for x in b]
        sol = A.solve(b)
        if sol is None:
            return None, float("inf")
        diff = f if tower is None else f.map_coeffs(lambda x: FieldElem.of(x, tower))
        for c, p in zip(sol, points):
            diff = diff - linform_power(f.ring, list(p), f.degree).scale(c)
        if not diff.is_zero():
            return None, float("inf")
        return sol, Fraction(0)
    from .decomp import _interval_coefficients, EngineConfig
    boxed = [tuple(x if isinstance(x, ComplexBox) else _coerce_box(x)
                   for x in p) for p in points]
    return _interval_coefficients(f, boxed, EngineConfig())


def _coerce_box(x):
    if isinstance(x, FieldElem):
        if x.is_rational():
            return ComplexBox.point(x.rational_value())
        from .fieldarith import embed_numeric
        return embed_numeric(x, 0, 64)
    return ComplexBox.point(Fraction(x))


def regularity(points):
    """Least k with rank van_k(X) = |X| (the interpolation degree)."""
    r = len(points)
    n = len(points[0])
    keys = {tuple(str(x) for x in p) for p in points}
    if len(keys) != r:
        raise ValueError("coincident points have no interpolation degree")
    for k in range(1, 3 * r + 2):
        if vandermonde(points, k, n).rank() == r:
            return k
    raise ValueError("regularity not reached within the degree cap")


_TIGHT_ROWS = {1, 2, 6, 8, 11, 13, 14}


def certify(decomp, f):
    """Run every check against the original polynomial and assemble the
    certificate; a failed predicate marks the certificate invalid with the
    failing predicate named."""
    failures = []
    if decomp.verdict != "ok":
        cert = Certificate(
            lower_bound=decomp.lower_bound, achieved=None,
            apolarity_checked=False, reconstruction_residual=None,
            regularity=None, case_label=decomp.label,
            minimality="not-applicable", valid=True, failures=[])
        return cert
    scheme = decomp.scheme
    achieved = decomp.rank
    lower = decomp.lower_bound
    if achieved < lower:
        failures.append("achieved-below-lower-bound")
    # apolarity of the scheme ideal against the reduced polynomial
    apolar_ok = False
    try:
        apolar_ok = check_apolar(scheme.id_gens, scheme.h_poly)
    except Exception:
        apolar_ok = False
    if not apolar_ok and scheme.id_gens.gens:
        failures.append("apolarity")
    if scheme.x_deg != achieved:
        failures.append("scheme-degree")
    if not scheme.x_red:
        failures.append("scheme-not-reduced")
    residual = decomp.residual
    if residual is None:
        failures.append("reconstruction-missing")
    elif isinstance(residual, Fraction) and residual != 0:
        if residual > Fraction(1, 1 << 40):
            failures.append("reconstruction-residual")
    reg = None
    if decomp.points_exact is not None:
        try:
            reg = regularity(decomp.points_exact)
        except Exception:
            failures.append("regularity")
    row = decomp.label.row if decomp.label else None
    if lower == achieved:
        minimality = "tight"
    elif isinstance(row, int):
        minimality = f"row-{row}-structure"
    else:
        minimality = "unjustified"
        failures.append("minimality")
    cert = Certificate(
        lower_bound=lower, achieved=achieved,
        apolarity_checked=bool(apolar_ok or not scheme.id_gens.gens),
        reconstruction_residual=residual, regularity=reg,
        case_label=decomp.label, minimality=minimality,
        valid=not failures, failures=failures)
    return cert
