"""Integration-order checks and closed-form representation components.

Order one (simple pole) is a geometry statement about M = I - B on the
companion space: the ambient space must split as ran M (+) ker M.  When
it does, the long-run projection is the oblique projection onto ker M
along ran M.  Order two replaces that split with a finer one built from
the intersection K of ran M with ker M, a generalized inverse of M
relative to chosen complements, and the derived spaces W = (I - P_ran)
ker M and a complement W_C of W inside [ran M]_C.

The closed forms depend on the complement choices; the contour-derived
Laurent coefficients do not.  Every assembled component is therefore
cross-checked against contour quadrature, and that residual is part of
the returned report.  A caution on the derived spaces: on a simple-pole
model the canonical W_C construction can overlap W (the textbook
directness argument silently uses the order-two setting), so the
builder validates each internal split and degrades to diagnostics
instead of trusting the formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numfield import (
    DEFAULT_TOL,
    NotComplementary,
    Subspace,
    Tolerance,
    apply_to_subspace,
    direct_sum_check,
    kernel_basis,
    matrix_to_json,
    oblique_projection,
    operator_norm,
    orthogonal_complement,
    range_basis,
    relative_generalized_inverse,
    subspace_intersection,
    subspace_sum,
    subspace_to_json,
)
from .laurent import NoUnitRoot, circle_coefficients, contour_coefficients
from .pencil import CompanionPencil, resolvent, spectrum_report

H_TAYLOR_RADIUS = 0.9


class NotI1(ArithmeticError):
    """Requested order-one components for a model that is not order one."""


class NotI2(ArithmeticError):
    """Requested order-two components for a model that is not order two."""


def _gate(cp: CompanionPencil, tol: Tolerance):
    rep = spectrum_report(cp, tol=tol)
    if not rep.unit_root_present:
        raise NoUnitRoot("1 is not in the pencil spectrum")
    if not rep.unit_root_ok:
        raise NoUnitRoot(
            "unit root is not isolated enough for contour analysis "
            f"(nearest other spectrum point at distance {rep.nearest_other:.3g})")
    return rep


def _jsonable_matrix(m):
    return None if m is None else matrix_to_json(m)


def _jsonable_real(x):
    return None if (x is None or not math.isfinite(x)) else float(x)


# ---------------------------------------------------------------------------
# order one
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class I1Report:
    holds: bool
    ker_dim: int
    ran_dim: int
    defect: int
    p_operator: np.ndarray | None
    long_run: np.ndarray | None
    h_coeffs: list
    cross_check_residual: float

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "ker_dim": self.ker_dim,
            "ran_dim": self.ran_dim,
            "defect": self.defect,
            "p_operator": _jsonable_matrix(self.p_operator),
            "long_run": _jsonable_matrix(self.long_run),
            "h_coeffs": [matrix_to_json(h) for h in self.h_coeffs],
            "cross_check_residual": _jsonable_real(self.cross_check_residual),
        }


def check_i1(cp: CompanionPencil, tol: Tolerance = DEFAULT_TOL) -> I1Report:
    """Decide the order-one condition: companion space = ran M (+) ker M.

    When it holds, the report carries the oblique projection onto ker M
    along ran M together with its contour cross-check residual and the
    observable long-run operator.
    """
    rep = _gate(cp, tol)
    m = cp.identity() - cp.a1
    ker = kernel_basis(m, tol)
    ran = range_basis(m, tol)
    split = direct_sum_check(ran, ker, tol)
    if not split.holds:
        return I1Report(holds=False, ker_dim=ker.dim, ran_dim=ran.dim,
                        defect=split.defect, p_operator=None, long_run=None,
                        h_coeffs=[], cross_check_residual=math.inf)
    p_op = oblique_projection(ker, ran, tol)
    contour, _ = contour_coefficients(cp, [-1], tol=tol, spectrum=rep)
    residual = operator_norm(p_op - contour[-1], cp.norm)
    long_run = cp.pi_p @ p_op @ cp.pi_p_star
    return I1Report(holds=True, ker_dim=ker.dim, ran_dim=ran.dim, defect=0,
                    p_operator=p_op, long_run=long_run, h_coeffs=[],
                    cross_check_residual=residual)


def taylor_h_coefficients(cp: CompanionPencil, j_max: int, principal: dict,
                          tol: Tolerance = DEFAULT_TOL,
                          radius: float = H_TAYLOR_RADIUS, nodes: int = 512):
    """Taylor coefficients (around 0) of the observable holomorphic part.

    ``principal`` maps negative exponents to the pole coefficients N_j;
    the sampled function is the resolvent with the corresponding
    principal part added back, compressed to the observable block, which
    is analytic on the closed sampling disk whenever the unit root is
    the only spectrum point inside D_{1+eta}.  This route never uses the
    closed-form components, so it is a genuine cross-check for them.
    """
    items = sorted(principal.items())

    def holomorphic(z):
        out = resolvent(cp, z, tol)
        for j, coeff in items:
            out = out + coeff * (z - 1.0) ** j
        return cp.pi_p @ out @ cp.pi_p_star

    coeffs, _, _ = circle_coefficients(holomorphic, range(j_max + 1),
                                       center=0.0, radius=radius, nodes=nodes)
    return [coeffs[j] for j in range(j_max + 1)]


def _h_closed_form(cp: CompanionPencil, p_op, j_max: int):
    """Observable coefficients h_j from the closed form B^j (I - P)."""
    out = []
    power = cp.identity() - p_op
    for _ in range(j_max + 1):
        out.append(cp.pi_p @ power @ cp.pi_p_star)
        power = cp.a1 @ power
    return out


def i1_components(cp: CompanionPencil, j_max: int,
                  tol: Tolerance = DEFAULT_TOL) -> I1Report:
    """Full order-one components: projection, long-run operator, and the
    h_j Taylor coefficients, each cross-checked against quadrature."""
    base = check_i1(cp, tol)
    if not base.holds:
        raise NotI1(
            f"range/kernel split fails with defect {base.defect} "
            f"(ker dim {base.ker_dim}, ran dim {base.ran_dim})")
    h_closed = _h_closed_form(cp, base.p_operator, j_max)

    contour, _ = contour_coefficients(cp, [-1], tol=tol)
    ambient_taylor = taylor_h_coefficients(cp, j_max, {-1: contour[-1]}, tol)
    h_residual = 0.0
    for j in range(j_max + 1):
        h_residual = max(h_residual,
                         operator_norm(h_closed[j] - ambient_taylor[j], cp.norm))

    return I1Report(holds=True, ker_dim=base.ker_dim, ran_dim=base.ran_dim,
                    defect=0, p_operator=base.p_operator, long_run=base.long_run,
                    h_coeffs=h_closed,
                    cross_check_residual=max(base.cross_check_residual, h_residual))


# ---------------------------------------------------------------------------
# order two
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class I2Report:
    holds: bool
    k_space: Subspace
    w_space: Subspace
    w_c: Subspace
    k_c: Subspace
    gen_inverse: np.ndarray
    q: np.ndarray
    q_g: np.ndarray | None
    n_minus2: np.ndarray | None
    p_op: np.ndarray | None
    gamma_l: np.ndarray | None
    gamma_r: np.ndarray | None
    long_run2: np.ndarray | None
    long_run1: np.ndarray | None
    h_coeffs: list
    cross_check_residual: float

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "k_space": subspace_to_json(self.k_space),
            "w_space": subspace_to_json(self.w_space),
            "w_c": subspace_to_json(self.w_c),
            "k_c": subspace_to_json(self.k_c),
            "gen_inverse": _jsonable_matrix(self.gen_inverse),
            "q": _jsonable_matrix(self.q),
            "q_g": _jsonable_matrix(self.q_g),
            "n_minus2": _jsonable_matrix(self.n_minus2),
            "p_op": _jsonable_matrix(self.p_op),
            "gamma_l": _jsonable_matrix(self.gamma_l),
            "gamma_r": _jsonable_matrix(self.gamma_r),
            "long_run2": _jsonable_matrix(self.long_run2),
            "long_run1": _jsonable_matrix(self.long_run1),
            "h_coeffs": [matrix_to_json(h) for h in self.h_coeffs],
            "cross_check_residual": _jsonable_real(self.cross_check_residual),
        }


class _OrderTwoGeometry:
    """All subspaces and operators entering the order-two formulas, built
    once for a given pair of complements and shared by check/components."""

    def __init__(self, cp, tol, ran_complement=None, ker_complement=None):
        n = cp.big_dim
        self.cp = cp
        self.tol = tol
        m = cp.identity() - cp.a1
        self.ker = kernel_basis(m, tol)
        self.ran = range_basis(m, tol)
        self.ran_c = orthogonal_complement(self.ran, tol) if ran_complement is None \
            else ran_complement
        self.ker_c = orthogonal_complement(self.ker, tol) if ker_complement is None \
            else ker_complement
        if not direct_sum_check(self.ran, self.ran_c, tol).holds:
            raise NotComplementary("supplied range complement is not complementary")
        if not direct_sum_check(self.ker, self.ker_c, tol).holds:
            raise NotComplementary("supplied kernel complement is not complementary")

        self.k_space = subspace_intersection(self.ran, self.ker, tol)
        self.p_ran = oblique_projection(self.ran, self.ran_c, tol)
        self.p_ker = oblique_projection(self.ker, self.ker_c, tol)
        off_range = np.eye(n, dtype=np.complex128) - self.p_ran
        self.w_space = apply_to_subspace(off_range, self.ker, tol)
        # Inner complements: K_C completes K to the kernel and W_C completes
        # W = (I - P_ran) ker to the range complement.  Taking them orthogonal
        # within the enclosing space is one valid choice among many; the
        # contour cross-check certifies the results do not depend on it.
        self.w_c = subspace_intersection(
            self.ran_c, orthogonal_complement(self.w_space, tol), tol)
        self.k_c = subspace_intersection(
            self.ker, orthogonal_complement(self.k_space, tol), tol)
        self.gen_inverse = relative_generalized_inverse(m, self.ker_c, self.ran_c, tol)
        self.q = off_range @ self.p_ker
        self.off_range = off_range

        self.sum_rk = subspace_sum(self.ran, self.ker, tol)
        gk = apply_to_subspace(self.gen_inverse, self.k_space, tol)
        self.gk = gk
        self.split = direct_sum_check(self.sum_rk, gk, tol)
        self.holds = self.k_space.dim > 0 and self.split.holds

        # Q restricted to K_C inverts onto W; build Q^g = [Q|_{K_C}]^{-1} P_W.
        # On a model without the order-two geometry the W (+) W_C split can
        # fail, in which case Q^g stays None and only the verdict is usable.
        self.q_g = None
        self.q_g_residual = math.inf
        if self.w_space.dim == 0:
            self.q_g = np.zeros((n, n), dtype=np.complex128)
            self.q_g_residual = 0.0
        else:
            try:
                p_w = oblique_projection(self.w_space,
                                         subspace_sum(self.ran, self.w_c, tol), tol)
            except NotComplementary:
                p_w = None
            if p_w is not None:
                images = off_range @ self.k_c.basis
                coords, *_ = np.linalg.lstsq(images, p_w, rcond=None)
                self.q_g = self.k_c.basis @ coords
                self.q_g_residual = operator_norm(images @ coords - p_w)


def _report_from_geometry(geo: _OrderTwoGeometry, *, n_minus2=None, p_op=None,
                          gamma_l=None, gamma_r=None, long_run2=None,
                          long_run1=None, h_coeffs=None,
                          cross_check_residual=math.inf) -> I2Report:
    return I2Report(holds=geo.holds, k_space=geo.k_space, w_space=geo.w_space,
                    w_c=geo.w_c, k_c=geo.k_c, gen_inverse=geo.gen_inverse,
                    q=geo.q, q_g=geo.q_g, n_minus2=n_minus2, p_op=p_op,
                    gamma_l=gamma_l, gamma_r=gamma_r, long_run2=long_run2,
                    long_run1=long_run1, h_coeffs=h_coeffs or [],
                    cross_check_residual=cross_check_residual)


def check_i2(cp: CompanionPencil, tol: Tolerance = DEFAULT_TOL,
             ran_complement: Subspace | None = None,
             ker_complement: Subspace | None = None) -> I2Report:
    """Decide the order-two condition.

    Requires K = ran M /\\ ker M nontrivial and the companion space to
    split as (ran M + ker M) (+) M^g K.  The constructed spaces and the
    generalized inverse are returned whether or not the condition holds;
    the representation operators are filled in by i2_components.
    """
    _gate(cp, tol)
    geo = _OrderTwoGeometry(cp, tol, ran_complement, ker_complement)
    return _report_from_geometry(geo)


def i2_components(cp: CompanionPencil, j_max: int, tol: Tolerance = DEFAULT_TOL,
                  ran_complement: Subspace | None = None,
                  ker_complement: Subspace | None = None) -> I2Report:
    """Assemble the order-two representation operators.

    The second-order coefficient inverts P_{W_C} M^g restricted K -> W_C
    in the computed bases (square exactly when the order-two geometry is
    valid); the projection then follows from the Gamma operators and
    Q^g.  Both are cross-checked against contour coefficients, which do
    not depend on the complement choices.
    """
    rep = _gate(cp, tol)
    geo = _OrderTwoGeometry(cp, tol, ran_complement, ker_complement)
    if not geo.holds:
        raise NotI2(
            f"order-two geometry fails: K dim {geo.k_space.dim}, "
            f"split defect {geo.split.defect}")
    if geo.w_c.dim != geo.k_space.dim:
        raise NotI2(
            f"restricted map K -> W_C is not square "
            f"(dim K {geo.k_space.dim}, dim W_C {geo.w_c.dim})")
    if geo.q_g is None or geo.q_g_residual > 10 * tol.residual_abs:
        raise NotI2(
            f"Q^g construction failed (residual {geo.q_g_residual:.2e}); "
            "the W (+) W_C split is not usable")

    n = cp.big_dim
    eye = np.eye(n, dtype=np.complex128)
    k_dim = geo.k_space.dim
    p_wc = oblique_projection(geo.w_c, subspace_sum(geo.ran, geo.w_space, tol), tol)

    restricted = p_wc @ geo.gen_inverse @ geo.k_space.basis  # n x k, values in W_C
    in_wc_coords, *_ = np.linalg.lstsq(geo.w_c.basis, restricted, rcond=None)
    try:
        inverted = np.linalg.solve(in_wc_coords, np.eye(k_dim, dtype=np.complex128))
    except np.linalg.LinAlgError as exc:
        raise NotI2(f"restricted map K -> W_C is singular: {exc}") from exc
    wc_coords_of_pwc, *_ = np.linalg.lstsq(geo.w_c.basis, p_wc, rcond=None)
    n_minus2 = geo.k_space.basis @ inverted @ wc_coords_of_pwc

    gamma_l = geo.gen_inverse @ n_minus2
    gamma_r = n_minus2 @ geo.gen_inverse
    # Assemble the spectral projection from gamma_r, the graft through
    # Q^g (I - P_ran), and gamma_l.  The summand order matters: with the
    # correction factors applied from the left, the sum is independent of
    # the complement choices even though each factor alone is not.
    q_term = geo.q_g @ geo.off_range
    p_op = gamma_r + (eye - gamma_r) @ (q_term + (eye - q_term) @ gamma_l)

    contour, _ = contour_coefficients(cp, [-2, -1], tol=tol, spectrum=rep)
    residual = max(operator_norm(n_minus2 - contour[-2], cp.norm),
                   operator_norm(n_minus2 + p_op - contour[-1], cp.norm))

    h_coeffs = _h_closed_form(cp, p_op, j_max)
    long_run2 = cp.pi_p @ n_minus2 @ cp.pi_p_star
    long_run1 = cp.pi_p @ (n_minus2 + p_op) @ cp.pi_p_star
    return _report_from_geometry(
        geo, n_minus2=n_minus2, p_op=p_op, gamma_l=gamma_l, gamma_r=gamma_r,
        long_run2=long_run2, long_run1=long_run1, h_coeffs=h_coeffs,
        cross_check_residual=residual)
