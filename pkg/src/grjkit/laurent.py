"""Laurent analysis of the inverse pencil around the unit root.

The inverse of the linearized pencil admits a Laurent expansion in a
punctured neighborhood of z = 1.  We write it as

    (I - z*B)^{-1} = - sum_j  N_j (z - 1)^j ,

and compute the coefficients N_j by trapezoidal quadrature of the
contour integral over a circle centered at 1.  Sign and orientation
conventions differ across sources; here they are pinned down by two
ground-truth identities on validation models:

  * N_{-1} B is the spectral projection associated with the unit
    eigenvalue group (and N_{-1} = that projection when the pole is
    simple: B = diag(1, 0.5) must give N_{-1} = diag(1, 0));
  * the coefficient algebra N_j B N_k = (1 - e_j - e_k) N_{j+k+1},
    with e_j = 1 for j >= 0 and 0 otherwise.

Concretely: with the circle parametrized counterclockwise,
N_j = -(1/M) sum_m R(z_m) (r e^{i theta_m})^{-j}, which the engine
evaluates for all j at once via an FFT of the resolvent samples.

The pole order is decided structurally.  Writing P for the spectral
projection and G = (I - B) P for the quasi-nilpotent part, the order
equals the nilpotency index of G with the convention G^0 = P.  The
index is detected by rank stabilization of the powers G^k (scale-free),
cross-checked against the Jordan-ascent oracle; the norm-threshold
variant ||G^{k+1}|| <= tol * ||P|| is also reported but is only a
diagnostic, because honest tiny powers (triangular quadrature models)
drop below any absolute threshold long before they vanish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numfield import DEFAULT_TOL, Tolerance, numerical_rank, operator_norm, \
    fit_geometric_decay, matrix_to_json
from .pencil import CompanionPencil, SpectrumReport, resolvent, spectrum_report

DEFAULT_NODES = 256
MAX_NODES = 4096
QUADRATURE_CONV_TOL = 1e-10


class NoUnitRoot(ArithmeticError):
    """1 is not in the pencil spectrum (within the clustering tolerance)."""


class ContourTooWide(ArithmeticError):
    """Another spectrum point sits within 1.5x the contour radius of 1."""


class ContourNotConverged(ArithmeticError):
    """Node doubling hit the cap without the quadrature settling."""


def pick_radius(report: SpectrumReport) -> float:
    """Default contour radius: min(0.5, 0.4 * distance to the rest of
    the spectrum)."""
    if np.isfinite(report.nearest_other):
        return min(0.5, 0.4 * report.nearest_other)
    return 0.5


def circle_coefficients(fn, js, center=1.0, radius=0.5, nodes=DEFAULT_NODES,
                        conv_tol=QUADRATURE_CONV_TOL, max_nodes=MAX_NODES):
    """Laurent coefficients a_j of a matrix-valued analytic function.

    Standard convention here: fn(z) = sum_j a_j (z - center)^j.  The
    trapezoid rule on the circle |z - center| = radius is spectrally
    accurate; node count doubles until successive results differ by at
    most conv_tol (or max_nodes is reached).  Returns (coeffs, nodes,
    last_change); coefficient extraction for all j shares one FFT of the
    samples per refinement level.
    """
    js = list(js)
    if nodes < 16:
        raise ValueError("at least 16 quadrature nodes required")
    if radius <= 0:
        raise ValueError("radius must be positive")

    def evaluate(m_nodes):
        theta = 2.0 * np.pi * np.arange(m_nodes) / m_nodes
        zs = center + radius * np.exp(1j * theta)
        samples = np.stack([np.asarray(fn(z), dtype=np.complex128) for z in zs])
        spectrum = np.fft.fft(samples, axis=0)  # index j holds sum_m f_m e^{-ij theta_m}
        out = {}
        for j in js:
            out[j] = spectrum[j % m_nodes] / (m_nodes * radius ** j)
        return out

    current = evaluate(nodes)
    m = nodes
    change = np.inf
    while m < max_nodes:
        m *= 2
        refined = evaluate(m)
        change = max(operator_norm(refined[j] - current[j]) for j in js)
        current = refined
        if change <= conv_tol:
            break
    if change > conv_tol and m >= max_nodes:
        # one more comparison so callers see the final discrepancy
        raise ContourNotConverged(
            f"quadrature change {change:.2e} above {conv_tol:.0e} at {m} nodes")
    return current, m, change


def _guard_radius(rep: SpectrumReport, radius: float):
    if rep.nearest_other < 1.5 * radius:
        raise ContourTooWide(
            f"spectrum point at distance {rep.nearest_other:.3g} from 1 "
            f"inside 1.5 x radius {radius:.3g}")


def contour_coefficients(cp: CompanionPencil, js, radius=None, nodes=DEFAULT_NODES,
                         tol: Tolerance = DEFAULT_TOL, spectrum=None):
    """Pencil Laurent coefficients N_j for every j in js (shared samples).

    Applies the pencil sign convention N_j = -a_j to the standard
    circle coefficients of the resolvent.
    """
    rep = spectrum if spectrum is not None else spectrum_report(cp, tol=tol)
    if radius is None:
        radius = pick_radius(rep)
    _guard_radius(rep, radius)
    coeffs, used_nodes, change = circle_coefficients(
        lambda z: resolvent(cp, z, tol), js, center=1.0, radius=radius, nodes=nodes)
    if change > 10 * tol.residual_abs:
        raise ContourNotConverged(
            f"quadrature change {change:.2e} above 10 x residual_abs")
    return {j: -coeffs[j] for j in js}, {"center": 1.0, "radius": radius, "nodes": used_nodes}


def contour_coefficient(cp: CompanionPencil, j: int, radius=None, nodes=DEFAULT_NODES,
                        tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Single pencil Laurent coefficient N_j by contour quadrature."""
    coeffs, _ = contour_coefficients(cp, [int(j)], radius=radius, nodes=nodes, tol=tol)
    return coeffs[int(j)]


def riesz_projection(cp: CompanionPencil, tol: Tolerance = DEFAULT_TOL,
                     radius=None, nodes=DEFAULT_NODES, spectrum=None) -> np.ndarray:
    """Spectral projection for the unit eigenvalue group: N_{-1} composed
    with the companion operator."""
    coeffs, _ = contour_coefficients(cp, [-1], radius=radius, nodes=nodes,
                                     tol=tol, spectrum=spectrum)
    return coeffs[-1] @ cp.a1


@dataclass(frozen=True)
class PoleOrderReport:
    order: int
    essential_flag: bool
    nilpotency_index: int
    ascent: int
    norm_route_order: int
    routes_agree: bool

    def to_json(self) -> dict:
        return {"order": self.order, "essential_flag": self.essential_flag,
                "nilpotency_index": self.nilpotency_index, "ascent": self.ascent,
                "norm_route_order": self.norm_route_order,
                "routes_agree": self.routes_agree}


def _nilpotency_index_by_rank(proj, g, tol: Tolerance) -> int:
    """Smallest k >= 0 with G^k numerically zero, counting G^0 = P.

    Ranks of the true powers decrease strictly to zero (G restricted to
    ran P is nilpotent; G vanishes off ran P).  A plateau or an increase
    in numerical rank therefore marks the rounding floor and is treated
    as zero.
    """
    n = proj.shape[0]
    rank_prev = numerical_rank(proj, tol)
    if rank_prev == 0:
        return 0
    power = g
    for k in range(1, n + 1):
        rank_k = numerical_rank(power, tol)
        if rank_k == 0 or rank_k >= rank_prev:
            return k
        rank_prev = rank_k
        power = power @ g
    return n


def _norm_route_order(proj, g, norm_kind, tol: Tolerance) -> int:
    """Literal norm-threshold order: 1 + smallest k >= 0 with
    ||G^{k+1}|| <= residual_abs * ||P|| (diagnostic only)."""
    p_norm = operator_norm(proj, norm_kind)
    if p_norm <= tol.residual_abs:
        return 0
    power = g
    for k in range(0, proj.shape[0] + 1):
        if operator_norm(power, norm_kind) <= tol.residual_abs * p_norm:
            return k + 1
        power = power @ g
    return proj.shape[0] + 1


def pole_order(cp: CompanionPencil, tol: Tolerance = DEFAULT_TOL,
               require_unit_root: bool = True, spectrum=None) -> PoleOrderReport:
    """Pole order of the inverse pencil at z = 1.

    Structural route: nilpotency index of G = (I - B) P by rank
    stabilization (order = index, with G^0 = P).  Cross-checked against
    the Jordan-ascent oracle; the norm-threshold route is recorded as a
    diagnostic.  essential_flag on a single model marks the order hitting
    the ambient ceiling; sweeps across truncation dimensions refine it
    (see essential_from_sweep).
    """
    from .numfield import ascent_at_one  # local import keeps module load order simple

    rep = spectrum if spectrum is not None else spectrum_report(cp, tol=tol)
    if not rep.unit_root_present:
        if require_unit_root:
            raise NoUnitRoot("1 is not in the pencil spectrum")
        return PoleOrderReport(order=0, essential_flag=False, nilpotency_index=0,
                               ascent=0, norm_route_order=0, routes_agree=True)
    proj = riesz_projection(cp, tol=tol, spectrum=rep)
    g = (cp.identity() - cp.a1) @ proj
    index = _nilpotency_index_by_rank(proj, g, tol)
    ascent = ascent_at_one(cp.a1, tol)
    norm_route = _norm_route_order(proj, g, cp.norm, tol)
    return PoleOrderReport(
        order=index,
        essential_flag=index >= cp.big_dim,
        nilpotency_index=index,
        ascent=ascent,
        norm_route_order=norm_route,
        routes_agree=(index == ascent),
    )


def essential_from_sweep(dims, orders) -> bool:
    """Truncation-sweep heuristic: a finite section can never exhibit a
    true essential singularity, but a pole order growing linearly with
    the truncation dimension is the desk-scale signature of one."""
    dims = list(dims)
    orders = list(orders)
    if len(dims) < 2 or len(dims) != len(orders):
        raise ValueError("need matching sweeps of at least two dimensions")
    pairs = sorted(zip(dims, orders))
    ds = [d for d, _ in pairs]
    os = [o for _, o in pairs]
    if any(b < a for a, b in zip(os, os[1:])):
        return False
    slope = (os[-1] - os[0]) / (ds[-1] - ds[0])
    return slope >= 0.5


@dataclass(frozen=True)
class LaurentExpansion:
    """Computed Laurent data around z = 1.

    coeffs maps j -> N_j for j in [-pole_order, j_max]; p_operator is the
    spectral projection N_{-1} B; g_operator its quasi-nilpotent part
    (I - B) P.
    """

    pole_order: int
    coeffs: dict
    contour: dict
    p_operator: np.ndarray
    g_operator: np.ndarray

    def principal_part(self, z: complex) -> np.ndarray:
        """Value at z of the singular terms -sum_{j<0} N_j (z-1)^j."""
        n = self.p_operator.shape[0]
        out = np.zeros((n, n), dtype=np.complex128)
        for j, c in self.coeffs.items():
            if j < 0:
                out -= c * (z - 1.0) ** j
        return out

    def evaluate(self, z: complex, j_cap=None) -> np.ndarray:
        """Truncated series reconstruction -sum_j N_j (z-1)^j."""
        n = self.p_operator.shape[0]
        out = np.zeros((n, n), dtype=np.complex128)
        for j, c in self.coeffs.items():
            if j_cap is not None and j > j_cap:
                continue
            out -= c * (z - 1.0) ** j
        return out

    def to_json(self) -> dict:
        return {
            "pole_order": self.pole_order,
            "coeffs": {str(j): matrix_to_json(c) for j, c in sorted(self.coeffs.items())},
            "contour": self.contour,
        }


def expansion(cp: CompanionPencil, j_max: int, tol: Tolerance = DEFAULT_TOL,
              radius=None, nodes=DEFAULT_NODES) -> LaurentExpansion:
    """Full expansion with coefficients for j in [-order, j_max].

    Verifies, before returning: reconstruction against direct resolvent
    evaluation at held-out points on a circle of half the contour radius
    (within a tail bound fitted from the computed coefficient decay),
    idempotency of the projection, and commutation with the companion
    operator.
    """
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    rep = spectrum_report(cp, tol=tol)
    order_rep = pole_order(cp, tol=tol, require_unit_root=False, spectrum=rep)
    order = order_rep.order
    js = list(range(-order, j_max + 1))
    if -1 not in js:
        js = [-1] + js  # always compute the residue term for p_operator
    coeffs, contour = contour_coefficients(cp, js, radius=radius, nodes=nodes,
                                           tol=tol, spectrum=rep)
    p_op = coeffs[-1] @ cp.a1
    g_op = (cp.identity() - cp.a1) @ p_op
    exp = LaurentExpansion(
        pole_order=order,
        coeffs={j: coeffs[j] for j in range(-order, j_max + 1)},
        contour=contour,
        p_operator=p_op,
        g_operator=g_op,
    )

    norm = cp.norm
    res_idem = operator_norm(p_op @ p_op - p_op, norm)
    res_comm = operator_norm(p_op @ cp.a1 - cp.a1 @ p_op, norm)
    if max(res_idem, res_comm) > 10 * tol.residual_abs:
        raise ContourNotConverged(
            f"projection residuals too large (idempotency {res_idem:.2e}, "
            f"commutation {res_comm:.2e})")

    # held-out reconstruction on the half-radius circle
    r_eval = contour["radius"] / 2.0
    tail_norms = [operator_norm(exp.coeffs[j], norm) for j in range(0, j_max + 1)]
    c_fit, rho_fit = fit_geometric_decay(tail_norms)
    decay = rho_fit * r_eval
    if 0 < decay < 1:
        tail = c_fit * decay ** (j_max + 1) / (1.0 - decay)
    else:
        tail = c_fit * max(decay, 1.0) ** (j_max + 1)
    bound = 10.0 * tail + 100.0 * tol.residual_abs
    for theta in (0.3, 2.1, 4.0):
        z = 1.0 + r_eval * np.exp(1j * theta)
        err = operator_norm(exp.evaluate(z) - resolvent(cp, z, tol), norm)
        if err > bound:
            raise ContourNotConverged(
                f"reconstruction error {err:.2e} above tail bound {bound:.2e} at z={z:.3f}")
    return exp


def cesaro_diagnostic(cp: CompanionPencil, ell: int, count: int = 30,
                      tol: Tolerance = DEFAULT_TOL):
    """Diagnostic sequence n^{-1} ||G^ell (I - G)^n|| for n = 1..count.

    In finite dimensions its convergence to zero is equivalent to the
    nilpotency tested by pole_order, so this is reported for inspection
    only, never as a pass/fail gate.
    """
    proj = riesz_projection(cp, tol=tol)
    g = (cp.identity() - cp.a1) @ proj
    g_ell = np.linalg.matrix_power(g, ell) if ell > 0 else proj
    out = []
    step = cp.identity() - g
    acc = np.eye(cp.big_dim, dtype=np.complex128)
    for n in range(1, count + 1):
        acc = acc @ step
        out.append(operator_norm(g_ell @ acc, cp.norm) / n)
    return out
