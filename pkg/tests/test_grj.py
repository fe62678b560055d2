"""
Closed-form representation components.  The strongest checks are exact:
a model built by similarity from a known canonical form has known
N_{-2}, N_{-1}, and spectral projection, and the closed-form route has
to reproduce them through the similarity.
"""
from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from grjkit.grj import (NotI1, NotI2, check_i1, check_i2, i1_components,
                        i2_components, taylor_h_coefficients)
from grjkit.laurent import NoUnitRoot, contour_coefficients, riesz_projection
from grjkit.models import build_example, jordan_model
from grjkit.numfield import (DEFAULT_TOL, Subspace, kernel_basis, operator_norm,
                             orthogonal_complement, range_basis)
from grjkit.pencil import ArPencil, linearize


def similarity_fixture():
    """B = S (J_2(1) (+) 1/2) S^{-1} with integer S: exact targets."""
    s = np.array([[1.0, 1.0, 0.0],
                  [0.0, 1.0, 2.0],
                  [1.0, 0.0, 1.0]])
    s_inv = np.linalg.inv(s)
    canon = np.array([[1.0, 1.0, 0.0],
                      [0.0, 1.0, 0.0],
                      [0.0, 0.0, 0.5]])
    b = s @ canon @ s_inv
    n2_canon = np.array([[0.0, -1.0, 0.0],
                         [0.0, 0.0, 0.0],
                         [0.0, 0.0, 0.0]])
    p_canon = np.diag([1.0, 1.0, 0.0])
    return (linearize(ArPencil(1, 3, [b])),
            s @ n2_canon @ s_inv, s @ p_canon @ s_inv)


def test_order_two_components_match_similarity_oracle():
    cp, n2_target, p_target = similarity_fixture()
    rep = i2_components(cp, j_max=8)
    assert rep.holds
    assert_allclose(rep.n_minus2, n2_target, atol=1e-10)
    assert_allclose(rep.p_op, p_target, atol=1e-10)
    assert rep.cross_check_residual < 1e-8


def test_shift_model_second_order_operator(shift8_cp):
    """The ambient second-order long-run operator of the truncated shift
    model concentrates on a single matrix entry."""
    rep = i2_components(shift8_cp, j_max=4)
    expected = np.zeros((8, 8))
    expected[1, 0] = -1.0
    assert_allclose(rep.long_run2, expected, atol=1e-10)


def test_components_are_complement_independent(shift8_cp, mixed21_cp):
    rng = np.random.default_rng(77)
    for cp in (shift8_cp, mixed21_cp):
        m = cp.identity() - cp.a1
        ker, ran = kernel_basis(m), range_basis(m)
        contour, _ = contour_coefficients(cp, [-2, -1])
        for trial in range(3):
            if trial == 0:
                rc = kc = None
            else:
                rc = Subspace.from_columns(
                    orthogonal_complement(ran).basis
                    + ran.basis @ (0.5 * rng.standard_normal(
                        (ran.dim, cp.big_dim - ran.dim))))
                kc = Subspace.from_columns(
                    orthogonal_complement(ker).basis
                    + ker.basis @ (0.5 * rng.standard_normal(
                        (ker.dim, cp.big_dim - ker.dim))))
            rep = i2_components(cp, j_max=2, ran_complement=rc,
                                ker_complement=kc)
            assert operator_norm(rep.n_minus2 - contour[-2]) < 1e-7
            assert operator_norm(rep.n_minus2 + rep.p_op - contour[-1]) < 1e-7


def test_mixed_block_geometry_exercises_graft(mixed21_cp):
    rep = check_i2(mixed21_cp)
    assert rep.holds
    assert rep.k_space.dim == 1
    assert rep.w_space.dim == 1          # nontrivial W: Q^g actually used
    assert rep.w_c.dim == 1
    assert operator_norm(rep.q_g) > 1e-8
    full = i2_components(mixed21_cp, j_max=2)
    assert operator_norm(full.p_op @ full.p_op - full.p_op) < 1e-10


def test_simple_pole_projection_is_riesz(evenodd_cp):
    rep = check_i1(evenodd_cp)
    assert rep.holds and rep.defect == 0
    assert_allclose(rep.p_operator, riesz_projection(evenodd_cp), atol=1e-8)


def test_h_series_inverts_the_pencil(evenodd_cp):
    """(I - z B) sum_j B^j (I - P) z^j telescopes to I - P (up to the
    geometric tail), which is exactly what makes nu_t stationary."""
    rep = i1_components(evenodd_cp, j_max=4)
    p = rep.p_operator
    eye = evenodd_cp.identity()
    terms = 220
    rng = np.random.default_rng(4)
    for _ in range(5):
        z = 0.9 * np.exp(2j * np.pi * rng.uniform())
        h_z = np.zeros_like(p)
        power = eye - p
        for j in range(terms):
            h_z += power * z ** j
            power = evenodd_cp.a1 @ power
        gap = (eye - z * evenodd_cp.a1) @ h_z - (eye - p)
        assert operator_norm(gap) < 1e-8


def test_h_coefficients_cross_check(evenodd_cp, shift8_cp):
    i1 = i1_components(evenodd_cp, j_max=20)
    assert i1.cross_check_residual < 1e-6
    i2 = i2_components(shift8_cp, j_max=20)
    assert i2.cross_check_residual < 1e-6


def test_taylor_route_agrees_with_closed_h(evenodd_cp):
    i1 = i1_components(evenodd_cp, j_max=12)
    principal, _ = contour_coefficients(evenodd_cp, [-1])
    taylor = taylor_h_coefficients(evenodd_cp, 12, principal)
    for closed, quad in zip(i1.h_coeffs, taylor):
        assert operator_norm(closed - quad) < 1e-6


def test_class_exclusivity():
    order3, _ = jordan_model(1, blocks_at_one=[3])
    cp3 = linearize(order3)
    assert not check_i1(cp3).holds
    assert not check_i2(cp3).holds
    with pytest.raises(NotI1):
        i1_components(cp3, j_max=2)
    with pytest.raises(NotI2):
        i2_components(cp3, j_max=2)


def test_i1_and_i2_disagree_on_purpose(shift8_cp, evenodd_cp):
    assert not check_i1(shift8_cp).holds    # double pole
    assert check_i2(shift8_cp).holds
    assert check_i1(evenodd_cp).holds       # simple pole
    assert not check_i2(evenodd_cp).holds


def test_i1_defect_reported_for_double_pole(shift8_cp):
    rep = check_i1(shift8_cp)
    assert rep.defect > 0


def test_gate_requires_unit_root():
    cp = linearize(ArPencil(1, 2, [np.diag([0.3, 0.4])]))
    with pytest.raises(NoUnitRoot):
        check_i1(cp)
    with pytest.raises(NoUnitRoot):
        check_i2(cp)


def test_long_run_operators_are_ambient(shift8, shift8_cp):
    rep = i2_components(shift8_cp, j_max=2)
    assert rep.long_run2.shape == (shift8.dim, shift8.dim)
    assert rep.long_run1.shape == (shift8.dim, shift8.dim)
    # second-order loading never vanishes for a genuine double root
    assert operator_norm(rep.long_run2) > 1e-8
