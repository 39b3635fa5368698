import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polybergman.closedform import gaussian_poly_kernel, limit_blowup_kernel
from polybergman.errors import OrderUnavailableError, ValidationError
from polybergman.expansion import (
    approx_kernel,
    blowup_error_study,
    blowup_lhs,
    default_blowup_grid,
    eval_L1,
    eval_L2,
    loglog_slope,
)
from polybergman.jetcas.solver import solve_expansion_q1, solve_expansion_q2_pair
from polybergman.potential import HermitianPotential, gaussian, q_jet, quartic
from polybergman.sources import GaussianSource

from .conftest import points_in_disk

MIXED = HermitianPotential.from_terms({(1, 1): 1.0, (2, 2): 0.2, (2, 1): 0.05 + 0.02j, (3, 1): 0.01j})


@pytest.fixture(scope="module")
def symbolic_q1():
    return solve_expansion_q1(1)


@pytest.fixture(scope="module")
def symbolic_q2():
    return solve_expansion_q2_pair(2)


@given(points_in_disk(0.7), points_in_disk(0.7))
def test_numeric_q1_coefficients_match_symbolic(symbolic_q1, z, w):
    values = q_jet(MIXED, z, w, 4)
    for j in (0, 1):
        num = eval_L1(MIXED, z, w, j)
        sym = symbolic_q1[j].evaluate(values)
        assert abs(num - sym) <= 1e-12 * (1 + abs(sym))


@given(points_in_disk(0.7), points_in_disk(0.7))
def test_numeric_q2_coefficients_match_symbolic(symbolic_q2, z, w):
    values = q_jet(MIXED, z, w, 4)
    u, ubar = -(z - w), -(np.conj(z) - np.conj(w))
    for j in (0, 1, 2):
        num = eval_L2(MIXED, z, w, j)
        sym = symbolic_q2[j].evaluate(values, u, ubar)
        assert abs(num - sym) <= 1e-12 * (1 + abs(sym))


@given(st.floats(0.5, 20), points_in_disk(0.5), points_in_disk(0.5))
def test_gaussian_bianalytic_expansion_is_exact(m, z, w):
    ref = gaussian_poly_kernel(2, m, z, w)
    assert abs(approx_kernel(gaussian(), m, 2, 0, z, w) - ref) <= 1e-12 * abs(ref)


@given(st.floats(0.5, 20), points_in_disk(0.5), points_in_disk(0.5))
def test_gaussian_analytic_expansion_is_exact(m, z, w):
    ref = gaussian_poly_kernel(1, m, z, w)
    assert abs(approx_kernel(gaussian(), m, 1, 1, z, w) - ref) <= 1e-12 * abs(ref)


def test_unavailable_orders():
    with pytest.raises(OrderUnavailableError):
        eval_L1(gaussian(), 0, 0, 2)
    with pytest.raises(OrderUnavailableError):
        approx_kernel(gaussian(), 1.0, 3, 0, 0, 0)


def test_blowup_lhs_is_exact_for_gaussian():
    src = GaussianSource(2, 10.0)
    for xi, eta in default_blowup_grid():
        assert blowup_lhs(src, gaussian(), 10.0, 0.2, xi, eta) == pytest.approx(limit_blowup_kernel(xi, eta),
                                                                                  abs=1e-12)


def test_default_grid_shape():
    grid = default_blowup_grid()
    assert len(grid) == 9
    assert all(abs(x - y) <= 2 for x, y in grid)
    assert all(abs(abs(x - y) ** 2 - 2) > 0.1 for x, y in grid)


def test_gaussian_control_collapses():
    st_ = blowup_error_study(lambda m: GaussianSource(2, m), gaussian(), 0.3, default_blowup_grid(), [20, 40])
    assert max(r.sup_error for r in st_.rows) < 1e-10


def test_m_list_must_increase():
    with pytest.raises(ValidationError):
        blowup_error_study(lambda m: GaussianSource(2, m), gaussian(), 0, default_blowup_grid(), [40, 20])


@given(st.floats(-2, 0.5), st.floats(1e-3, 1e3))
def test_loglog_slope_recovers_power_law(p, c):
    ms = [10, 20, 40, 80]
    assert loglog_slope(ms, [c * m**p for m in ms]) == pytest.approx(p, abs=1e-9)


def test_loglog_slope_needs_two_points():
    assert loglog_slope([10], [1.0]) is None


def test_quartic_leading_order_agrees_with_expansion():
    # the quartic approx kernel is a genuine approximation: relative gap shrinks with m
    P = quartic(0.1)
    z, w = 0.05, 0.07j
    gaps = []
    for m in (20, 80):
        a0 = abs(approx_kernel(P, m, 2, 0, z, w))
        a1 = abs(approx_kernel(P, m, 2, 1, z, w))
        gaps.append(abs(a1 - a0) / a1)
    assert gaps[1] < gaps[0] and math.isfinite(gaps[0])
