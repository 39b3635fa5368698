import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polybergman.bounds import (
    CHAIN_CONSTANT,
    PROPOSITIONS,
    BianalyticTestFn,
    DiskRule,
    SubharmonicRadialPsi,
    bound_dbar_origin,
    bound_dbar_rescaled,
    bound_value_origin,
    bound_value_origin_neg,
    bound_value_rescaled,
    check_lemma1,
    check_subharmonic,
    green_potential_origin,
    kernel_diag_bound,
    run_harness,
    weighted_norm2,
)
from polybergman.errors import DivergentError, PsiNotNonpositiveError, ValidationError
from polybergman.potential import gaussian, quartic

ONE = BianalyticTestFn((1,), 0, (0,))
ZBAR = BianalyticTestFn((0,), 1, (0,))
ZERO_PSI = SubharmonicRadialPsi(0.0, 0.0)
GAUSS_PSI = SubharmonicRadialPsi(1.0, 0.0)

seeds = st.integers(0, 2**32 - 1)


def test_green_potential_of_unit_density():
    assert green_potential_origin(lambda r: 1.0) == pytest.approx(-1.0, abs=1e-8)


@given(st.floats(0, 3), st.floats(0, 3))
def test_green_potential_of_polynomial_density(a, b):
    psi = SubharmonicRadialPsi(a, b)
    assert green_potential_origin(psi.laplacian) == pytest.approx(psi.green_origin_exact(), abs=1e-8)


def test_green_potential_rejects_nonintegrable_density():
    with pytest.raises(DivergentError):
        green_potential_origin(lambda r: 1.0 / (1.0 - r) ** 2)


def test_disk_rule_area_and_moment():
    rule = DiskRule()
    assert rule.integrate(lambda z: np.ones_like(z)) == pytest.approx(math.pi, rel=1e-13)
    assert rule.integrate(lambda z: np.abs(z) ** 4) == pytest.approx(math.pi / 3, rel=1e-13)


def test_lemma1_examples():
    assert check_lemma1(ONE, ZERO_PSI) == pytest.approx((0.5, 0.5), rel=1e-12)
    assert check_lemma1(ZBAR, ZERO_PSI) == pytest.approx((0.0, 0.25), rel=1e-12, abs=1e-15)


def test_dbar_origin_example():
    assert bound_dbar_origin(ZBAR, ZERO_PSI) == pytest.approx((1.0, 1.5), rel=1e-12)


def test_value_origin_examples():
    assert bound_value_origin_neg(ONE, ZERO_PSI) == pytest.approx((1.0, 8.0), rel=1e-12)
    lhs, rhs = bound_value_origin(ONE, GAUSS_PSI)
    norm = weighted_norm2(ONE, GAUSS_PSI)
    assert lhs == 1 and rhs == pytest.approx(8 / math.pi * 7 * norm, rel=1e-8)


def test_nonpositive_psi_is_enforced():
    with pytest.raises(PsiNotNonpositiveError):
        bound_value_origin_neg(ONE, SubharmonicRadialPsi(1.0, 0.0, const=0.5))


def test_kernel_diagonal_bound_example():
    assert kernel_diag_bound(gaussian(), 10, 1.0, normalized=True) == pytest.approx(
        80 / math.pi * 7 * math.exp(2), rel=1e-12)


def test_parameter_validation():
    with pytest.raises(ValidationError):
        bound_value_rescaled(ONE, gaussian(), 0.5, 1.0)
    with pytest.raises(ValidationError):
        bound_dbar_rescaled(ONE, gaussian(), 2.0, 1.0, constant="bogus")
    with pytest.raises(ValidationError):
        SubharmonicRadialPsi(-1.0, 0.0)


def test_subharmonic_check_warns():
    assert check_subharmonic(GAUSS_PSI)
    with pytest.warns(RuntimeWarning):
        assert not check_subharmonic(lambda z: -np.abs(z) ** 2)


@given(seeds, st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_scaling_covariance(seed, s):
    rng = np.random.default_rng(seed)
    u = BianalyticTestFn.random(rng)
    psi = SubharmonicRadialPsi.random(rng)
    a, b = check_lemma1(u, psi), check_lemma1(u.scaled(s), psi)
    assert b[0] == pytest.approx(abs(s) ** 2 * a[0], rel=1e-9, abs=1e-300)
    assert b[1] == pytest.approx(abs(s) ** 2 * a[1], rel=1e-9)


@given(seeds, st.floats(-3, 3))
def test_constant_shift_of_psi_is_invisible(seed, c):
    rng = np.random.default_rng(seed)
    u = BianalyticTestFn.random(rng)
    psi = SubharmonicRadialPsi.random(rng)
    shifted = SubharmonicRadialPsi(psi.a, psi.b, psi.const + c, psi.h1, psi.h2)
    for check in (check_lemma1, bound_dbar_origin, bound_value_origin):
        a, b = check(u, psi), check(u, shifted)
        assert b == pytest.approx(a, rel=1e-8, abs=1e-12)


@given(seeds)
def test_origin_estimates_hold(seed):
    rng = np.random.default_rng(seed)
    u = BianalyticTestFn.random(rng)
    psi = SubharmonicRadialPsi.random(rng)
    for lhs, rhs in (check_lemma1(u, psi), bound_dbar_origin(u, psi), bound_value_origin(u, psi)):
        assert lhs <= rhs * (1 + 1e-8)


@pytest.mark.xfail(strict=True, reason="the displayed derivative estimate lacks the m/delta^2 rescaling factor")
def test_displayed_dbar_estimate_counterexample():
    lhs, rhs = bound_dbar_rescaled(ZBAR, gaussian(), 10, 1.0)
    assert lhs <= rhs


def test_dbar_estimate_with_chain_factor():
    lhs, rhs = bound_dbar_rescaled(ZBAR, gaussian(), 10, 1.0, constant=CHAIN_CONSTANT)
    assert lhs == pytest.approx(1.0) and lhs <= rhs


def test_rescaled_value_estimate_on_quartic():
    lhs, rhs = bound_value_rescaled(ONE, quartic(0.1), 20, 1.0, 0.3)
    assert lhs <= rhs


def test_harness_is_deterministic_and_clean():
    a = run_harness(20, seed=3).to_dict()
    b = run_harness(20, seed=3).to_dict()
    assert a == b
    clean = {k: v for k, v in a["propositions"].items() if k != "dbar_rescaled_display"}
    assert set(clean) | {"dbar_rescaled_display"} == set(PROPOSITIONS)
    assert all(v["violations"] == 0 and v["trials"] == 20 for v in clean.values())
