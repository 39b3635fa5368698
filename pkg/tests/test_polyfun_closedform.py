import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given
from hypothesis import strategies as st

from polybergman.closedform import (
    gaussian_correlation,
    gaussian_poly_kernel,
    gaussian_poly_lift,
    koshelev_kernel,
    koshelev_lift,
    laguerre,
    landau_level_kernel,
    limit_blowup_kernel,
)
from polybergman.errors import OutOfDomainError, ValidationError
from polybergman.polyfun import PolyanalyticPoly, singular_matrix

from .conftest import points_in_disk

coefficient_arrays = st.integers(1, 4).flatmap(lambda q: st.integers(1, 5).flatmap(
    lambda n: st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                       min_size=q * n, max_size=q * n).map(lambda v: np.reshape(v, (q, n)))))


@given(coefficient_arrays)
def test_q_fold_dbar_annihilates(c):
    f = PolyanalyticPoly(c)
    for _ in range(f.q):
        f = f.dbar()
    assert np.all(f.coeffs == 0)


@given(coefficient_arrays, points_in_disk(1.0))
def test_singular_matrix_quadratic_form(c, z):
    f = PolyanalyticPoly(c)
    v = f.vectorize(z)
    form = v.conj() @ singular_matrix(f.q, z) @ v
    assert abs(form - abs(f(z)) ** 2) < 1e-9 * (1 + abs(f(z)) ** 2)


@given(st.integers(0, 3), st.integers(0, 12), st.floats(-5, 20))
def test_laguerre_against_reference(alpha, r, x):
    ref = scipy.special.eval_genlaguerre(r, alpha, x)
    assert laguerre(alpha, r, x) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_laguerre_degree_one_alpha_one():
    assert laguerre(1, 1, 0.7) == pytest.approx(2 - 0.7)


@given(st.integers(1, 4), points_in_disk(0.95))
def test_koshelev_diagonal(q, z):
    assert koshelev_kernel(q, z, z).real == pytest.approx(q * q / (1 - abs(z) ** 2) ** 2, rel=1e-10)


@given(st.integers(1, 4), points_in_disk(0.8), points_in_disk(0.8))
def test_koshelev_hermitian(q, z, w):
    a, b = koshelev_kernel(q, z, w), koshelev_kernel(q, w, z)
    assert abs(a - np.conj(b)) <= 1e-10 * (1 + abs(a))


def test_koshelev_lift_reduces_to_kernel():
    z, w = 0.2 + 0.1j, -0.3j
    assert koshelev_lift(3, z, z, w, w) == pytest.approx(koshelev_kernel(3, z, w))


def test_koshelev_rejects_outside_disk():
    with pytest.raises(OutOfDomainError):
        koshelev_kernel(2, 1.2, 0)


def test_q_out_of_range():
    with pytest.raises(ValidationError):
        gaussian_poly_kernel(0, 1.0, 0, 0)


@given(st.integers(1, 5), st.floats(0.5, 10), points_in_disk(0.5), points_in_disk(0.5))
def test_gaussian_kernel_is_sum_of_landau_levels(q, m, z, w):
    total = sum(landau_level_kernel(r, m, z, w) for r in range(1, q + 1))
    ref = gaussian_poly_kernel(q, m, z, w)
    assert abs(total - ref) <= 1e-9 * (1 + abs(ref))


@given(st.floats(0.5, 10), points_in_disk(1.0), points_in_disk(1.0))
def test_gaussian_q1_is_exponential(m, z, w):
    ref = 2 * m / math.pi * np.exp(2 * m * z * np.conj(w))
    assert abs(gaussian_poly_kernel(1, m, z, w) - ref) <= 1e-12 * abs(ref)


@given(st.floats(0.5, 40), points_in_disk(1.0), points_in_disk(1.0))
def test_gaussian_correlation_modulus_is_translation_invariant(m, z, w):
    a = abs(gaussian_correlation(2, m, z, w))
    b = abs(gaussian_correlation(2, m, z + 0.3, w + 0.3))
    assert a == pytest.approx(b, rel=1e-8, abs=1e-200)


def test_gaussian_lift_reduces_to_kernel():
    z, w = 0.1 + 0.2j, 0.3
    assert gaussian_poly_lift(2, 3.0, z, z, w, w) == pytest.approx(gaussian_poly_kernel(2, 3.0, z, w))


def test_limit_kernel_values():
    assert limit_blowup_kernel(0, 0) == pytest.approx(2 / math.pi)
    assert limit_blowup_kernel(0, math.sqrt(2)) == pytest.approx(0.0, abs=1e-15)
