import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polybergman.errors import NonpositiveLiftError
from polybergman.metrics import (
    SourceMetrics,
    first_metric_limit,
    poly_metric1_density,
    poly_metric2,
    rescaled_metric_study,
    second_metric_limit,
)
from polybergman.potential import gaussian
from polybergman.sources import GaussianSource, KoshelevSource

from .conftest import points_in_disk

EPS_PRIME = [0j, 0.5, 0.7 + 0.3j, -1j, 1.2 - 0.9j]


@given(points_in_disk(0.7))
def test_disk_analytic_second_metric(z):
    got = SourceMetrics(KoshelevSource(1)).metric2(z)
    assert got == pytest.approx(2 / (1 - abs(z) ** 2) ** 2, rel=1e-7)


@given(points_in_disk(0.7))
def test_disk_bianalytic_second_metric_diagonal_value(z):
    # log E(z, z + eps) = 2|z|^2 - z conj(eps) - conj(z) eps + |eps|^2 / 2 + ... at the origin,
    # and the mixed Laplacian of that gives 2 + 1 + 1 + 1 = 5
    sample = SourceMetrics(KoshelevSource(2)).metric2_poly(z, 0)
    assert sample.isothermal == pytest.approx(5 / (1 - abs(z) ** 2) ** 2, rel=1e-7)
    assert abs(sample.dz2) < 1e-6


@pytest.mark.xfail(strict=True, reason="the quoted value 4 at the origin does not follow from the definition")
def test_disk_bianalytic_second_metric_quoted_value():
    assert SourceMetrics(KoshelevSource(2)).metric2_poly(0, 0).isothermal == pytest.approx(4, rel=1e-6)


def test_disk_metric_matrix_at_origin():
    M = SourceMetrics(KoshelevSource(2)).matrix(0, include_weight=False)
    np.testing.assert_allclose(M, [[4, 0], [0, 2]], atol=1e-8)


@pytest.mark.parametrize("src", [KoshelevSource(2), KoshelevSource(3), GaussianSource(2, 5.0)],
                         ids=["disk-q2", "disk-q3", "gaussian-q2"])
def test_metric_matrix_is_positive_semidefinite(src, rng):
    sm = SourceMetrics(src)
    for _ in range(10):
        z = 0.6 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
        M = sm.matrix(z)
        np.testing.assert_allclose(M, M.conj().T, atol=1e-12 * np.real(np.trace(M)))
        assert np.min(np.linalg.eigvalsh(M)) >= -1e-8 * np.real(np.trace(M))


@given(points_in_disk(0.6), st.complex_numbers(max_magnitude=0.2, allow_nan=False, allow_infinity=False))
def test_density_is_hermitian_form_of_matrix(z, eps):
    sm = SourceMetrics(KoshelevSource(2))
    M = sm.matrix(z)
    v = np.array([1, eps])
    assert sm.density(z, eps) == pytest.approx(np.real(v.conj() @ M @ v), rel=1e-6, abs=1e-9)


@given(points_in_disk(0.6))
def test_density_at_zero_offset_is_first_metric(z):
    sm = SourceMetrics(KoshelevSource(2))
    assert sm.density(z, 0) == sm.metric1(z)


@given(st.floats(1, 40), points_in_disk(1.0))
def test_gaussian_metrics_are_constant(m, z):
    sm = SourceMetrics(GaussianSource(1, m))
    assert sm.metric1(z) == pytest.approx(2 * m / math.pi, rel=1e-12)
    assert sm.metric2(z) == pytest.approx(2 * m, rel=1e-7)


def test_second_metric_step_refinement_is_stable():
    src = KoshelevSource(2)
    a = SourceMetrics(src, step=1e-2).metric2_poly(0.3, 0.05)
    b = SourceMetrics(src, step=5e-3).metric2_poly(0.3, 0.05)
    err = a.provenance["isothermal_error"] + b.provenance["isothermal_error"]
    assert abs(a.isothermal - b.isothermal) <= 10 * err + 1e-9


def test_nonpositive_lift_raises():
    def lift(z, zp, w, wp):
        return -np.ones(np.shape(z))

    with pytest.raises(NonpositiveLiftError):
        poly_metric2(lift, 0.1, 0.1, 1e-2)


def test_limits_at_zero():
    assert first_metric_limit(0) == pytest.approx(2 / math.pi)
    assert second_metric_limit(0) == (pytest.approx(2.0), 0)


def test_gaussian_rescaled_limits_are_exact():
    study = rescaled_metric_study(lambda m: GaussianSource(2, m), gaussian(), 0.2 - 0.1j, EPS_PRIME, [5, 20])
    for row in study.rows:
        assert row.first_error < 1e-10 and row.matrix_error < 1e-10
        assert row.isothermal_error < 1e-7 and row.dz2_error < 1e-7


def test_rescaled_dz2_uses_conjugate_offset():
    # the conj(eps')^2 form matches; eps'^2 would be off by |eps'^2 - conj(eps')^2| / d^2
    src = GaussianSource(2, 10.0)
    e = 0.7 + 0.3j
    sample = SourceMetrics(src).metric2_poly(0, e / math.sqrt(20))
    d = 2 + abs(e) ** 2
    assert abs(sample.dz2 / 20 - np.conj(e) ** 2 / d**2) < 1e-7
    assert abs(sample.dz2 / 20 - e**2 / d**2) > 1e-2


def test_sample_serializes():
    d = SourceMetrics(KoshelevSource(2), tag="disk").metric2_poly(0.1, 0.1).to_dict()
    assert d["provenance"]["source"] == "disk" and len(d["z"]) == 2


def test_density_helper_matches_method():
    src = KoshelevSource(2)
    assert poly_metric1_density(src.lift_normalized, None, 0.2, 0.1) == SourceMetrics(src).density(0.2, 0.1)
