import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polybergman.closedform import gaussian_correlation, koshelev_kernel
from polybergman.errors import OutOfDomainError, ValidationError
from polybergman.gram import BasisSpec, QuadratureSpec, gram_kernel_build, inner_products_disk_constant
from polybergman.potential import DomainSpec, HermitianPotential, gaussian, quartic
from polybergman.sources import GramSourceFactory, suggested_n

from .conftest import points_in_disk

DISK = DomainSpec()


@pytest.fixture(scope="module")
def disk_kernels():
    return {q: gram_kernel_build(DISK, None, BasisSpec(q, 40)) for q in (1, 2, 3)}


def test_exact_disk_inner_products_small_case():
    G = inner_products_disk_constant(2, 2)
    # basis order: 1, z, conj z, |z|^2
    assert G[0][0] == 1 and G[1][1] == pytest.approx(1 / 2) and G[0][3] == pytest.approx(1 / 2)
    assert G[0][1] == 0 and G[1][2] == 0


@pytest.mark.parametrize("q", [1, 2, 3])
def test_disk_gram_matches_closed_form(disk_kernels, q, rng):
    z = 0.6 * np.sqrt(rng.uniform(size=20)) * np.exp(2j * np.pi * rng.uniform(size=20))
    w = 0.6 * np.sqrt(rng.uniform(size=20)) * np.exp(2j * np.pi * rng.uniform(size=20))
    got = disk_kernels[q].kernel(z, w)
    ref = koshelev_kernel(q, z, w)
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-6


def test_disk_gram_rejects_points_outside(disk_kernels):
    with pytest.raises(OutOfDomainError):
        disk_kernels[1].kernel(1.1, 0)


def test_constant_weight_only_on_unit_disk():
    with pytest.raises(ValidationError):
        gram_kernel_build(DomainSpec("disk", 0j, 2.0), None, BasisSpec(1, 5))


@given(points_in_disk(0.8), points_in_disk(0.8))
def test_gram_kernel_is_hermitian(z, w):
    K = gram_kernel_build(DISK, None, BasisSpec(2, 15))
    a, b = K.kernel(z, w), K.kernel(w, z)
    assert abs(a - np.conj(b)) <= 1e-12 * (1 + abs(a))


@given(st.lists(points_in_disk(0.8), min_size=2, max_size=6))
def test_gram_kernel_matrix_is_positive_semidefinite(pts):
    K = gram_kernel_build(DISK, None, BasisSpec(2, 15))
    z = np.array(pts)
    M = K.kernel(z[:, None], z[None, :])
    assert np.min(np.linalg.eigvalsh(M)) >= -1e-9 * np.real(np.trace(M))


@pytest.mark.parametrize("q", [1, 2])
@pytest.mark.parametrize("m", [1.0, 5.0])
def test_gaussian_gram_matches_closed_form(q, m, rng):
    K = gram_kernel_build(DomainSpec("plane", m=m), gaussian(), BasisSpec(q, 30))
    z = 0.5 * np.sqrt(rng.uniform(size=25)) * np.exp(2j * np.pi * rng.uniform(size=25))
    w = z + 0.2 * np.exp(2j * np.pi * rng.uniform(size=25))
    got, ref = K.normalized(z, w), gaussian_correlation(q, m, z, w)
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-8


def test_dense_path_agrees_with_radial_blocking():
    dom = DomainSpec("plane", m=3.0)
    a = gram_kernel_build(dom, quartic(0.1), BasisSpec(2, 20))
    b = gram_kernel_build(dom, quartic(0.1), BasisSpec(2, 20, radial_blocking=False))
    z, w = np.array([0.1 + 0.2j, -0.3]), np.array([0.2, 0.1j])
    np.testing.assert_allclose(b.normalized(z, w), a.normalized(z, w), rtol=1e-9)


def test_harmonic_perturbation_leaves_modulus_unchanged():
    # Q + Re(h z^2) differs from Q by a harmonic term, so |K| omega^(1/2) ... is unchanged
    P = HermitianPotential.from_terms({(1, 1): 1.0, (2, 0): 0.1, (0, 2): 0.1})
    m = 3.0
    K = gram_kernel_build(DomainSpec("plane", m=m), P, BasisSpec(2, 30))
    z, w = np.array([0.1 + 0.2j, -0.3, 0.2j]), np.array([0.2, 0.1 - 0.1j, 0.3])
    np.testing.assert_allclose(np.abs(K.normalized(z, w)), np.abs(gaussian_correlation(2, m, z, w)), rtol=1e-9)


def test_plane_domain_drops_radius():
    assert DomainSpec("plane", radius=1.0, m=2.0).radius is None


def test_lift_reduces_to_kernel():
    K = gram_kernel_build(DomainSpec("plane", m=2.0), gaussian(), BasisSpec(2, 20))
    z, w = 0.1 + 0.1j, -0.2
    assert K.lift(z, z, w, w) == pytest.approx(K.kernel(z, w))


def test_factory_refinement_settles():
    fac = GramSourceFactory(quartic(0.1), 2)
    n0 = suggested_n(quartic(0.1), 20, fac._radius(20), 2)
    target = np.array([gaussian_correlation(2, 20, 0.0, 0.0).real])
    vals, info = fac.refine(20, lambda src: np.real(np.atleast_1d(src.normalized(0.0, 0.0))), target)
    assert info["n"] > n0 and info["truncation_estimate"] < 1e-10


def test_small_quadrature_spec_is_accepted():
    K = gram_kernel_build(DomainSpec("plane", m=2.0), quartic(0.1), BasisSpec(1, 10),
                          QuadratureSpec(radial_nodes=64))
    assert K.diag(0.0) > 0
