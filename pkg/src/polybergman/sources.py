"""Interchangeable kernel sources.

Every source offers ``kernel``, ``lift``, ``normalized`` (kernel times
sqrt(omega(z) omega(w))), ``lift_normalized``, ``weight`` and
``log_weight``, so studies can swap the Gram oracle, closed forms and the
truncated expansion without changing code.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from . import closedform
from .expansion import approx_correlation, approx_kernel, approx_amplitude
from .errors import ValidationError
from .gram import BasisSpec, GramKernel, QuadratureSpec, gram_kernel_build
from .potential import DomainSpec, HermitianPotential, eval_polarized, eval_potential, gaussian

log = logging.getLogger(__name__)


@runtime_checkable
class KernelSource(Protocol):
    q: int

    def kernel(self, z, w): ...

    def lift(self, z, zprime, w, wprime): ...

    def normalized(self, z, w): ...

    def lift_normalized(self, z, zprime, w, wprime): ...

    def weight(self, z): ...

    def log_weight(self, z): ...


def source_q(src) -> int:
    return src.basis.q if isinstance(src, GramKernel) else src.q


@dataclass(frozen=True)
class GaussianSource:
    """Closed-form kernels for the weight exp(-2m|z|^2) on the plane."""

    q: int
    m: float
    potential: HermitianPotential = field(default_factory=gaussian)

    def kernel(self, z, w):
        return closedform.gaussian_poly_kernel(self.q, self.m, z, w)

    __call__ = kernel

    def lift(self, z, zprime, w, wprime):
        return closedform.gaussian_poly_lift(self.q, self.m, z, zprime, w, wprime)

    def normalized(self, z, w):
        return closedform.gaussian_correlation(self.q, self.m, z, w)

    def lift_normalized(self, z, zprime, w, wprime):
        return closedform.gaussian_lift_correlation(self.q, self.m, z, zprime, w, wprime)

    def log_weight(self, z):
        return -2 * self.m * np.abs(np.asarray(z)) ** 2

    def weight(self, z):
        return np.exp(self.log_weight(z))

    def diag(self, z):
        return np.real(self.kernel(z, z))


@dataclass(frozen=True)
class KoshelevSource:
    """Unit disk with the constant weight 1/pi."""

    q: int
    m: None = None
    potential: None = None

    def kernel(self, z, w):
        return closedform.koshelev_kernel(self.q, z, w)

    __call__ = kernel

    def lift(self, z, zprime, w, wprime):
        return closedform.koshelev_lift(self.q, z, zprime, w, wprime)

    def normalized(self, z, w):
        return self.kernel(z, w) / math.pi

    def lift_normalized(self, z, zprime, w, wprime):
        return self.lift(z, zprime, w, wprime) / math.pi

    def log_weight(self, z):
        return np.full(np.shape(z), -math.log(math.pi))

    def weight(self, z):
        return np.exp(self.log_weight(z))

    def diag(self, z):
        return np.real(self.kernel(z, z))


@dataclass(frozen=True)
class ApproxSource:
    """Truncated expansion sum_j m^{q-j} L^q_j(z, w) exp(2 m Q(z, w))."""

    potential: HermitianPotential
    m: float
    q: int
    k: int = 0

    def _each(self, fn, *args):
        arrs = [np.asarray(a, dtype=complex) for a in args]
        if all(a.ndim == 0 for a in arrs):
            return fn(*[complex(a) for a in arrs])
        shape = np.broadcast_shapes(*[a.shape for a in arrs])
        flat = [np.broadcast_to(a, shape).ravel() for a in arrs]
        return np.array([fn(*v) for v in zip(*flat)], dtype=complex).reshape(shape)

    def kernel(self, z, w):
        return self._each(lambda a, b: approx_kernel(self.potential, self.m, self.q, self.k, a, b), z, w)

    __call__ = kernel

    def lift(self, z, zprime, w, wprime):
        def one(a, ap, b, bp):
            amp = approx_amplitude(self.potential, self.m, self.q, self.k, a, b, ap, bp)
            return amp * complex(np.exp(2 * self.m * eval_polarized(self.potential, a, b)))

        return self._each(one, z, zprime, w, wprime)

    def normalized(self, z, w):
        return self._each(lambda a, b: approx_correlation(self.potential, self.m, self.q, self.k, a, b), z, w)

    def lift_normalized(self, z, zprime, w, wprime):
        return self._each(
            lambda a, ap, b, bp: approx_correlation(self.potential, self.m, self.q, self.k, a, b, ap, bp),
            z, zprime, w, wprime,
        )

    def log_weight(self, z):
        return -2 * self.m * eval_potential(self.potential, z)

    def weight(self, z):
        return np.exp(self.log_weight(z))

    def diag(self, z):
        return np.real(self.kernel(z, z))


# -- Gram sources with degree selection -----------------------------------------------------


def peak_degree(P: HermitianPotential, m: float, rho: float, center: complex = 0j) -> float:
    """Holomorphic degree whose weighted modulus peaks at radius ``rho``.

    |z|^{2j} exp(-2 m Q) peaks where 2 m rho dQ/drho = 2 j (up to the basis
    shift), so j = m rho dQ/drho. The derivative is taken along 32 rays and
    the maximum is used.
    """
    t = 2 * np.pi * np.arange(32) / 32
    h = 1e-6 * max(rho, 1e-3)
    zp = center + (rho + h) * np.exp(1j * t)
    zm = center + max(rho - h, 0.0) * np.exp(1j * t)
    dq = (eval_potential(P, zp) - eval_potential(P, zm)) / (rho + h - max(rho - h, 0.0))
    return float(m * rho * np.max(dq))


def suggested_n(P: HermitianPotential, m: float, rho: float, q: int = 1, center: complex = 0j) -> int:
    j = max(peak_degree(P, m, rho, center), 0.0)
    return int(math.ceil(j + 8 * math.sqrt(j + 1) + 10 + q))


@dataclass
class GramSourceFactory:
    """Builds Gram kernels on the plane and refines the degree on demand.

    Refinement protocol: start from ``suggested_n`` at the largest radius of
    interest, compare against a kernel with ``growth`` times more degrees, and
    keep growing until the change is below ``fraction`` of the measured error
    to the target values (or the absolute floor ``atol``).
    """

    potential: HermitianPotential
    q: int
    rho_max: float | None = None
    z0: complex = 0j
    spread: float = 2.5
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    cache: object = None
    growth: float = 1.25
    fraction: float = 0.1
    atol: float = 1e-13
    max_rounds: int = 6

    def build(self, m: float, n: int) -> GramKernel:
        dom = DomainSpec(kind="plane", m=m)
        return gram_kernel_build(dom, self.potential, BasisSpec(self.q, n), self.quadrature, self.cache)

    def _radius(self, m: float) -> float:
        if self.rho_max is not None:
            return self.rho_max
        from .potential import laplacian

        return abs(self.z0) + self.spread / math.sqrt(2 * m * laplacian(self.potential, self.z0))

    def __call__(self, m: float, n: int | None = None) -> GramKernel:
        n = n if n is not None else suggested_n(self.potential, m, self._radius(m), self.q)
        return self.build(m, n)

    def refine(self, m: float, evaluate, targets):
        n0 = suggested_n(self.potential, m, self._radius(m), self.q)
        v0 = evaluate(self.build(m, n0))
        for _ in range(self.max_rounds):
            n1 = int(math.ceil(n0 * self.growth)) + 4
            v1 = evaluate(self.build(m, n1))
            trunc = float(np.max(np.abs(v1 - v0)))
            err = float(np.max(np.abs(v1 - targets)))
            if trunc <= max(self.fraction * err, self.atol):
                return v1, {"n": n1, "truncation_estimate": trunc}
            log.info("m=%g: n=%d truncation %.3e vs error %.3e; growing", m, n1, trunc, err)
            n0, v0 = n1, v1
        raise ValidationError(f"degree refinement did not settle at m={m} (last n={n0})")


def make_source(kind: str, *, q: int, m: float | None = None, potential: HermitianPotential | None = None,
                k: int = 0, n: int | None = None, quadrature: QuadratureSpec | None = None, cache=None):
    """Factory used by the CLI: kind in {gram, gaussian, koshelev, approx}."""
    if kind == "koshelev":
        return KoshelevSource(q)
    if kind == "gaussian":
        if m is None:
            raise ValidationError("gaussian source needs m")
        return GaussianSource(q, m)
    if kind == "approx":
        if m is None or potential is None:
            raise ValidationError("approx source needs m and a potential")
        return ApproxSource(potential, m, q, k)
    if kind == "gram":
        quad = quadrature or QuadratureSpec()
        if potential is None:
            return gram_kernel_build(DomainSpec(), None, BasisSpec(q, n or 40), quad, cache)
        if m is None:
            raise ValidationError("gram source with a potential needs m")
        fac = GramSourceFactory(potential, q, quadrature=quad, cache=cache)
        return fac(m, n)
    raise ValidationError(f"unknown kernel source {kind!r}")
