"""Bergman's first and second metrics and their polyanalytic extensions.

Low-level operations take plain callables (a diagonal, a weight, a lift),
so any kernel can be plugged in. ``SourceMetrics`` adapts a kernel source
and keeps the exponential weight out of the finite differences: it works
with ``lift_normalized`` and adds the exact Laplacian of -log(weight).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NonpositiveDiagonalError, NonpositiveLiftError, ValidationError
from .potential import HermitianPotential, laplacian, local_length

__all__ = [
    "MetricSample",
    "metric1_density",
    "metric2_density",
    "poly_metric1_matrix",
    "poly_metric1_density",
    "poly_metric2",
    "SourceMetrics",
    "RescaledMetricStudy",
    "rescaled_metric_study",
    "first_metric_limit",
    "second_metric_limit",
]

# Step for finite differences, as a fraction of the local length scale.
DEFAULT_STEP = 1e-2


@dataclass(frozen=True)
class MetricSample:
    z: complex
    isothermal: float
    dz2: complex
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "isothermal": self.isothermal,
            "dz2": [self.dz2.real, self.dz2.imag],
            "provenance": self.provenance,
        }


# -- finite-difference Hessian -------------------------------------------------------------


def _hessian_once(fun, center: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Hessian of ``fun`` (vectorized over leading axes) at ``center``."""
    n = center.size
    eye = np.eye(n)
    pts = [center]
    for i in range(n):
        pts += [center + h * eye[i], center - h * eye[i]]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pairs:
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            pts.append(center + h * (si * eye[i] + sj * eye[j]))
    vals = np.asarray(fun(np.array(pts)))
    f0 = vals[0]
    H = np.zeros((n, n), dtype=vals.dtype)
    for i in range(n):
        H[i, i] = (vals[1 + 2 * i] - 2 * f0 + vals[2 + 2 * i]) / h**2
    base = 1 + 2 * n
    for idx, (i, j) in enumerate(pairs):
        pp, pm, mp, mm = vals[base + 4 * idx: base + 4 * idx + 4]
        H[i, j] = H[j, i] = (pp - pm - mp + mm) / (4 * h**2)
    return H


def _hessian(fun, center, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Richardson-extrapolated Hessian and an entrywise error estimate |D(h/2) - D(h)| / 3."""
    center = np.asarray(center, dtype=float)
    coarse = _hessian_once(fun, center, h)
    fine = _hessian_once(fun, center, h / 2)
    return (4 * fine - coarse) / 3, np.abs(fine - coarse) / 3


# -- first and second metric ----------------------------------------------------------------


def metric1_density(diag: Callable, weight: Callable | None, z) -> float:
    """K(z, z) * omega(z). Pass ``weight=None`` when ``diag`` already includes the weight."""
    val = float(np.real(diag(z)))
    return val if weight is None else val * float(np.real(weight(z)))


def metric2_density(diag: Callable, z, h: float, *, log_diag: Callable | None = None,
                    with_error: bool = False):
    """Laplacian d dbar of log K(z, z), by the 5-point stencil plus one Richardson step.

    ``log_diag`` may be given instead of ``diag`` when K(z, z) itself would
    overflow; it must return log K(z, z).
    """
    z = complex(z)

    def logk(xy):
        pts = xy[..., 0] + 1j * xy[..., 1]
        if log_diag is not None:
            return np.asarray(log_diag(pts), dtype=float)
        d = np.real(np.asarray(diag(pts)))
        if np.any(d <= 0):
            raise NonpositiveDiagonalError(f"kernel diagonal is not positive near z = {z}")
        return np.log(d)

    H, err = _hessian(logk, [z.real, z.imag], h)
    val = float(0.25 * (H[0, 0] + H[1, 1]))
    est = float(0.25 * (err[0, 0] + err[1, 1]))
    return (val, est) if with_error else val


def poly_metric1_matrix(lift: Callable, weight: Callable | None, q: int, z, h: float) -> np.ndarray:
    """Coefficient matrix M with E(z, z+eps; z, z+eps) omega(z) = sum_{k,l} conj(eps)^k eps^l M[k, l].

    The lift at (z, z+a; z, z+b) is a polynomial of degree q-1 in conj(a) and
    in b, so q x q samples on a circle of radius ``h`` recover it exactly
    (a discrete Fourier transform). The result is Hermitian-symmetrized.
    """
    if q < 1:
        raise ValidationError("q must be >= 1")
    z = complex(z)
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    a = h * np.conj(roots)[:, None]
    b = h * roots[None, :]
    samples = np.asarray(lift(z, z + a, z, z + b), dtype=complex)
    samples = np.broadcast_to(samples, (q, q))
    coef = np.fft.fft2(samples) / q**2
    k = np.arange(q)
    coef = coef / h ** (k[:, None] + k[None, :])
    if weight is not None:
        coef = coef * float(np.real(weight(z)))
    return 0.5 * (coef + coef.conj().T)


def poly_metric1_density(lift: Callable, weight: Callable | None, z, eps) -> float:
    """E(z, z+eps; z, z+eps) * omega(z)."""
    zp = complex(z) + complex(eps)
    val = float(np.real(lift(z, zp, z, zp)))
    return val if weight is None else val * float(np.real(weight(z)))


def poly_metric2(lift: Callable, z, eps, h: float, *, log_lift: Callable | None = None,
                 isothermal_shift: float = 0.0, tag: str = "") -> MetricSample:
    """Second polyanalytic metric from F(z, eps) = log E(z, z+eps; z, z+eps).

    Isothermal part (Lap_z + 2 Lap_eps - dbar_z d_eps - d_z dbar_eps) F, and
    the dz^2 coefficient (d_z d_eps - d_eps^2) F. ``isothermal_shift`` adds a
    term known in closed form (the Laplacian of -log omega when ``log_lift``
    is a normalized lift).
    """
    z = complex(z)
    eps = complex(eps)

    def F(v):
        zz = v[..., 0] + 1j * v[..., 1]
        ee = v[..., 2] + 1j * v[..., 3]
        if log_lift is not None:
            return np.asarray(log_lift(zz, ee), dtype=float)
        vals = np.asarray(lift(zz, zz + ee, zz, zz + ee))
        re = np.real(vals)
        if np.any(re <= 0):
            raise NonpositiveLiftError(f"lift is not positive near (z, eps) = ({z}, {eps})")
        return np.log(re)

    H, err = _hessian(F, [z.real, z.imag, eps.real, eps.imag], h)
    x, y, s, t = range(4)
    iso = 0.25 * (H[x, x] + H[y, y]) + 0.5 * (H[s, s] + H[t, t]) - 0.5 * (H[x, s] + H[y, t])
    iso_err = 0.25 * (err[x, x] + err[y, y]) + 0.5 * (err[s, s] + err[t, t]) + 0.5 * (err[x, s] + err[y, t])
    dz_deps = 0.25 * (H[x, s] - 1j * H[x, t] - 1j * H[y, s] - H[y, t])
    deps2 = 0.25 * (H[s, s] - 2j * H[s, t] - H[t, t])
    dz2_err = 0.25 * (err[x, s] + err[x, t] + err[y, s] + err[y, t]) + 0.25 * (err[s, s] + 2 * err[s, t] + err[t, t])
    return MetricSample(
        z=z,
        isothermal=float(iso + isothermal_shift),
        dz2=complex(dz_deps - deps2),
        provenance={"source": tag, "eps": [eps.real, eps.imag], "h": h, "richardson": True,
                    "isothermal_error": float(iso_err), "dz2_error": float(dz2_err)},
    )


# -- adapter for kernel sources -----------------------------------------------------------


def _source_q(src) -> int:
    basis = getattr(src, "basis", None)
    return basis.q if basis is not None else src.q


@dataclass
class SourceMetrics:
    """Metric operations on a kernel source (Gram, closed form or expansion).

    Weighted quantities are computed from ``lift_normalized``; on the double
    diagonal that equals the lift times omega(z).
    """

    source: object
    step: float = DEFAULT_STEP
    tag: str = ""

    @property
    def q(self) -> int:
        return _source_q(self.source)

    @property
    def potential(self) -> HermitianPotential | None:
        return getattr(self.source, "potential", None)

    @property
    def m(self) -> float | None:
        return getattr(self.source, "m", None)

    def length(self, z) -> float:
        if self.potential is not None and self.m:
            return local_length(self.potential, self.m, z)
        return 0.1 * max(1.0 - abs(complex(z)), 1e-3)

    def weight_laplacian(self, z) -> float:
        """Laplacian of -log omega: 2 m Delta Q, or 0 for a constant weight."""
        if self.potential is not None and self.m:
            return float(2 * self.m * laplacian(self.potential, z))
        return 0.0

    # weighted evaluators
    def diag_weighted(self, z):
        return np.real(self.source.normalized(z, z))

    def lift_weighted(self, z, zprime, w, wprime):
        return self.source.lift_normalized(z, zprime, w, wprime)

    def metric1(self, z) -> float:
        return metric1_density(self.diag_weighted, None, z)

    def metric2(self, z, with_error: bool = False):
        def logd(pts):
            d = np.real(np.asarray(self.source.normalized(pts, pts)))
            if np.any(d <= 0):
                raise NonpositiveDiagonalError(f"kernel diagonal is not positive near z = {z}")
            return np.log(d)

        val, err = metric2_density(None, z, self.step * self.length(z), log_diag=logd, with_error=True)
        val += self.weight_laplacian(z)
        return (val, err) if with_error else val

    def matrix(self, z, include_weight: bool = True, radius: float | None = None) -> np.ndarray:
        r = radius if radius is not None else self.length(z)
        if include_weight:
            return poly_metric1_matrix(self.lift_weighted, None, self.q, z, r)
        return poly_metric1_matrix(self.source.lift, None, self.q, z, r)

    def density(self, z, eps) -> float:
        return poly_metric1_density(self.lift_weighted, None, z, eps)

    def metric2_poly(self, z, eps) -> MetricSample:
        def log_lift(zz, ee):
            vals = np.real(np.asarray(self.source.lift_normalized(zz, zz + ee, zz, zz + ee)))
            if np.any(vals <= 0):
                raise NonpositiveLiftError(f"lift is not positive near (z, eps) = ({z}, {eps})")
            return np.log(vals)

        return poly_metric2(None, z, eps, self.step * self.length(z), log_lift=log_lift,
                            isothermal_shift=self.weight_laplacian(z), tag=self.tag)


# -- rescaled asymptotics -------------------------------------------------------------------


def first_metric_limit(eps_prime) -> float:
    return (2 + abs(eps_prime) ** 2) / math.pi


def second_metric_limit(eps_prime) -> tuple[float, complex]:
    """Isothermal part and dz^2 coefficient of the rescaled limit metric.

    The dz^2 coefficient comes out as conj(eps')^2 / (2 + |eps'|^2)^2 when
    the definition is applied to the model lift (2 + |eps'|^2 profile).
    """
    d = 2 + abs(eps_prime) ** 2
    return 1 + 4 / d**2, complex(np.conj(eps_prime)) ** 2 / d**2


@dataclass
class RescaledRow:
    m: float
    n: int | None
    first_error: float
    matrix_error: float
    isothermal_error: float | None
    dz2_error: float | None
    first_values: list[float]


@dataclass
class RescaledMetricStudy:
    z: complex
    eps_prime: list[complex]
    rows: list[RescaledRow]

    @property
    def first_errors_decreasing(self) -> bool:
        e = [r.first_error for r in self.rows]
        return all(b < a for a, b in zip(e, e[1:]))

    def csv_rows(self):
        header = ["m", "n", "first_error", "matrix_error", "isothermal_error", "dz2_error"]
        body = [[r.m, r.n, r.first_error, r.matrix_error, r.isothermal_error, r.dz2_error] for r in self.rows]
        return header, body

    def to_dict(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "eps_prime": [[e.real, e.imag] for e in self.eps_prime],
            "first_errors_decreasing": self.first_errors_decreasing,
            "rows": [
                {"m": r.m, "n": r.n, "first_error": r.first_error, "matrix_error": r.matrix_error,
                 "isothermal_error": r.isothermal_error, "dz2_error": r.dz2_error}
                for r in self.rows
            ],
        }


def _rescaled_first(src, P, m, z, eps_prime) -> np.ndarray:
    scale = 2 * m * laplacian(P, z)
    eps = np.asarray(eps_prime, dtype=complex) / math.sqrt(scale)
    zp = z + eps
    return np.real(np.asarray(src.lift_normalized(z, zp, z, zp))) / scale


def rescaled_metric_study(
    source_for_m: Callable,
    P: HermitianPotential,
    z: complex,
    eps_prime: Iterable[complex],
    m_list: Sequence[float],
    second: bool = True,
) -> RescaledMetricStudy:
    """Rescaled first/second metrics against their large-m limits, one row per m.

    ``source_for_m`` is either a callable m -> source, or an object with a
    ``refine(m, evaluate, targets)`` method (see ``sources.GramSourceFactory``);
    the degree is then refined on the first-metric values.
    """
    z = complex(z)
    eps_prime = [complex(e) for e in eps_prime]
    targets = np.array([first_metric_limit(e) for e in eps_prime])
    rows = []
    for m in m_list:
        n = None
        if hasattr(source_for_m, "refine"):
            holder = {}

            def evaluate(src, m=m):
                holder["src"] = src
                return _rescaled_first(src, P, m, z, eps_prime)

            first, info = source_for_m.refine(m, evaluate, targets)
            src, n = holder["src"], info["n"]
        else:
            src = source_for_m(m)
            first = _rescaled_first(src, P, m, z, eps_prime)
        scale = 2 * m * laplacian(P, z)
        sm = SourceMetrics(src)
        M = sm.matrix(z)
        want = np.diag([2 / math.pi, 1 / math.pi])
        got = np.array([[M[0, 0] / scale, M[0, 1] / scale**1.5], [M[1, 0] / scale**1.5, M[1, 1] / scale**2]])
        iso_err = dz2_err = None
        if second:
            iso_err = dz2_err = 0.0
            for e in eps_prime:
                sample = sm.metric2_poly(z, e / math.sqrt(scale))
                iso_lim, dz2_lim = second_metric_limit(e)
                iso_err = max(iso_err, abs(sample.isothermal / scale - iso_lim))
                dz2_err = max(dz2_err, abs(sample.dz2 / scale - dz2_lim))
        rows.append(RescaledRow(
            m=m, n=n,
            first_error=float(np.max(np.abs(first - targets))),
            matrix_error=float(np.max(np.abs(got - want))),
            isothermal_error=iso_err, dz2_error=dz2_err,
            first_values=[float(v) for v in first],
        ))
    return RescaledMetricStudy(z, eps_prime, rows)
