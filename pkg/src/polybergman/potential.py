"""Hermitian polynomial potentials Q(z) = sum c[a][b] z^a conj(z)^b.

Polarization is exact for this class: Q(z, w) is obtained by replacing
conj(z) with conj(w), so every derivative of Q(z, w) and of the mixed
Laplacian beta(z, w) = d_z dbar_w Q(z, w) is a finite polynomial sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import yaml

from .errors import PositivityError, ValidationError

__all__ = [
    "HermitianPotential",
    "BetaJet",
    "DomainSpec",
    "AssumptionReport",
    "eval_potential",
    "eval_polarized",
    "polarized_derivative",
    "beta_jet",
    "laplacian",
    "phase_theta",
    "dbar_theta",
    "check_assumptions",
]


def _falling(n: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(n, dtype=float)
    for i in range(k):
        out = out * (n - i)
    return out


@dataclass(frozen=True)
class HermitianPotential:
    """Coefficient matrix ``coeffs[a, b]`` of z^a conj(z)^b.

    The matrix must be Hermitian, which is exactly the condition for
    Q(z) to be real on the diagonal.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 2:
            raise ValidationError("coefficient matrix must be square of size >= 2")
        if not np.all(np.isfinite(c)):
            raise ValidationError("coefficients must be finite")
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.max(np.abs(c - c.conj().T)) > 1e-14 * scale:
            raise ValidationError("coefficients violate c[b][a] = conj(c[a][b])")
        # exact symmetrization removes representation noise in the lower triangle
        c = 0.5 * (c + c.conj().T)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], complex]) -> "HermitianPotential":
        """Build from ``{(a, b): c}``; the conjugate partner of each term is added."""
        deg = max(max(a, b) for a, b in terms) if terms else 1
        c = np.zeros((max(deg, 1) + 1,) * 2, dtype=complex)
        for (a, b), v in terms.items():
            c[a, b] = v
            if a != b:
                c[b, a] = np.conj(v)
        return cls(c)

    @classmethod
    def radial(cls, profile: Mapping[int, float]) -> "HermitianPotential":
        """Q(z) = sum_k profile[k] |z|^(2k)."""
        return cls.from_terms({(k, k): float(v) for k, v in profile.items()})

    @property
    def degree(self) -> int:
        nz = np.argwhere(np.abs(self.coeffs) > 0)
        return int(nz.max()) if nz.size else 0

    @property
    def is_radial(self) -> bool:
        off = self.coeffs - np.diag(np.diag(self.coeffs))
        return bool(np.all(off == 0))

    def radial_profile(self) -> np.ndarray:
        """Coefficients p_k with Q(rho) = sum_k p_k rho^(2k) (radial case only)."""
        if not self.is_radial:
            raise ValidationError("potential is not radial")
        return np.real(np.diag(self.coeffs)).copy()

    def fingerprint(self) -> str:
        rows = []
        for a, b in np.argwhere(self.coeffs != 0):
            v = self.coeffs[a, b]
            rows.append(f"{a},{b},{v.real!r},{v.imag!r}")
        return ";".join(rows)

    def to_dict(self) -> dict:
        quads = []
        for a, b in np.argwhere(self.coeffs != 0):
            v = self.coeffs[a, b]
            quads.append([int(a), int(b), float(v.real), float(v.imag)])
        return {"degree": self.degree, "coeffs": quads}

    @classmethod
    def from_dict(cls, data: Mapping) -> "HermitianPotential":
        try:
            deg = int(data["degree"])
            quads = data["coeffs"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"potential record needs 'degree' and 'coeffs': {exc}") from exc
        c = np.zeros((deg + 1, deg + 1), dtype=complex)
        for q in quads:
            if len(q) != 4:
                raise ValidationError(f"coefficient entry must be [a, b, re, im], got {q!r}")
            a, b = int(q[0]), int(q[1])
            if not (0 <= a <= deg and 0 <= b <= deg):
                raise ValidationError(f"index ({a}, {b}) exceeds degree {deg}")
            c[a, b] = complex(float(q[2]), float(q[3]))
        return cls(c)

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "HermitianPotential":
        return cls.from_dict(yaml.safe_load(text))


def _poly2(c: np.ndarray, x, y) -> np.ndarray:
    """Evaluate sum c[a, b] x^a y^b for broadcastable complex arrays x, y."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    x, y = np.broadcast_arrays(x, y)
    na, nb = c.shape
    # Horner in y for each power of x, then Horner in x
    out = np.zeros(x.shape, dtype=complex)
    for a in range(na - 1, -1, -1):
        row = np.zeros(x.shape, dtype=complex)
        for b in range(nb - 1, -1, -1):
            row = row * y + c[a, b]
        out = out * x + row
    return out


def polarized_derivative(P: HermitianPotential, a: int, b: int, z, w) -> np.ndarray:
    """d_z^a dbar_w^b Q(z, w), exact polynomial differentiation."""
    c = P.coeffs
    n = c.shape[0]
    if a >= n or b >= n:
        return np.zeros(np.broadcast(np.asarray(z), np.asarray(w)).shape, dtype=complex)
    idx = np.arange(n, dtype=float)
    d = c[a:, b:] * _falling(idx[a:], a)[:, None] * _falling(idx[b:], b)[None, :]
    return _poly2(d, z, np.conj(np.asarray(w, dtype=complex)))


def eval_polarized(P: HermitianPotential, z, w):
    """Q(z, w) = sum c[a][b] z^a conj(w)^b."""
    out = polarized_derivative(P, 0, 0, z, w)
    return out if out.ndim else complex(out)


def eval_potential(P: HermitianPotential, z):
    """Q(z) as a real number (or array)."""
    z = np.asarray(z, dtype=complex)
    v = polarized_derivative(P, 0, 0, z, z)
    scale = _poly2(np.abs(P.coeffs), np.abs(z), np.abs(z)).real
    if np.any(np.abs(v.imag) > 1e-12 * np.maximum(scale, 1.0)):
        raise ValidationError("potential has a non-real diagonal value")
    v = v.real
    return v if v.ndim else float(v)


def laplacian(P: HermitianPotential, z):
    """Delta Q(z) = d dbar Q = beta(z, z) (normalized Laplacian, 1/4 of the usual)."""
    v = polarized_derivative(P, 1, 1, z, z).real
    return v if v.ndim else float(v)


@dataclass(frozen=True)
class BetaJet:
    """vals[a, b] = d_z^a dbar_w^b beta(z, w) at a base point."""

    z: complex
    w: complex
    vals: np.ndarray

    @property
    def order(self) -> int:
        return self.vals.shape[0] - 1

    def __getitem__(self, ab):
        return self.vals[ab]


def beta_jet(P: HermitianPotential, z, w, J: int) -> BetaJet:
    vals = np.empty((J + 1, J + 1), dtype=complex)
    for a in range(J + 1):
        for b in range(J + 1):
            vals[a, b] = complex(polarized_derivative(P, a + 1, b + 1, z, w))
    return BetaJet(complex(z), complex(w), vals)


def q_jet(P: HermitianPotential, z, w, order: int) -> dict[tuple[int, int], complex]:
    """All Q_{a,b}(z, w) = d_z^a dbar_w^b Q(z, w) with a, b <= order."""
    return {
        (a, b): complex(polarized_derivative(P, a, b, z, w))
        for a in range(order + 1)
        for b in range(order + 1)
    }


def _homogeneous_sums(z, w, n):
    """h_k(z, w) = sum_{i=0}^{k} z^i w^(k-i) for k < n, i.e. (w^(k+1)-z^(k+1))/(w-z)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    z, w = np.broadcast_arrays(z, w)
    h = [np.ones(z.shape, dtype=complex)]
    zk = np.ones(z.shape, dtype=complex)
    for _ in range(1, n):
        zk = zk * z
        h.append(h[-1] * w + zk)
    return h


def phase_theta(P: HermitianPotential, z, w):
    """theta(z, w) = (Q(w) - Q(z, w)) / (w - z), evaluated without division.

    With w^a - z^a = (w - z) h_{a-1}(z, w) the quotient is a polynomial, so
    the same formula gives d_z Q(z) on the diagonal.
    """
    c = P.coeffs
    n = c.shape[0]
    h = _homogeneous_sums(z, w, n)
    wb = np.conj(np.asarray(w, dtype=complex))
    out = np.zeros(h[0].shape, dtype=complex)
    for a in range(1, n):
        col = np.zeros(h[0].shape, dtype=complex)
        for b in range(n - 1, -1, -1):
            col = col * wb + c[a, b]
        out = out + h[a - 1] * col
    return out if out.ndim else complex(out)


def dbar_theta(P: HermitianPotential, z, w):
    """dbar_w theta(z, w); its diagonal value is Delta Q."""
    c = P.coeffs
    n = c.shape[0]
    h = _homogeneous_sums(z, w, n)
    wb = np.conj(np.asarray(w, dtype=complex))
    out = np.zeros(h[0].shape, dtype=complex)
    for a in range(1, n):
        col = np.zeros(h[0].shape, dtype=complex)
        for b in range(n - 1, 0, -1):
            col = col * wb + b * c[a, b]
        out = out + h[a - 1] * col
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class DomainSpec:
    """Working domain and weight.

    ``kind`` is ``"disk"`` (center, radius) or ``"plane"``. The plane has no
    radius: quadrature truncation is chosen from the weight decay, and any
    ``radius`` passed with it is dropped. ``m`` is the weight exponent in
    exp(-2 m Q); ``None`` selects the constant weight 1/pi.
    """

    kind: str = "disk"
    center: complex = 0j
    radius: float | None = 1.0
    m: float | None = None

    def __post_init__(self):
        if self.kind == "plane":
            object.__setattr__(self, "radius", None)
        if self.kind not in ("disk", "plane"):
            raise ValidationError(f"domain kind must be 'disk' or 'plane', got {self.kind!r}")
        if self.radius is not None and not self.radius > 0:
            raise ValidationError("domain radius must be positive")
        if self.kind == "disk" and self.radius is None:
            raise ValidationError("disk domain needs a radius")
        if self.m is not None and not self.m > 0:
            raise ValidationError("weight exponent m must be positive")
        if self.kind == "plane" and self.m is None:
            raise ValidationError("plane domain needs a weight exponent m")

    def contains(self, z) -> np.ndarray:
        if self.kind == "plane":
            return np.ones(np.shape(z), dtype=bool)
        return np.abs(np.asarray(z) - self.center) < self.radius


@dataclass(frozen=True)
class AssumptionReport:
    radius: float
    eps0: float
    kappa: float
    delta0: float
    a_iv_holds: bool
    a_iv_max_excess: float
    dbar_theta_min: float
    radial: bool
    grid: tuple[int, int] = field(default=(64, 64))

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "eps0": self.eps0,
            "kappa": self.kappa,
            "delta0": self.delta0,
            "a_iv_holds": self.a_iv_holds,
            "a_iv_max_excess": self.a_iv_max_excess,
            "dbar_theta_min": self.dbar_theta_min,
            "radial": self.radial,
            "grid": list(self.grid),
        }


def polar_grid(center: complex, radius: float, n_radii: int, n_angles: int) -> np.ndarray:
    r = np.linspace(0.0, radius, n_radii)
    t = 2 * np.pi * np.arange(n_angles) / n_angles
    return (center + r[:, None] * np.exp(1j * t)[None, :]).ravel()


def log_laplacian_curvature(P: HermitianPotential, z) -> np.ndarray:
    """(1 / (2 Delta Q)) Delta log(1 / Delta Q), from exact derivatives.

    With L = Delta Q = Q_{11}(z, z): Delta log L = (L Q_{22} - |Q_{21}|^2) / L^2.
    """
    q11 = polarized_derivative(P, 1, 1, z, z).real
    q21 = polarized_derivative(P, 2, 1, z, z)
    q22 = polarized_derivative(P, 2, 2, z, z).real
    return -(q11 * q22 - np.abs(q21) ** 2) / (2 * q11**3)


def check_assumptions(
    P: HermitianPotential,
    disk: DomainSpec,
    m: float | None = None,
    n_radii: int = 64,
    n_angles: int = 64,
    pair_stride: int = 4,
) -> AssumptionReport:
    """Grid check of positivity, curvature and the quadratic decay bound.

    Raises
    ------
    PositivityError
        If Delta Q <= 0 at some grid node.
    """
    if disk.kind != "disk":
        raise ValidationError("assumption checks need a disk domain")
    pts = polar_grid(disk.center, disk.radius, n_radii, n_angles)
    lap = laplacian(P, pts)
    eps0 = float(np.min(lap))
    if eps0 <= 0:
        bad = pts[np.argmin(lap)]
        raise PositivityError(f"Delta Q = {eps0:.3e} <= 0 at z = {bad:.6g}")
    kappa = float(np.max(log_laplacian_curvature(P, pts)))

    sub = polar_grid(disk.center, disk.radius, max(2, n_radii // pair_stride), max(2, n_angles // pair_stride))
    z, w = np.meshgrid(sub, sub, indexing="ij")
    lhs = 2 * np.real(eval_polarized(P, z, w)) - eval_potential(P, z) - eval_potential(P, w)
    rhs = -0.5 * laplacian(P, z) * np.abs(z - w) ** 2
    scale = 1.0 + np.abs(eval_potential(P, z)) + np.abs(eval_potential(P, w))
    excess = float(np.max(lhs - rhs))
    holds = bool(np.all(lhs - rhs <= 1e-12 * scale))
    dtheta_min = float(np.min(np.abs(dbar_theta(P, z, w))))
    return AssumptionReport(
        radius=float(disk.radius),
        eps0=eps0,
        kappa=kappa if abs(kappa) > 1e-15 else 0.0,
        delta0=disk.radius**2 * eps0 / 18.0,
        a_iv_holds=holds,
        a_iv_max_excess=excess,
        dbar_theta_min=dtheta_min,
        radial=P.is_radial,
        grid=(n_radii, n_angles),
    )


def gaussian() -> HermitianPotential:
    """Q(z) = |z|^2."""
    return HermitianPotential.radial({1: 1.0})


def quartic(s: float) -> HermitianPotential:
    """Q(z) = |z|^2 + s |z|^4."""
    return HermitianPotential.radial({1: 1.0, 2: s})


def local_length(P: HermitianPotential, m: float, z) -> float:
    """Blow-up length scale 1 / sqrt(2 m Delta Q(z))."""
    return 1.0 / math.sqrt(2.0 * m * laplacian(P, z))
