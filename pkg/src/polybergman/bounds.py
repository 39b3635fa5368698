"""Point-evaluation estimates for bianalytic functions and a randomized harness.

Every check returns a pair ``(lhs, rhs)``; the estimate holds when
lhs <= rhs. Disk integrals use Gauss-Legendre in the radius and the
trapezoidal rule in the angle (128 x 256 nodes by default).
"""

from __future__ import annotations

import logging
import math
import warnings
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DivergentError, PsiNotNonpositiveError, ValidationError
from .potential import HermitianPotential, eval_potential, laplacian

log = logging.getLogger(__name__)

N_RADIAL = 128
N_ANGULAR = 256
PROOF_CONSTANT = "proof"
DISPLAY_CONSTANT = "display"
CHAIN_CONSTANT = "chain"


# -- test functions ----------------------------------------------------------------------


@lru_cache(maxsize=8)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _horner(coeffs: Sequence[complex], z):
    out = np.zeros_like(np.asarray(z, dtype=complex))
    for c in reversed(coeffs):
        out = out * z + c
    return out


@dataclass(frozen=True)
class BianalyticTestFn:
    """u(z) = u1(z) + c conj(z) + |z|^2 u2(z) with u1, u2 holomorphic polynomials."""

    u1: tuple[complex, ...] = (0j,)
    c: complex = 0j
    u2: tuple[complex, ...] = (0j,)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return _horner(self.u1, z) + self.c * np.conj(z) + np.abs(z) ** 2 * _horner(self.u2, z)

    def dbar(self, z):
        """d-bar u = c + z u2(z); in particular d-bar u(0) = c."""
        z = np.asarray(z, dtype=complex)
        return self.c + z * _horner(self.u2, z)

    def scaled(self, s: complex) -> "BianalyticTestFn":
        return BianalyticTestFn(tuple(s * a for a in self.u1), s * self.c, tuple(s * a for a in self.u2))

    @classmethod
    def random(cls, rng: np.random.Generator, max_degree: int = 6, bound: float = 1.0) -> "BianalyticTestFn":
        def poly():
            d = int(rng.integers(0, max_degree + 1))
            return tuple(complex(v) for v in bound * (rng.uniform(-1, 1, d + 1) + 1j * rng.uniform(-1, 1, d + 1)))

        c = complex(bound * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)))
        return cls(poly(), c, poly())

    def to_dict(self) -> dict:
        pair = lambda v: [v.real, v.imag]  # noqa: E731
        return {"u1": [pair(a) for a in self.u1], "c": pair(self.c), "u2": [pair(a) for a in self.u2]}


@dataclass(frozen=True)
class SubharmonicRadialPsi:
    """psi(z) = const + Re(h1 z + h2 z^2) + a|z|^2 + b|z|^4 with a, b >= 0.

    The harmonic part does not change the Laplacian a + 4b|z|^2, so
    subharmonicity is certified by the signs of a and b.
    """

    a: float = 1.0
    b: float = 0.0
    const: float = 0.0
    h1: complex = 0j
    h2: complex = 0j

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValidationError("psi family needs a, b >= 0 to be subharmonic")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        r2 = np.abs(z) ** 2
        return self.const + np.real(self.h1 * z + self.h2 * z * z) + self.a * r2 + self.b * r2 * r2

    def laplacian(self, rho):
        return self.a + 4 * self.b * np.asarray(rho, dtype=float) ** 2

    def green_origin_exact(self) -> float:
        # 4 int rho log(rho) (a + 4 b rho^2) d rho = -a - b
        return -self.a - self.b

    @classmethod
    def random(cls, rng: np.random.Generator, nonpositive: bool = False) -> "SubharmonicRadialPsi":
        a, b = rng.uniform(0, 2), rng.uniform(0, 1)
        h1 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.5
        h2 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.5
        if nonpositive:
            const = -(a + b + abs(h1) + abs(h2)) - rng.uniform(0, 0.5)
        else:
            const = rng.uniform(-1, 1)
        return cls(float(a), float(b), float(const), h1, h2)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "const": self.const,
                "h1": [self.h1.real, self.h1.imag], "h2": [self.h2.real, self.h2.imag]}


def check_subharmonic(psi: Callable, n_radii: int = 32, n_angles: int = 64, tol: float = 1e-8) -> bool:
    """Grid check of Delta psi >= -tol on the unit disk (5-point stencil); warns on failure."""
    h = 1e-3
    rho = np.linspace(0.05, 0.95, n_radii)[:, None]
    t = 2 * np.pi * np.arange(n_angles)[None, :] / n_angles
    z = rho * np.exp(1j * t)
    lap = (psi(z + h) + psi(z - h) + psi(z + 1j * h) + psi(z - 1j * h) - 4 * psi(z)) / (4 * h * h)
    ok = bool(np.all(lap >= -tol * max(1.0, float(np.max(np.abs(lap))))))
    if not ok:
        warnings.warn("psi failed the grid subharmonicity check", RuntimeWarning, stacklevel=2)
    return ok


# -- quadrature ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskRule:
    """Polar product rule on the disk D(center, radius)."""

    center: complex = 0j
    radius: float = 1.0
    n_radial: int = N_RADIAL
    n_angular: int = N_ANGULAR

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = _legendre(self.n_radial)
        rho = 0.5 * self.radius * (x + 1)
        wr = 0.5 * self.radius * w * rho
        t = 2 * np.pi * np.arange(self.n_angular) / self.n_angular
        z = self.center + rho[:, None] * np.exp(1j * t)[None, :]
        weights = wr[:, None] * (2 * np.pi / self.n_angular) * np.ones_like(t)[None, :]
        return z, weights

    def integrate(self, fun: Callable) -> float:
        z, w = self.nodes()
        return float(np.sum(np.real(fun(z)) * w))

    def doubled(self) -> "DiskRule":
        return DiskRule(self.center, self.radius, 2 * self.n_radial, 2 * self.n_angular)


def weighted_norm2(u: Callable, psi: Callable, rule: DiskRule | None = None) -> float:
    """int_D |u|^2 exp(2 psi) dA."""
    rule = rule or DiskRule()
    return rule.integrate(lambda z: np.abs(u(z)) ** 2 * np.exp(2 * psi(z)))


# -- Green potential at the origin ------------------------------------------------------------


def green_potential_origin(delta_psi: Callable[[float], float], *, tail_tol: float = 1e-8) -> float:
    """(1/pi) int_D log|w|^2 Delta psi dA = 4 int_0^1 rho log(rho) Delta psi(rho) d rho.

    ``delta_psi`` is a radial density. The log singularity at 0 is handled by
    an algebraic-logarithmic quadrature weight. The Riesz mass and the
    integral near rho = 1 are checked for convergence; failure raises
    DivergentError.
    """
    f = lambda r: float(delta_psi(r))  # noqa: E731
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, 0.0, 1.0, weight="alg-loga", wvar=(1.0, 0.0), limit=200)
            mass, merr = integrate.quad(lambda r: (1 - r * r) * f(r) * r, 0.0, 1.0, limit=200)
        except (integrate.IntegrationWarning, ZeroDivisionError, OverflowError) as exc:
            raise DivergentError(f"Green potential integral did not converge: {exc}") from exc
    if not (math.isfinite(val) and math.isfinite(mass)) or err > tail_tol * max(1.0, abs(val)):
        raise DivergentError(f"Green potential integral failed the tail test (estimate {err:.2e})")
    if merr > tail_tol * max(1.0, abs(mass)):
        raise DivergentError("Riesz mass is not finite to working precision")
    return 4.0 * val


# -- estimates at the origin ---------------------------------------------------------------


def check_lemma1(u: BianalyticTestFn, psi: Callable, rule: DiskRule | None = None,
                 norm: float | None = None) -> tuple[float, float]:
    rule = rule or DiskRule()
    x, w = _legendre(rule.n_radial)
    r = 0.5 * (x + 1)
    wr = 0.5 * w
    t = 2 * np.pi * np.arange(rule.n_angular) / rule.n_angular
    zeta = np.exp(1j * t)
    # circle integral of conj(zeta) psi(r zeta) ds
    circ = (2 * np.pi / rule.n_angular) * np.sum(np.conj(zeta)[None, :] * psi(r[:, None] * zeta[None, :]), axis=1)
    inner = u.u1[0] + r * r * u.u2[0] + (u.c * r / math.pi) * circ
    lhs = float(np.sum(np.abs(inner) ** 2 * r * wr))
    psi0 = float(np.real(psi(0j)))
    norm = weighted_norm2(u, psi, rule) if norm is None else norm
    return lhs, math.exp(-2 * psi0) / (2 * math.pi) * norm


def bound_dbar_origin(u: BianalyticTestFn, psi: Callable, rule: DiskRule | None = None,
                      norm: float | None = None) -> tuple[float, float]:
    psi0 = float(np.real(psi(0j)))
    norm = weighted_norm2(u, psi, rule) if norm is None else norm
    return abs(u.c) ** 2, 3 / math.pi * math.exp(-2 * psi0) * norm


def _nonpositive_on_grid(psi: Callable, rule: DiskRule) -> bool:
    z, _ = rule.nodes()
    edge = np.exp(2j * np.pi * np.arange(rule.n_angular) / rule.n_angular)
    return bool(np.all(psi(z) <= 0) and np.all(psi(edge) <= 0) and psi(0j) <= 0)


def bound_value_origin_neg(u: BianalyticTestFn, psi: Callable, rule: DiskRule | None = None) -> tuple[float, float]:
    rule = rule or DiskRule()
    if not _nonpositive_on_grid(psi, rule):
        raise PsiNotNonpositiveError("psi must be <= 0 on the disk")
    psi0 = float(np.real(psi(0j)))
    lhs = abs(complex(u(0j))) ** 2
    rhs = 8 / math.pi * (1 + 6 * psi0**2) * math.exp(-2 * psi0) * weighted_norm2(u, psi, rule)
    return lhs, rhs


def bound_value_origin(u: BianalyticTestFn, psi: Callable, delta_psi: Callable | None = None,
                       rule: DiskRule | None = None, norm: float | None = None) -> tuple[float, float]:
    """Value at the origin with the Green-potential constant.

    ``delta_psi`` defaults to ``psi.laplacian`` for the radial family.
    """
    if delta_psi is None:
        delta_psi = getattr(psi, "laplacian", None)
        if delta_psi is None:
            raise ValidationError("bound_value_origin needs the radial Laplacian of psi")
    g = green_potential_origin(delta_psi)
    psi0 = float(np.real(psi(0j)))
    lhs = abs(complex(u(0j))) ** 2
    norm = weighted_norm2(u, psi, rule) if norm is None else norm
    rhs = 8 / math.pi * (1 + 6 * g**2) * math.exp(-2 * psi0) * norm
    return lhs, rhs


# -- rescaled estimates --------------------------------------------------------------------


def sup_laplacian(P: HermitianPotential, z0: complex, delta: float, n_radii: int = 64, n_angles: int = 256) -> float:
    """Grid maximum of Delta Q over the closed disk D(z0, delta)."""
    rho = np.linspace(0.0, delta, n_radii)[:, None]
    t = 2 * np.pi * np.arange(n_angles)[None, :] / n_angles
    return float(np.max(laplacian(P, z0 + rho * np.exp(1j * t))))


def _constant(A: float, delta: float, which: str) -> float:
    if which == PROOF_CONSTANT:
        return 1 + 6 * A**2 * delta**4
    if which == DISPLAY_CONSTANT:
        return 1 + 6 * A**2
    raise ValidationError(f"unknown constant {which!r}; use 'proof' or 'display'")


def local_integral(u: Callable, P: HermitianPotential, m: float, z0: complex, radius: float,
                    rule: DiskRule | None) -> float:
    """e^{2mQ(z0)} int_{D(z0, radius)} |u|^2 e^{-2mQ} dA, with the exponent combined first."""
    base = rule or DiskRule()
    local = DiskRule(z0, radius, base.n_radial, base.n_angular)
    q0 = float(eval_potential(P, z0))
    return local.integrate(lambda z: np.abs(u(z)) ** 2 * np.exp(-2 * m * (eval_potential(P, z) - q0)))


def bound_value_rescaled(u: BianalyticTestFn, P: HermitianPotential, m: float, delta: float, z0: complex = 0j,
                         constant: str = PROOF_CONSTANT, rule: DiskRule | None = None,
                         A: float | None = None, integral: float | None = None) -> tuple[float, float]:
    """|u(z0)|^2 against (8m/(pi delta^2)) C e^{2A delta^2} e^{2mQ(z0)} int_{D(z0, delta/sqrt m)} |u|^2 e^{-2mQ}."""
    if m < 1 or delta <= 0:
        raise ValidationError("need m >= 1 and delta > 0")
    A = sup_laplacian(P, z0, delta) if A is None else A
    if integral is None:
        integral = local_integral(u, P, m, z0, delta / math.sqrt(m), rule)
    rhs = 8 * m / (math.pi * delta**2) * _constant(A, delta, constant) * math.exp(2 * A * delta**2) * integral
    return abs(complex(u(z0))) ** 2, rhs


def bound_dbar_rescaled(u: BianalyticTestFn, P: HermitianPotential, m: float, delta: float, z0: complex = 0j,
                        rule: DiskRule | None = None, A: float | None = None,
                        constant: str = DISPLAY_CONSTANT, integral: float | None = None) -> tuple[float, float]:
    """|d-bar u(z0)|^2 against (3m/(pi delta^2)) e^{2A delta^2} e^{2mQ(z0)} int_{D(z0, delta/sqrt m)} |u|^2 e^{-2mQ}.

    ``constant="chain"`` multiplies the prefactor by m/delta^2, the factor
    picked up by d-bar under the rescaling z = z0 + delta xi / sqrt(m).
    Without it the estimate fails, e.g. for u = conj(z), Q = |z|^2, m = 10.
    """
    if m < 1 or delta <= 0:
        raise ValidationError("need m >= 1 and delta > 0")
    if constant not in (DISPLAY_CONSTANT, CHAIN_CONSTANT):
        raise ValidationError(f"unknown constant {constant!r}; use 'display' or 'chain'")
    A = sup_laplacian(P, z0, delta) if A is None else A
    if integral is None:
        integral = local_integral(u, P, m, z0, delta / math.sqrt(m), rule)
    pre = 3 * m / (math.pi * delta**2)
    if constant == CHAIN_CONSTANT:
        pre *= m / delta**2
    return abs(complex(u.dbar(z0))) ** 2, pre * math.exp(2 * A * delta**2) * integral


def kernel_diag_bound(P: HermitianPotential, m: float, delta: float, z0: complex = 0j,
                      constant: str = DISPLAY_CONSTANT, A: float | None = None, normalized: bool = False) -> float:
    """Upper bound for K_{2,m}(z0, z0); with ``normalized`` the factor e^{2mQ(z0)} is dropped."""
    if m < 1 or delta <= 0:
        raise ValidationError("need m >= 1 and delta > 0")
    A = sup_laplacian(P, z0, delta) if A is None else A
    b = 8 * m / (math.pi * delta**2) * _constant(A, delta, constant) * math.exp(2 * A * delta**2)
    return b if normalized else b * math.exp(2 * m * float(eval_potential(P, z0)))


def check_kernel_diag(source, P: HermitianPotential, m: float, delta: float, z0: complex = 0j,
                      constant: str = DISPLAY_CONSTANT) -> tuple[float, float]:
    """(K(z0, z0) e^{-2mQ(z0)}, bound e^{-2mQ(z0)}) for a kernel source."""
    actual = float(np.real(source.normalized(z0, z0)))
    return actual, kernel_diag_bound(P, m, delta, z0, constant, normalized=True)


# -- randomized harness ----------------------------------------------------------------------


PROPOSITIONS = (
    "lemma1",
    "dbar_origin",
    "value_origin_neg",
    "value_origin",
    "value_rescaled_proof",
    "value_rescaled_display",
    "dbar_rescaled_display",
    "dbar_rescaled_chain",
    "kernel_diag_proof",
    "kernel_diag_display",
)


@dataclass
class HarnessEntry:
    trials: int = 0
    violations: int = 0
    max_ratio: float = 0.0
    failing_seeds: list[int] = field(default_factory=list)

    def record(self, seed: int, lhs: float, rhs: float, rtol: float):
        self.trials += 1
        ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
        self.max_ratio = max(self.max_ratio, ratio)
        if lhs > rhs * (1 + rtol):
            self.violations += 1
            self.failing_seeds.append(seed)


@dataclass
class HarnessReport:
    seed: int
    trials: int
    rtol: float
    entries: dict[str, HarnessEntry]

    @property
    def violations(self) -> int:
        return sum(e.violations for e in self.entries.values())

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "rtol": self.rtol,
            "violations": self.violations,
            "propositions": {
                k: {"trials": e.trials, "violations": e.violations, "max_ratio": e.max_ratio,
                    "failing_seeds": e.failing_seeds}
                for k, e in self.entries.items()
            },
        }


def _random_potential(rng: np.random.Generator) -> HermitianPotential:
    a, b = rng.uniform(0.2, 2.0), rng.uniform(0.0, 1.0)
    h = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
    return HermitianPotential.from_terms({(1, 1): a, (2, 2): b, (2, 0): h / 2, (0, 2): np.conj(h) / 2})


def run_harness(trials: int = 1000, seed: int = 0, rtol: float = 1e-8,
                rule: DiskRule | None = None, propositions: Sequence[str] = PROPOSITIONS) -> HarnessReport:
    """Randomized verification of every estimate; trial i uses the generator seeded by (seed, i)."""
    from .closedform import gaussian_correlation

    unknown = set(propositions) - set(PROPOSITIONS)
    if unknown:
        raise ValidationError(f"unknown propositions: {sorted(unknown)}")
    rule = rule or DiskRule()
    entries = {k: HarnessEntry() for k in propositions}
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        u = BianalyticTestFn.random(rng)
        psi = SubharmonicRadialPsi.random(rng)
        psi_neg = SubharmonicRadialPsi.random(rng, nonpositive=True)
        P = _random_potential(rng)
        m = float(rng.integers(1, 41))
        delta = float(rng.uniform(0.2, 1.5))
        z0 = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        a_gauss = float(rng.uniform(0.2, 3.0))
        norm = weighted_norm2(u, psi, rule)
        A = sup_laplacian(P, z0, delta)
        integral = local_integral(u, P, m, z0, delta / math.sqrt(m), rule)
        for name in propositions:
            if name == "lemma1":
                lhs, rhs = check_lemma1(u, psi, rule, norm)
            elif name == "dbar_origin":
                lhs, rhs = bound_dbar_origin(u, psi, rule, norm)
            elif name == "value_origin_neg":
                lhs, rhs = bound_value_origin_neg(u, psi_neg, rule)
            elif name == "value_origin":
                lhs, rhs = bound_value_origin(u, psi, rule=rule, norm=norm)
            elif name.startswith("value_rescaled"):
                const = PROOF_CONSTANT if name.endswith("proof") else DISPLAY_CONSTANT
                lhs, rhs = bound_value_rescaled(u, P, m, delta, z0, const, rule, A, integral)
            elif name.startswith("dbar_rescaled"):
                const = CHAIN_CONSTANT if name.endswith("chain") else DISPLAY_CONSTANT
                lhs, rhs = bound_dbar_rescaled(u, P, m, delta, z0, rule, A, const, integral)
            else:
                # Q = a|z|^2 has the closed-form kernel of the Gaussian weight with m a.
                const = PROOF_CONSTANT if name.endswith("proof") else DISPLAY_CONSTANT
                Pg = HermitianPotential.from_terms({(1, 1): a_gauss})
                lhs = float(np.real(gaussian_correlation(2, m * a_gauss, z0, z0)))
                rhs = kernel_diag_bound(Pg, m, delta, z0, const, A=a_gauss, normalized=True)
            entries[name].record(i, lhs, rhs, rtol)
    report = HarnessReport(seed, trials, rtol, entries)
    if report.violations:
        log.warning("bounds harness found %d violations", report.violations)
    return report
