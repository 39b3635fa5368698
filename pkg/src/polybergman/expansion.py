"""Numeric expansion coefficients, approximate kernels and the blow-up comparison.

The evaluators below are written out by hand from beta-jets; the symbolic
engine in ``jetcas`` derives the same coefficients independently and the
test suite compares the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .closedform import limit_blowup_kernel
from .errors import BetaZeroError, OrderUnavailableError, ValidationError
from .potential import (
    HermitianPotential,
    beta_jet,
    eval_polarized,
    eval_potential,
    laplacian,
)

INV_PI = 1.0 / math.pi

__all__ = [
    "eval_L1",
    "eval_L2",
    "approx_amplitude",
    "approx_kernel",
    "approx_correlation",
    "blowup_lhs",
    "blowup_error_study",
    "BlowupStudy",
    "BlowupRow",
    "default_blowup_grid",
    "loglog_slope",
]


def _jet(P: HermitianPotential, z, w, J: int):
    bj = beta_jet(P, z, w, J)
    if bj[0, 0] == 0:
        raise BetaZeroError(f"beta vanishes at (z, w) = ({z}, {w})")
    return bj


def _log_beta_derivs(b):
    """d d-bar log beta and its next derivatives from a beta-jet ``b``."""
    b00, b10, b01, b11 = b[0, 0], b[1, 0], b[0, 1], b[1, 1]
    l11 = b11 / b00 - b10 * b01 / b00**2
    l12 = b[1, 2] / b00 - 2 * b11 * b01 / b00**2 - b10 * b[0, 2] / b00**2 + 2 * b10 * b01**2 / b00**3
    l21 = b[2, 1] / b00 - 2 * b11 * b10 / b00**2 - b01 * b[2, 0] / b00**2 + 2 * b01 * b10**2 / b00**3
    return l11, l12, l21


def eval_L1(P: HermitianPotential, z, w, j: int) -> complex:
    """Coefficient L_j of the analytic (q = 1) expansion at (z, w)."""
    if j == 0:
        return complex(2 * INV_PI * beta_jet(P, z, w, 0)[0, 0])
    if j == 1:
        l11, _, _ = _log_beta_derivs(_jet(P, z, w, 2))
        return complex(0.5 * INV_PI * l11)
    raise OrderUnavailableError("analytic coefficients are available for j = 0, 1")


def xi2_value(b) -> complex:
    """Coefficient of |z-w|^2 in L^2_2, from a beta-jet (ambiguous factor read as d_z beta)."""
    B = b[0, 0]
    t = (
        1.5 * b[1, 2] * b[1, 0] / B**2
        - 6.5 * b[1, 0] * b[1, 1] * b[0, 1] / B**3
        + 1.5 * b[1, 1] ** 2 / B**2
        - b[1, 0] ** 2 * b[0, 2] / B**3
        + 4.25 * b[1, 0] ** 2 * b[0, 1] ** 2 / B**4
        - (2.0 / 3.0) * b[2, 2] / B
        + 1.5 * b[2, 1] * b[0, 1] / B**2
        - b[2, 0] * b[0, 1] ** 2 / B**3
        + (1.0 / 3.0) * b[2, 0] * b[0, 2] / B**2
    )
    return INV_PI * t


def _l2_from_jet(b, j: int, zw, zbwb):
    """L^2_j given the jet and the factors (z - w), (conj z - conj w) (possibly lifted)."""
    sq = zw * zbwb
    if j == 0:
        return -4 * INV_PI * sq * b[0, 0] ** 2
    if j == 1:
        return INV_PI * (
            4 * b[0, 0] - 2 * zbwb * b[0, 1] + 2 * zw * b[1, 0] - 3 * sq * b[1, 1] + 2 * sq * b[1, 0] * b[0, 1] / b[0, 0]
        )
    if j == 2:
        l11, l12, l21 = _log_beta_derivs(b)
        return INV_PI * (2 * l11 - zbwb * l12 + zw * l21) + sq * xi2_value(b)
    raise OrderUnavailableError("bianalytic coefficients are available for j = 0, 1, 2")


def eval_L2(P: HermitianPotential, z, w, j: int) -> complex:
    """Coefficient L^2_j of the bianalytic expansion at (z, w)."""
    if j not in (0, 1, 2):
        raise OrderUnavailableError("bianalytic coefficients are available for j = 0, 1, 2")
    b = _jet(P, z, w, 2) if j else beta_jet(P, z, w, 0)
    return complex(_l2_from_jet(b, j, z - w, np.conj(z) - np.conj(w)))


def _orders(q: int, k: int) -> range:
    if q == 1:
        if not 0 <= k <= 1:
            raise OrderUnavailableError("q = 1 supports k in {0, 1}")
        return range(k + 1)
    if q == 2:
        if not 0 <= k <= 1:
            raise OrderUnavailableError("q = 2 supports k in {0, 1} (orders through k + 1)")
        return range(k + 2)
    raise OrderUnavailableError(f"no expansion coefficients for q = {q}")


def approx_amplitude(P: HermitianPotential, m: float, q: int, k: int, z, w, zprime=None, wprime=None) -> complex:
    """sum_j m^{q-j} L^q_j, optionally lifted (conj z -> conj z', w -> w')."""
    orders = _orders(q, k)
    zp = z if zprime is None else zprime
    wp = w if wprime is None else wprime
    J = 2 if max(orders) >= 1 else 0
    b = beta_jet(P, z, w, J)
    if J and b[0, 0] == 0:
        raise BetaZeroError("beta vanishes")
    total = 0j
    for j in orders:
        if q == 1:
            if j == 0:
                val = 2 * INV_PI * b[0, 0]
            else:
                val = 0.5 * INV_PI * _log_beta_derivs(b)[0]
        else:
            val = _l2_from_jet(b, j, z - wp, np.conj(zp) - np.conj(w))
        total += m ** (q - j) * val
    return complex(total)


def approx_kernel(P: HermitianPotential, m: float, q: int, k: int, z, w) -> complex:
    """(sum_j m^{q-j} L^q_j(z, w)) exp(2 m Q(z, w))."""
    amp = approx_amplitude(P, m, q, k, z, w)
    return amp * complex(np.exp(2 * m * eval_polarized(P, z, w)))


def approx_correlation(P: HermitianPotential, m: float, q: int, k: int, z, w, zprime=None, wprime=None) -> complex:
    """Approximate kernel (or lift) times exp(-m Q(z) - m Q(w)), exponents combined first."""
    amp = approx_amplitude(P, m, q, k, z, w, zprime, wprime)
    expo = 2 * m * eval_polarized(P, z, w) - m * eval_potential(P, z) - m * eval_potential(P, w)
    return amp * complex(np.exp(expo))


# -- blow-up -----------------------------------------------------------------------------


def blowup_scale(P: HermitianPotential, m: float, z0) -> float:
    lap = laplacian(P, z0)
    if not lap > 0:
        raise ValidationError(f"Delta Q(z0) = {lap} is not positive")
    return math.sqrt(2 * m * lap)


def blowup_lhs(source, P: HermitianPotential, m: float, z0, xi, eta, signed: bool = False) -> float:
    """Rescaled normalized kernel |K(z0 + xi', z0 + eta')| e^{-mQ-mQ} / (2 m Delta Q(z0)).

    ``signed`` removes the unimodular factor exp(2 i m Im Q(z, w)) instead of
    taking the modulus; the result is then compared with the signed limit.
    """
    s = blowup_scale(P, m, z0)
    z = z0 + xi / s
    w = z0 + eta / s
    val = complex(source.normalized(z, w))
    if signed:
        phase = np.exp(-2j * m * np.imag(eval_polarized(P, z, w)))
        return float(np.real(val * phase)) / s**2
    return abs(val) / s**2


def signed_limit_kernel(xi, eta) -> float:
    d2 = abs(xi - eta) ** 2
    return (2 - d2) * math.exp(-d2 / 2) / math.pi


def default_blowup_grid() -> list[tuple[complex, complex]]:
    """Nine (xi, eta) pairs with |xi - eta| <= 2, away from the zero set |xi - eta|^2 = 2."""
    offsets = [0.6, 1.1j, -1.5 + 1.0j]
    centers = [0.0, 0.5j, -0.5]
    return [(c + a, complex(c)) for c in centers for a in offsets]


def loglog_slope(ms: Sequence[float], errs: Sequence[float]) -> float | None:
    """Least-squares slope of log(err) against log(m); None with fewer than two usable points."""
    pts = [(math.log(m), math.log(e)) for m, e in zip(ms, errs) if e > 0]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    xm = x - x.mean()
    return float(np.dot(xm, y - y.mean()) / np.dot(xm, xm))


@dataclass
class BlowupRow:
    m: float
    sup_error: float
    slope_so_far: float | None
    n: int | None = None
    truncation_estimate: float | None = None
    values: list[float] = field(default_factory=list)


@dataclass
class BlowupStudy:
    z0: complex
    grid: list[tuple[complex, complex]]
    rows: list[BlowupRow]
    signed: bool = False

    @property
    def slope(self) -> float | None:
        return self.rows[-1].slope_so_far if self.rows else None

    @property
    def strictly_decreasing(self) -> bool:
        e = [r.sup_error for r in self.rows]
        return all(b < a for a, b in zip(e, e[1:]))

    def csv_rows(self) -> tuple[list[str], list[list]]:
        header = ["m", "sup_error", "slope_so_far", "n", "truncation_estimate"]
        body = [[r.m, r.sup_error, r.slope_so_far, r.n, r.truncation_estimate] for r in self.rows]
        return header, body

    def to_dict(self) -> dict:
        return {
            "z0": [self.z0.real, self.z0.imag],
            "grid": [[[x.real, x.imag], [y.real, y.imag]] for x, y in self.grid],
            "signed": self.signed,
            "slope": self.slope,
            "slope_flag": None if self.slope is not None else "fewer than two m values; slope omitted",
            "strictly_decreasing": self.strictly_decreasing,
            "rows": [
                {"m": r.m, "sup_error": r.sup_error, "slope_so_far": r.slope_so_far, "n": r.n,
                 "truncation_estimate": r.truncation_estimate}
                for r in self.rows
            ],
        }


def blowup_error_study(
    source_for_m: Callable,
    P: HermitianPotential,
    z0: complex,
    grid: Iterable[tuple[complex, complex]],
    m_list: Sequence[float],
    signed: bool = False,
) -> BlowupStudy:
    """Sup over the grid of |lhs - limit| for each m, with a running log-log slope.

    ``source_for_m(m)`` returns a kernel source. If it instead exposes
    ``refine(m, evaluate)`` the source is refined until its own truncation
    estimate is small against the measured error (see ``sources``).
    """
    m_list = list(m_list)
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValidationError("m_list must be strictly increasing")
    grid = [(complex(x), complex(y)) for x, y in grid]
    z0 = complex(z0)
    limit = signed_limit_kernel if signed else limit_blowup_kernel
    targets = np.array([limit(x, y) for x, y in grid])
    rows: list[BlowupRow] = []
    for m in m_list:

        def evaluate(src, m=m):
            return np.array([blowup_lhs(src, P, m, z0, x, y, signed) for x, y in grid])

        n = trunc = None
        if hasattr(source_for_m, "refine"):
            vals, info = source_for_m.refine(m, evaluate, targets)
            n, trunc = info["n"], info["truncation_estimate"]
        else:
            vals = evaluate(source_for_m(m))
        err = float(np.max(np.abs(vals - targets)))
        ms = [r.m for r in rows] + [m]
        es = [r.sup_error for r in rows] + [err]
        rows.append(BlowupRow(m, err, loglog_slope(ms, es), n, trunc, [float(v) for v in vals]))
    return BlowupStudy(z0, grid, rows, signed)
