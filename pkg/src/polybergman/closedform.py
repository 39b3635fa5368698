"""Closed-form reference kernels.

* Unit disk with constant weight 1/pi (Koshelev's formula) and its lift.
* Plane with Gaussian weight exp(-2m|z|^2): polyanalytic kernels are
  Laguerre polynomials in 2m|z-w|^2 times exp(2m z conj(w)).
* The blow-up limit kernel |2 - |xi-eta|^2| exp(-|xi-eta|^2/2) / pi.
"""

from __future__ import annotations

from math import comb, pi

import numpy as np

from .errors import OutOfDomainError, ValidationError

__all__ = [
    "laguerre",
    "koshelev_kernel",
    "koshelev_lift",
    "gaussian_poly_kernel",
    "gaussian_poly_lift",
    "gaussian_correlation",
    "gaussian_lift_correlation",
    "landau_level_kernel",
    "limit_blowup_kernel",
]

MAX_Q = 12


def laguerre(alpha: int, r: int, x):
    """Generalized Laguerre polynomial L_r^(alpha)(x) by the three-term recurrence.

    ``x`` may be complex; lifted kernels evaluate the polynomial off the real axis.
    """
    if alpha < 0 or r < 0:
        raise ValidationError("laguerre needs alpha >= 0 and r >= 0")
    x = np.asarray(x)
    prev = np.ones_like(x, dtype=np.result_type(x, float))
    if r == 0:
        return prev if prev.ndim else prev[()]
    cur = 1.0 + alpha - x
    for k in range(1, r):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if np.ndim(cur) else cur[()]


def _check_q(q: int):
    if not 1 <= q <= MAX_Q:
        raise ValidationError(f"q must be in 1..{MAX_Q}")


def _check_disk(*pts):
    for p in pts:
        if np.any(np.abs(np.asarray(p)) >= 1):
            raise OutOfDomainError("closed-form disk kernel needs |z| < 1")


def koshelev_lift(q: int, z, zprime, w, wprime):
    """Lift of the disk kernel: conj(z) -> conj(z'), w -> w' in the polyanalytic slots."""
    _check_q(q)
    _check_disk(z, zprime, w, wprime)
    z, zp, w, wp = (np.asarray(v, dtype=complex) for v in (z, zprime, w, wprime))
    a = 1 - wp * np.conj(zp)
    hol = 1 - z * np.conj(w)
    cross = (z - wp) * (np.conj(zp) - np.conj(w))
    out = 0
    for j in range(q):
        coef = (-1) ** j * comb(q, j + 1) * comb(q + j, q)
        out = out + coef * a ** (q - j - 1) * cross**j / hol ** (q + j + 1)
    out = q * out
    return out if np.ndim(out) else complex(out)


def koshelev_kernel(q: int, z, w):
    """q-analytic Bergman kernel of the unit disk for the weight 1/pi."""
    return koshelev_lift(q, z, z, w, w)


def _lag_arg(m, z, zp, w, wp):
    return 2 * m * (z - wp) * (np.conj(zp) - np.conj(w))


def gaussian_poly_lift(q: int, m: float, z, zprime, w, wprime):
    _check_q(q)
    z, zp, w, wp = (np.asarray(v, dtype=complex) for v in (z, zprime, w, wprime))
    out = (2 * m / pi) * laguerre(1, q - 1, _lag_arg(m, z, zp, w, wp)) * np.exp(2 * m * z * np.conj(w))
    return out if np.ndim(out) else complex(out)


def gaussian_poly_kernel(q: int, m: float, z, w):
    """Kernel of the q-analytic space with weight exp(-2m|z|^2) on the plane."""
    return gaussian_poly_lift(q, m, z, z, w, w)


def gaussian_lift_correlation(q: int, m: float, z, zprime, w, wprime):
    """Lift times exp(-m|z|^2 - m|w|^2), with the exponent combined before exponentiating."""
    _check_q(q)
    z, zp, w, wp = (np.asarray(v, dtype=complex) for v in (z, zprime, w, wprime))
    expo = 2 * m * z * np.conj(w) - m * np.abs(z) ** 2 - m * np.abs(w) ** 2
    out = (2 * m / pi) * laguerre(1, q - 1, _lag_arg(m, z, zp, w, wp)) * np.exp(expo)
    return out if np.ndim(out) else complex(out)


def gaussian_correlation(q: int, m: float, z, w):
    return gaussian_lift_correlation(q, m, z, z, w, w)


def landau_level_kernel(q: int, m: float, z, w):
    """K_q - K_{q-1} for the Gaussian weight, i.e. (2m/pi) L_{q-1}^(0)(2m|z-w|^2) exp(2m z conj(w))."""
    _check_q(q)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    x = 2 * m * np.abs(z - w) ** 2
    out = (2 * m / pi) * laguerre(0, q - 1, x) * np.exp(2 * m * z * np.conj(w))
    return out if np.ndim(out) else complex(out)


def limit_blowup_kernel(xi, eta):
    d2 = np.abs(np.asarray(xi) - np.asarray(eta)) ** 2
    out = np.abs(2 - d2) / pi * np.exp(-d2 / 2)
    return out if np.ndim(out) else float(out)
