"""q-analytic polynomials f(z) = sum_{r<q, j<n} c[r][j] conj(z)^r z^j."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["PolyanalyticPoly", "singular_matrix"]


def _holo(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate each row of ``coeffs`` as a polynomial in z; output shape (q, *z.shape)."""
    out = np.zeros((coeffs.shape[0],) + z.shape, dtype=complex)
    for j in range(coeffs.shape[1] - 1, -1, -1):
        out = out * z + coeffs[:, j].reshape((-1,) + (1,) * z.ndim)
    return out


@dataclass(frozen=True)
class PolyanalyticPoly:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValidationError("coefficients must be a nonempty q x n array")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def q(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def vectorize(self, z):
        """Holomorphic components (f_0(z), ..., f_{q-1}(z)), stacked on axis 0."""
        return _holo(self.coeffs, np.asarray(z, dtype=complex))

    def extend(self, z, zprime):
        """E[f](z, z') = sum_r conj(z')^r f_r(z); holomorphic in z, antiholomorphic in z'."""
        comps = self.vectorize(z)
        zb = np.conj(np.asarray(zprime, dtype=complex))
        out = np.zeros(np.broadcast(comps[0], zb).shape, dtype=complex)
        for r in range(self.q - 1, -1, -1):
            out = out * zb + comps[r]
        return out if out.ndim else complex(out)

    def __call__(self, z):
        return self.extend(z, z)

    eval = __call__

    def dbar(self) -> "PolyanalyticPoly":
        """conj(z)-derivative, still expressed with q rows."""
        c = np.zeros_like(self.coeffs)
        for r in range(1, self.q):
            c[r - 1] = r * self.coeffs[r]
        return PolyanalyticPoly(c)


def singular_matrix(q: int, z) -> np.ndarray:
    """A[j][k] = z^j conj(z)^k, so that |f(z)|^2 = V^* A V with V = f.vectorize(z)."""
    if q < 1:
        raise ValidationError("q must be >= 1")
    z = complex(z)
    p = z ** np.arange(q)
    return np.outer(p, np.conj(p))
