"""Truncated series in u = w - z and ubar = conj(w) - conj(z).

A ``JetSeries`` knows every coefficient of total degree <= ``prec``; terms
beyond it are never stored. Exact polynomials carry ``prec = EXACT``.
Precision propagates through arithmetic so that no operation reports a
coefficient it cannot vouch for.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .coeff import ONE, ZERO, CoeffExpr, csum

EXACT = 1 << 30

Key = tuple[int, int]


class JetSeries:
    __slots__ = ("terms", "prec")

    def __init__(self, terms: Mapping[Key, CoeffExpr] | None = None, prec: int = EXACT):
        prec = min(prec, EXACT)
        clean = {}
        for k, c in (terms or {}).items():
            if k[0] < 0 or k[1] < 0:
                raise ValueError(f"negative exponent {k}")
            if k[0] + k[1] <= prec and not c.is_zero():
                clean[k] = c
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "prec", prec)

    def __setattr__(self, *_):
        raise AttributeError("JetSeries is immutable")

    # constructors -----------------------------------------------------------
    @classmethod
    def const(cls, c: CoeffExpr | int | Fraction, prec: int = EXACT) -> "JetSeries":
        c = c if isinstance(c, CoeffExpr) else CoeffExpr.const(c)
        return cls({(0, 0): c}, prec)

    @classmethod
    def monomial(cls, p: int, pb: int, c: CoeffExpr | int | Fraction = 1) -> "JetSeries":
        c = c if isinstance(c, CoeffExpr) else CoeffExpr.const(c)
        return cls({(p, pb): c})

    @classmethod
    def zero(cls, prec: int = EXACT) -> "JetSeries":
        return cls({}, prec)

    # queries ------------------------------------------------------------------
    def __getitem__(self, key: Key) -> CoeffExpr:
        return self.terms.get(key, ZERO)

    def valuation(self) -> int:
        return min((p + pb for p, pb in self.terms), default=EXACT)

    def is_zero(self) -> bool:
        return not self.terms

    def ubar_degree(self) -> int:
        return max((pb for _, pb in self.terms), default=0)

    def u_degree(self) -> int:
        return max((p for p, _ in self.terms), default=0)

    def __eq__(self, other):
        if not isinstance(other, JetSeries):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def items(self):
        return sorted(self.terms.items())

    # arithmetic -------------------------------------------------------------------
    def __add__(self, other):
        other = _as_series(other)
        prec = min(self.prec, other.prec)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc[k] + c if k in acc else c
        return JetSeries(acc, prec)

    __radd__ = __add__

    def __neg__(self):
        return JetSeries({k: -c for k, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        return self + (-_as_series(other))

    def __rsub__(self, other):
        return _as_series(other) - self

    def scale(self, c: CoeffExpr | int | Fraction) -> "JetSeries":
        if isinstance(c, (int, Fraction)):
            if c == 0:
                return JetSeries.zero(self.prec)
            return JetSeries({k: v * c for k, v in self.terms.items()}, self.prec)
        return JetSeries({k: v * c for k, v in self.terms.items()}, self.prec)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CoeffExpr)):
            return self.scale(other)
        other = _as_series(other)
        va, vb = self.valuation(), other.valuation()
        prec = min(self.prec + vb, other.prec + va, EXACT)
        buckets: dict[Key, list[CoeffExpr]] = {}
        for (p1, q1), c1 in self.terms.items():
            for (p2, q2), c2 in other.terms.items():
                if p1 + p2 + q1 + q2 <= prec:
                    buckets.setdefault((p1 + p2, q1 + q2), []).append(c1 * c2)
        return JetSeries({k: csum(v) for k, v in buckets.items()}, prec)

    __rmul__ = __mul__

    def shift(self, dp: int, dpb: int) -> "JetSeries":
        """Multiply by u^dp ubar^dpb."""
        return JetSeries({(p + dp, pb + dpb): c for (p, pb), c in self.terms.items()}, self.prec + dp + dpb)

    def truncate(self, prec: int) -> "JetSeries":
        return JetSeries(self.terms, min(prec, self.prec))

    def map_coeffs(self, fn: Callable[[CoeffExpr], CoeffExpr]) -> "JetSeries":
        return JetSeries({k: fn(c) for k, c in self.terms.items()}, self.prec)

    def inverse(self, prec: int) -> "JetSeries":
        """1/s by the geometric series; the constant term must be invertible."""
        prec = min(prec, self.prec)
        c0 = self[(0, 0)]
        inv0 = c0.inverse()
        t = (self - JetSeries.const(c0)).scale(inv0).truncate(prec)
        out = JetSeries.const(1, prec)
        power = JetSeries.const(1, prec)
        for _ in range(prec):
            power = -(power * t)
            if power.is_zero():
                break
            out = out + power
        return out.scale(inv0).truncate(prec)

    # derivations ----------------------------------------------------------------------
    def d_u(self) -> "JetSeries":
        """d/du (the holomorphic w-derivative)."""
        return JetSeries(
            {(p - 1, pb): c * p for (p, pb), c in self.terms.items() if p > 0},
            self.prec - 1 if self.prec < EXACT else EXACT,
        )

    def dbar_w(self) -> "JetSeries":
        """d/d ubar plus the symbol shift Q_{a,b} -> Q_{a,b+1}."""
        acc: dict[Key, list[CoeffExpr]] = {}
        for (p, pb), c in self.terms.items():
            if pb > 0:
                acc.setdefault((p, pb - 1), []).append(c * pb)
            acc.setdefault((p, pb), []).append(c.dwbar())
        return JetSeries({k: csum(v) for k, v in acc.items()}, self.prec - 1 if self.prec < EXACT else EXACT)

    def specialize(self, rule) -> "JetSeries":
        return self.map_coeffs(lambda c: c.specialize(rule))

    def evaluate(self, values, u: complex, ubar: complex) -> complex:
        return sum(c.evaluate(values) * u**p * ubar**pb for (p, pb), c in self.terms.items())

    def __repr__(self):
        from .printer import series_to_text

        return f"JetSeries({series_to_text(self)}; prec={'exact' if self.prec >= EXACT else self.prec})"


def _as_series(x) -> JetSeries:
    if isinstance(x, JetSeries):
        return x
    if isinstance(x, (int, Fraction, CoeffExpr)):
        return JetSeries.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a JetSeries")


def ssum(items: Iterable[JetSeries]) -> JetSeries:
    items = list(items)
    prec = min((s.prec for s in items), default=EXACT)
    buckets: dict[Key, list[CoeffExpr]] = {}
    for s in items:
        for k, c in s.terms.items():
            buckets.setdefault(k, []).append(c)
    return JetSeries({k: csum(v) for k, v in buckets.items()}, prec)


U = JetSeries.monomial(1, 0)
UBAR = JetSeries.monomial(0, 1)


class MSeries:
    """Finite expansion sum_g m^g a_g with JetSeries coefficients."""

    __slots__ = ("grades",)

    def __init__(self, grades: Mapping[int, JetSeries] | None = None):
        object.__setattr__(self, "grades", {g: s for g, s in (grades or {}).items()})

    def __setattr__(self, *_):
        raise AttributeError("MSeries is immutable")

    def __getitem__(self, g: int) -> JetSeries:
        return self.grades.get(g, JetSeries.zero())

    def top(self) -> int:
        return max(self.grades)

    def bottom(self) -> int:
        return min(self.grades)

    def __add__(self, other: "MSeries") -> "MSeries":
        acc = dict(self.grades)
        for g, s in other.grades.items():
            acc[g] = acc[g] + s if g in acc else s
        return MSeries(acc)

    def __neg__(self):
        return MSeries({g: -s for g, s in self.grades.items()})

    def __sub__(self, other):
        return self + (-other)

    def map(self, fn: Callable[[JetSeries], JetSeries]) -> "MSeries":
        return MSeries({g: fn(s) for g, s in self.grades.items()})

    def times(self, factor) -> "MSeries":
        return self.map(lambda s: s * factor)

    def raise_grade(self, k: int) -> "MSeries":
        return MSeries({g + k: s for g, s in self.grades.items()})

    def abschnitt(self, min_grade: int) -> "MSeries":
        """Partial sum keeping grades >= min_grade."""
        return MSeries({g: s for g, s in self.grades.items() if g >= min_grade})

    def is_zero(self) -> bool:
        return all(s.is_zero() for s in self.grades.values())

    def __repr__(self):
        return "MSeries(" + ", ".join(f"m^{g}: {s!r}" for g, s in sorted(self.grades.items(), reverse=True)) + ")"
