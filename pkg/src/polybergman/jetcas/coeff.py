"""Exact coefficient expressions: polynomials in Q_{a,b} over a power of beta.

Q_{a,b} stands for d_z^a dbar_w^b Q(z, w); beta is Q_{1,1}. A formal unit
for 1/pi is carried as an extra commuting symbol so that printed constants
like 2/pi stay exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping

Sym = tuple[int, int]
Mono = tuple[tuple[Sym, int], ...]

BETA: Sym = (1, 1)
PI_INV: Sym = (-1, -1)

_ONE: Mono = ()


def _mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for s, e in b:
        d[s] = d.get(s, 0) + e
    return tuple(sorted(d.items()))


def _mono_beta_power(m: Mono) -> int:
    for s, e in m:
        if s == BETA:
            return e
    return 0


def _mono_drop_beta(m: Mono, k: int) -> Mono:
    out = []
    for s, e in m:
        if s == BETA:
            if e > k:
                out.append((s, e - k))
        else:
            out.append((s, e))
    return tuple(out)


def _beta_mono(k: int) -> Mono:
    return ((BETA, k),) if k else _ONE


class CoeffExpr:
    """num / beta^den with num a polynomial over the rationals.

    Instances are immutable and kept in canonical form: zero terms removed
    and the largest common power of beta cancelled against the denominator.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Mapping[Mono, Fraction] | None = None, den: int = 0):
        terms = {m: Fraction(c) for m, c in (num or {}).items() if c != 0}
        if not terms:
            den = 0
        elif den > 0:
            k = min(den, min(_mono_beta_power(m) for m in terms))
            if k:
                terms = {_mono_drop_beta(m, k): c for m, c in terms.items()}
                den -= k
        object.__setattr__(self, "num", tuple(sorted(terms.items())))
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *_):
        raise AttributeError("CoeffExpr is immutable")

    # constructors ------------------------------------------------------------
    @classmethod
    def const(cls, c) -> "CoeffExpr":
        return cls({_ONE: Fraction(c)})

    @classmethod
    def sym(cls, a: int, b: int, power: int = 1) -> "CoeffExpr":
        return cls({(((a, b), power),): Fraction(1)})

    @classmethod
    def pi_inv(cls, power: int = 1) -> "CoeffExpr":
        return cls({((PI_INV, power),): Fraction(1)})

    @classmethod
    def beta_power(cls, k: int) -> "CoeffExpr":
        """beta^k for any integer k."""
        if k >= 0:
            return cls({_beta_mono(k): Fraction(1)})
        return cls({_ONE: Fraction(1)}, -k)

    # basic queries -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def _key(self):
        return (self.num, self.den)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CoeffExpr.const(other)
        if not isinstance(other, CoeffExpr):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self._key())
            object.__setattr__(self, "_hash", h)
        return h

    def symbols(self) -> set[Sym]:
        out = {s for m, _ in self.num for s, _ in m}
        if self.den:
            out.add(BETA)
        return out

    # arithmetic ----------------------------------------------------------------
    def _lift(self, den: int) -> dict[Mono, Fraction]:
        k = den - self.den
        if k == 0:
            return dict(self.num)
        bm = _beta_mono(k)
        return {_mono_mul(m, bm): c for m, c in self.num}

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        den = max(self.den, other.den)
        acc = self._lift(den)
        for m, c in other._lift(den).items():
            acc[m] = acc.get(m, 0) + c
        return CoeffExpr(acc, den)

    __radd__ = __add__

    def __neg__(self):
        return CoeffExpr({m: -c for m, c in self.num}, self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return ZERO
            return CoeffExpr({m: c * other for m, c in self.num}, self.den)
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not self.num or not other.num:
            return ZERO
        acc: dict[Mono, Fraction] = {}
        for m1, c1 in self.num:
            for m2, c2 in other.num:
                m = _mono_mul(m1, m2)
                acc[m] = acc.get(m, 0) + c1 * c2
        return CoeffExpr(acc, self.den + other.den)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "CoeffExpr":
        """Inverse of r * beta^e * (1/pi)^f; other expressions are not invertible here."""
        if len(self.num) != 1:
            raise ZeroDivisionError("only monomials in beta and 1/pi are invertible")
        (m, c), = self.num
        bpow = _mono_beta_power(m)
        rest = _mono_drop_beta(m, bpow)
        if any(s != PI_INV for s, _ in rest):
            raise ZeroDivisionError("only monomials in beta and 1/pi are invertible")
        if rest:
            raise ZeroDivisionError("1/pi is not invertible in this algebra")
        return CoeffExpr.const(1 / c) * CoeffExpr.beta_power(self.den - bpow)

    def __truediv__(self, other):
        other = _coerce(other)
        return self * other.inverse()

    # derivations ---------------------------------------------------------------
    def derive(self, da: int, db: int) -> "CoeffExpr":
        """Apply d_z (da=1) or dbar_w (db=1): Q_{a,b} -> Q_{a+da, b+db}."""
        acc: dict[Mono, Fraction] = {}
        for m, c in self.num:
            for i, (s, e) in enumerate(m):
                if s == PI_INV:
                    continue
                shifted = (s[0] + da, s[1] + db)
                rest = m[:i] + ((s, e - 1),) + m[i + 1:] if e > 1 else m[:i] + m[i + 1:]
                nm = _mono_mul(rest, ((shifted, 1),))
                acc[nm] = acc.get(nm, 0) + c * e
        out = CoeffExpr(acc, self.den)
        if self.den:
            dbeta = CoeffExpr.sym(1 + da, 1 + db)
            out = out - CoeffExpr(dict(self.num), self.den + 1) * dbeta * self.den
        return out

    def dz(self) -> "CoeffExpr":
        return self.derive(1, 0)

    def dwbar(self) -> "CoeffExpr":
        return self.derive(0, 1)

    # substitution and evaluation -------------------------------------------------
    def specialize(self, rule: Callable[[Sym], Fraction | None]) -> "CoeffExpr":
        """Replace symbols by rationals where ``rule`` returns a value (beta must stay nonzero)."""
        bval = rule(BETA)
        acc: dict[Mono, Fraction] = {}
        for m, c in self.num:
            coef = Fraction(c)
            keep = []
            for s, e in m:
                v = rule(s) if s != PI_INV else None
                if v is None:
                    keep.append((s, e))
                else:
                    coef *= Fraction(v) ** e
            if coef:
                km = tuple(keep)
                acc[km] = acc.get(km, 0) + coef
        if bval is not None:
            if bval == 0:
                raise ZeroDivisionError("specialization sets beta to zero")
            return CoeffExpr(acc) * (1 / Fraction(bval) ** self.den)
        return CoeffExpr(acc, self.den)

    def evaluate(self, values: Mapping[Sym, complex]) -> complex:
        """Numeric value; ``values`` maps (a, b) to Q_{a,b}. 1/pi is filled in automatically."""
        total = 0j
        for m, c in self.num:
            t = complex(c.numerator) / c.denominator
            for s, e in m:
                t *= (1 / math.pi if s == PI_INV else values[s]) ** e
            total += t
        if self.den:
            total /= values[BETA] ** self.den
        return total

    def __repr__(self):
        from .printer import coeff_to_text

        return f"CoeffExpr({coeff_to_text(self)})"


def _coerce(x) -> CoeffExpr | None:
    if isinstance(x, CoeffExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return CoeffExpr.const(x)
    return None


ZERO = CoeffExpr()
ONE = CoeffExpr.const(1)


def csum(items: Iterable[CoeffExpr]) -> CoeffExpr:
    den = 0
    items = list(items)
    for it in items:
        den = max(den, it.den)
    acc: dict[Mono, Fraction] = {}
    for it in items:
        for m, c in it._lift(den).items():
            acc[m] = acc.get(m, 0) + c
    return CoeffExpr(acc, den)
