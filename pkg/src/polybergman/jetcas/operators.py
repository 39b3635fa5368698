"""Operator calculus on jet series.

Conventions: u = w - z, ubar = conj(w) - conj(z). Multiplication by (z - w)
is multiplication by -u. Coefficients depend on (z, conj(w)), so the
holomorphic w-derivative only sees u, while the antiholomorphic one sees
ubar and shifts symbols Q_{a,b} -> Q_{a,b+1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from ..errors import InexactDivisionError, UbarDegreeError
from .coeff import CoeffExpr
from .series import EXACT, U, JetSeries, MSeries, ssum

DEFAULT_T = 6
DEFAULT_K = 3


# -- building blocks ----------------------------------------------------------


def theta_series(T: int = DEFAULT_T) -> JetSeries:
    """Phase function sum_j u^j Q_{j+1,0}/(j+1)!."""
    if T < 0:
        raise ValueError("T must be >= 0")
    return JetSeries({(j, 0): CoeffExpr.sym(j + 1, 0) * Fraction(1, factorial(j + 1)) for j in range(T + 1)}, T)


def dbar_theta_series(T: int = DEFAULT_T) -> JetSeries:
    return JetSeries({(j, 0): CoeffExpr.sym(j + 1, 1) * Fraction(1, factorial(j + 1)) for j in range(T + 1)}, T)


def recip_dbar_theta(T: int = DEFAULT_T) -> JetSeries:
    """1 / dbar_w(theta), by the geometric series around 1/beta."""
    return dbar_theta_series(T).inverse(T)


def dw_theta_series(T: int = DEFAULT_T) -> JetSeries:
    """Holomorphic w-derivative of the phase: sum_j (j+1)/(j+2)! u^j Q_{j+2,0}."""
    return JetSeries(
        {(j, 0): CoeffExpr.sym(j + 2, 0) * Fraction(j + 1, factorial(j + 2)) for j in range(T + 1)}, T
    )


class Calculus:
    """Operators sharing one jet truncation T (caches the phase series)."""

    def __init__(self, T: int = DEFAULT_T):
        self.T = T
        self.recip = recip_dbar_theta(T)
        self.dbar_theta = dbar_theta_series(T)
        self.ratio = (dw_theta_series(T) * self.recip).truncate(T)

    # derivations ---------------------------------------------------------------
    @staticmethod
    def dbar_w(s: JetSeries) -> JetSeries:
        return s.dbar_w()

    @staticmethod
    def d_w_raw(s: JetSeries) -> JetSeries:
        return s.d_u()

    def dtheta(self, s: JetSeries) -> JetSeries:
        return self.recip * s.dbar_w()

    def dw(self, s: JetSeries) -> JetSeries:
        return s.d_u() - self.ratio * s.dbar_w()

    def laplace(self, s: JetSeries) -> JetSeries:
        """d_w d_theta."""
        return self.dw(self.dtheta(s))

    def laplace_power(self, s: JetSeries, i: int) -> JetSeries:
        for _ in range(i):
            if s.is_zero() and s.prec >= EXACT:
                break
            s = self.laplace(s)
        return s

    # graded operators -------------------------------------------------------------
    def nabla(self, a: MSeries) -> MSeries:
        """d_theta + 2m M_{z-w}, with M_{z-w} = -u."""
        out = a.map(self.dtheta)
        return out + a.map(lambda s: s * U * (-2)).raise_grade(1)

    def _diffuse(self, a: MSeries, k: int, sign: int, min_grade: int | None) -> MSeries:
        if k < 0:
            raise ValueError("k must be >= 0")
        parts = {}
        for g, s in a.grades.items():
            cur = s
            for i in range(k + 1):
                tg = g - i
                if min_grade is not None and tg < min_grade:
                    break
                if i:
                    cur = self.laplace(cur)
                coef = Fraction(sign**i, factorial(i) * 2**i)
                parts.setdefault(tg, []).append(cur * coef)
        return MSeries({g: ssum(v) for g, v in parts.items()})

    def S(self, a: MSeries, k: int = DEFAULT_K, min_grade: int | None = None) -> MSeries:
        """exp((2m)^-1 d_w d_theta), keeping k powers of 1/(2m)."""
        return self._diffuse(a, k, 1, min_grade)

    def S_inv(self, a: MSeries, k: int = DEFAULT_K, min_grade: int | None = None) -> MSeries:
        return self._diffuse(a, k, -1, min_grade)

    def N(self, s: JetSeries) -> JetSeries:
        return op_N(s, self.T)

    def Sprime(self, a: MSeries, k: int = DEFAULT_K, min_grade: int | None = None) -> MSeries:
        """S M_{1/dbar theta} S^-1 N S."""
        x = self.S(a, k, min_grade)
        x = x.map(self.N)
        x = self.S_inv(x, k, min_grade)
        x = x.map(lambda s: self.recip * s)
        return self.S(x, k, min_grade)


# -- the difference quotient operator N ------------------------------------------------


def taylor_shift(c: CoeffExpr, T: int) -> JetSeries:
    """c evaluated at z -> w, expanded in u: sum_s u^s d_z^s c / s!."""
    terms = {}
    cur = c
    for s in range(T + 1):
        if cur.is_zero():
            break
        terms[(s, 0)] = cur * Fraction(1, factorial(s))
        cur = cur.dz()
    return JetSeries(terms, T)


def op_N(s: JetSeries, T: int | None = None, q: int = 2) -> JetSeries:
    """(f_i(z,w) - f_i(w,w)) / (z - w) on each power of conj(z).

    With f = A + ubar B (A, B series in u) this equals D[A] + ubar D[B],
    where D[g] = (g - g|_{z=w}) / (-u). The diagonal value of g is the
    Taylor shift of its u^0 coefficient.
    """
    if s.ubar_degree() > q - 1:
        raise UbarDegreeError(f"N needs ubar-degree <= {q - 1}, got {s.ubar_degree()}")
    out = []
    for pb in range(q):
        comp = {(p, 0): c for (p, b), c in s.terms.items() if b == pb}
        uprec = s.prec - pb if s.prec < EXACT else EXACT
        if uprec < 0:
            continue
        g = JetSeries(comp, uprec)
        c0 = g[(0, 0)]
        shift_order = uprec if uprec < EXACT else (T if T is not None else DEFAULT_T)
        diff = g - taylor_shift(c0, shift_order)
        if not diff[(0, 0)].is_zero():
            raise InexactDivisionError("difference quotient has a nonzero constant term")
        quot = JetSeries({(p - 1, 0): -c for (p, _), c in diff.terms.items()}, diff.prec - 1)
        out.append(quot.shift(0, pb) if pb else quot)
    if not out:
        return JetSeries.zero(s.prec - 1)
    return ssum(out)


# -- membership ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Membership:
    ok: bool
    residual: JetSeries
    certified: bool
    k: int
    q: int

    def to_dict(self):
        from .printer import series_to_json

        return {"ok": self.ok, "certified": self.certified, "k": self.k, "q": self.q,
                "residual": series_to_json(self.residual)}


def membership_test(a, k: int, q: int) -> Membership | dict[int, Membership]:
    """Monomial test for M_{z-w}^k R_q: every term has u-power >= k and ubar-power <= q-1.

    ``certified`` is False when the truncation is too low to see every
    position with u-power < k and ubar-power <= q-1.
    """
    if isinstance(a, MSeries):
        return {g: membership_test(s, k, q) for g, s in a.grades.items()}
    bad = {key: c for key, c in a.terms.items() if key[0] < k or key[1] > q - 1}
    certified = a.prec >= (k - 1) + (q - 1)
    return Membership(ok=not bad, residual=JetSeries(bad, a.prec), certified=certified, k=k, q=q)


# module-level aliases matching the operation names ----------------------------------------

_default = None


def _calc(T: int | None) -> Calculus:
    global _default
    if T is None:
        if _default is None:
            _default = Calculus(DEFAULT_T)
        return _default
    return Calculus(T)


def op_dbar_w(s: JetSeries) -> JetSeries:
    return s.dbar_w()


def op_d_w_raw(s: JetSeries) -> JetSeries:
    return s.d_u()


def op_dtheta(s: JetSeries, T: int | None = None) -> JetSeries:
    return _calc(T).dtheta(s)


def op_dw(s: JetSeries, T: int | None = None) -> JetSeries:
    return _calc(T).dw(s)


def op_nabla(a: MSeries, T: int | None = None) -> MSeries:
    return _calc(T).nabla(a)


def op_S(a: MSeries, k: int = DEFAULT_K, T: int | None = None) -> MSeries:
    return _calc(T).S(a, k)


def op_S_inv(a: MSeries, k: int = DEFAULT_K, T: int | None = None) -> MSeries:
    return _calc(T).S_inv(a, k)


def op_Sprime(a: MSeries, k: int = DEFAULT_K, T: int | None = None) -> MSeries:
    return _calc(T).Sprime(a, k)
