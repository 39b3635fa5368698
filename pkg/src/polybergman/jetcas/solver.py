"""Coefficient solvers for the expansion L ~ sum_j m^{q-j} L_j, q = 1, 2.

Two independent routes are available for q = 2:

* ``solve_expansion_q2`` imposes the combined order-j conditions modulo
  M_{z-w}^2 R_2 (available for j <= 1).
* ``solve_expansion_q2_pair`` imposes the two first-order conditions built
  from S and S' = S M_{1/dbar theta} S^-1 N S grade by grade (any j).

Both work in the ansatz span {1, ubar, u, u ubar} with coefficients in the
beta-symbol algebra, which is the exact form of a function that is
bianalytic in each of z and conj(w) near the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from ..errors import SolverInconsistentError
from .coeff import ZERO, CoeffExpr
from .operators import Calculus, membership_test
from .printer import coeff_to_text, series_to_json, series_to_text
from .series import U, UBAR, JetSeries, MSeries, ssum

PI = CoeffExpr.pi_inv()
BASIS_Q2 = ((0, 0), (0, 1), (1, 0), (1, 1))


def beta_d(da: int = 0, db: int = 0) -> CoeffExpr:
    """d_z^da dbar_w^db beta as a symbol."""
    return CoeffExpr.sym(1 + da, 1 + db)


def log_beta_d(da: int, db: int) -> CoeffExpr:
    """d_z^da dbar_w^db log beta for da + db >= 1."""
    if da + db < 1:
        raise ValueError("log beta itself is not in the algebra")
    if db >= 1:
        e = beta_d(0, 1) * CoeffExpr.beta_power(-1)
        db -= 1
    else:
        e = beta_d(1, 0) * CoeffExpr.beta_power(-1)
        da -= 1
    for _ in range(da):
        e = e.dz()
    for _ in range(db):
        e = e.dwbar()
    return e


def gaussian_rule(sym):
    """Specialization for the polarized Gaussian potential Q(z, w) = z conj(w)."""
    if sym == (1, 1):
        return Fraction(1)
    if sym in ((1, 0), (0, 1)):
        return None
    return Fraction(0)


# -- printed formulas --------------------------------------------------------------------


def printed_q1(j: int) -> CoeffExpr:
    if j == 0:
        return beta_d() * PI * 2
    if j == 1:
        return log_beta_d(1, 1) * PI * Fraction(1, 2)
    raise ValueError("closed forms are recorded for j = 0, 1 only")


def xi2(reading: str = "dbeta") -> CoeffExpr:
    """Quadratic-remainder coefficient of L^2_2.

    ``reading`` fixes how the one ambiguous factor in the recorded formula is
    interpreted: ``"dbeta"`` takes it to be d_z beta.
    """
    b = CoeffExpr.beta_power
    amb = {"dbeta": beta_d(1, 0), "dbarbeta": beta_d(0, 1), "beta": beta_d()}[reading]
    terms = [
        (Fraction(3, 2), beta_d(1, 2) * beta_d(1, 0) * b(-2)),
        (Fraction(-13, 2), amb * beta_d(1, 1) * beta_d(0, 1) * b(-3)),
        (Fraction(3, 2), beta_d(1, 1) ** 2 * b(-2)),
        (Fraction(-1), beta_d(1, 0) ** 2 * beta_d(0, 2) * b(-3)),
        (Fraction(17, 4), beta_d(1, 0) ** 2 * beta_d(0, 1) ** 2 * b(-4)),
        (Fraction(-2, 3), beta_d(2, 2) * b(-1)),
        (Fraction(3, 2), beta_d(2, 1) * beta_d(0, 1) * b(-2)),
        (Fraction(-1), beta_d(2, 0) * beta_d(0, 1) ** 2 * b(-3)),
        (Fraction(1, 3), beta_d(2, 0) * beta_d(0, 2) * b(-2)),
    ]
    return sum((e * c for c, e in terms), ZERO) * PI


def printed_q2(j: int, reading: str = "dbeta") -> JetSeries:
    """Recorded L^2_j in the u, ubar basis ((z-w) = -u, (conj z - conj w) = -ubar)."""
    if j == 0:
        return JetSeries.monomial(1, 1, beta_d() ** 2 * PI * (-4))
    if j == 1:
        return JetSeries({
            (0, 0): beta_d() * PI * 4,
            (0, 1): beta_d(0, 1) * PI * 2,
            (1, 0): beta_d(1, 0) * PI * (-2),
            (1, 1): beta_d(1, 1) * PI * (-3) + beta_d(1, 0) * beta_d(0, 1) * CoeffExpr.beta_power(-1) * PI * 2,
        })
    if j == 2:
        return JetSeries({
            (0, 0): log_beta_d(1, 1) * PI * 2,
            (0, 1): log_beta_d(1, 2) * PI,
            (1, 0): log_beta_d(2, 1) * PI * (-1),
            (1, 1): xi2(reading),
        })
    raise ValueError("recorded formulas exist for j = 0, 1, 2")


# -- q = 1 ---------------------------------------------------------------------------------


def q1_condition(calc: Calculus, L: list[CoeffExpr], j: int) -> JetSeries:
    """sum_i (d_w d_theta)^i [L_{j-i}/dbar theta] / (i! 2^i), minus 2/pi at j = 0."""
    parts = []
    for i in range(j + 1):
        s = calc.recip * JetSeries.const(L[j - i])
        s = calc.laplace_power(s, i)
        parts.append(s * Fraction(1, factorial(i) * 2**i))
    out = ssum(parts)
    if j == 0:
        out = out - JetSeries.const(PI * 2)
    return out


def solve_expansion_q1(j_max: int, T: int | None = None) -> list[CoeffExpr]:
    """L_0 .. L_{j_max} for the analytic case, each a function of (z, conj w)."""
    T = T if T is not None else max(2 * j_max + 2, 4)
    calc = Calculus(T)
    L: list[CoeffExpr] = []
    for j in range(j_max + 1):
        trial = q1_condition(calc, L + [ZERO], j)
        X = -(trial[(0, 0)] * beta_d())
        L.append(X)
        res = q1_condition(calc, L, j)
        mem = membership_test(res, 1, 1)
        if not mem.ok:
            raise SolverInconsistentError(f"order {j}: residual {series_to_text(mem.residual)}")
    return L


# -- q = 2, combined conditions ----------------------------------------------------------


def _ansatz(X: dict) -> JetSeries:
    return JetSeries({k: v for k, v in X.items()})


def _half_block(calc: Calculus, L0: JetSeries) -> JetSeries:
    """(1/2) L_0 / dbar theta + (2/pi) |z-w|^2 dbar theta."""
    return calc.recip * L0 * Fraction(1, 2) + (calc.dbar_theta * U * UBAR) * (PI * 2)


def united_condition(calc: Calculus, L: list[JetSeries], j: int) -> JetSeries:
    """Order-j combined condition; membership in M_{z-w}^2 R_2 is required."""
    r = calc.recip
    if j == 0:
        return r * L[0] + (calc.dbar_theta * U * UBAR) * (PI * 4)
    if j == 1:
        half = _half_block(calc, L[0])
        dlog = r * calc.dbar_theta.dbar_w()
        G = calc.N(half)
        commutator = calc.laplace(r * G) - r * calc.laplace(G)
        return (
            r * L[1]
            + calc.laplace(half)
            - JetSeries.const(PI * 4)
            - (dlog * UBAR) * (PI * 2)
            - (U * calc.dbar_theta * commutator)
        )
    raise ValueError("combined conditions are implemented for j <= 1")


def _solve_triangular(res0: JetSeries, r: JetSeries, p_rows=(0, 1)) -> dict:
    """X with (r * X + res0) vanishing at u-powers 0, 1 and ubar-powers 0, 1."""
    r0, r1 = r[(0, 0)], r[(1, 0)]
    inv = r0.inverse()
    X = {}
    for pb in (0, 1):
        X[(0, pb)] = -(res0[(0, pb)] * inv)
        if 1 in p_rows:
            X[(1, pb)] = -((res0[(1, pb)] + r1 * X[(0, pb)]) * inv)
    return X


def solve_expansion_q2(j_max: int, T: int = 6) -> list[JetSeries]:
    if j_max > 1:
        raise ValueError("the combined-condition solver covers j <= 1; use solve_expansion_q2_pair")
    calc = Calculus(T)
    L: list[JetSeries] = []
    for j in range(j_max + 1):
        res0 = united_condition(calc, L + [JetSeries.zero()], j)
        X = _solve_triangular(res0, calc.recip)
        L.append(_ansatz(X))
        mem = membership_test(united_condition(calc, L, j), 2, 2)
        if not mem.ok or not mem.certified:
            raise SolverInconsistentError(f"order {j}: residual {series_to_text(mem.residual)}")
    return L


# -- q = 2, S / S' pair ------------------------------------------------------------------------


def remainder_amplitude(calc: Calculus, L: list[JetSeries]) -> MSeries:
    """(L - R) / dbar theta graded by powers of m, with L = sum_j m^{2-j} L_j."""
    r = calc.recip
    grades: dict[int, JetSeries] = {}
    for j, Lj in enumerate(L):
        grades[2 - j] = r * Lj
    rR2 = (calc.dbar_theta * U * UBAR) * (PI * -4)
    rR1 = JetSeries.const(PI * 4) + (r * calc.dbar_theta.dbar_w() * UBAR) * (PI * 2)
    grades[2] = grades.get(2, JetSeries.zero()) - rR2
    grades[1] = grades.get(1, JetSeries.zero()) - rR1
    return MSeries(grades)


def pair_conditions(calc: Calculus, L: list[JetSeries], j: int) -> tuple[JetSeries, JetSeries]:
    """Grade 2-j of S a and of S' a, a = (L - R)/dbar theta; both must lie in M_{z-w} R_2."""
    g = 2 - j
    a = remainder_amplitude(calc, L).abschnitt(g)
    k = j
    Sa = calc.S(a, k, min_grade=g)
    Spa = calc.Sprime(a, k, min_grade=g)
    return Sa[g], Spa[g]


def solve_expansion_q2_pair(j_max: int, T: int | None = None) -> list[JetSeries]:
    T = T if T is not None else 2 * j_max + 4
    calc = Calculus(T)
    r0 = calc.recip[(0, 0)]
    L: list[JetSeries] = []
    for j in range(j_max + 1):
        s_res, _ = pair_conditions(calc, L + [JetSeries.zero()], j)
        X = {(0, pb): -(s_res[(0, pb)] * r0.inverse()) for pb in (0, 1)}
        _, sp_res = pair_conditions(calc, L + [_ansatz(X)], j)
        # the leading u-coefficient of N picks -r0^2 X_{1,pb} from (1/dbar theta) N[(1/dbar theta) L_j]
        for pb in (0, 1):
            X[(1, pb)] = sp_res[(0, pb)] * (r0 * r0).inverse()
        L.append(_ansatz(X))
        s_fin, sp_fin = pair_conditions(calc, L, j)
        for name, res in (("S", s_fin), ("S'", sp_fin)):
            mem = membership_test(res, 1, 2)
            if not mem.ok or not mem.certified:
                raise SolverInconsistentError(f"order {j}, {name} condition: residual {series_to_text(mem.residual)}")
    return L


# -- verification report ------------------------------------------------------------------------


@dataclass
class ConditionReport:
    name: str
    ok: bool
    certified: bool
    residual_text: str
    residual: dict

    def to_dict(self):
        return {"name": self.name, "ok": self.ok, "certified": self.certified,
                "residual_text": self.residual_text, "residual": self.residual}


@dataclass
class VerificationReport:
    j: int
    reading: str
    printed_text: str
    conditions: list[ConditionReport] = field(default_factory=list)
    difference_from_solver: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.conditions)

    def to_dict(self):
        return {"j": self.j, "ok": self.ok, "reading": self.reading, "printed": self.printed_text,
                "conditions": [c.to_dict() for c in self.conditions],
                "difference_from_solver": self.difference_from_solver}


def _report(name, res, k):
    mem = membership_test(res, k, 2)
    return ConditionReport(name, mem.ok, mem.certified, series_to_text(mem.residual), series_to_json(mem.residual))


def verify_printed_q2(j: int, T: int | None = None, reading: str = "dbeta") -> VerificationReport:
    """Substitute the recorded L^2_0..L^2_j and test the order-j conditions.

    Discrepancies are reported position by position, never corrected.
    """
    if j not in (0, 1, 2):
        raise ValueError("j must be 0, 1 or 2")
    T = T if T is not None else (6 if j < 2 else 8)
    calc = Calculus(T)
    L = [printed_q2(i, reading) for i in range(j + 1)]
    rep = VerificationReport(j=j, reading=reading, printed_text=series_to_text(L[j]))
    if j <= 1:
        rep.conditions.append(_report("combined", united_condition(calc, L, j), 2))
    s_res, sp_res = pair_conditions(calc, L, j)
    rep.conditions.append(_report("S", s_res, 1))
    rep.conditions.append(_report("S'", sp_res, 1))
    solved = solve_expansion_q2_pair(j, T)[j]
    diff = solved - L[j]
    rep.difference_from_solver = {
        "solver_minus_printed": series_to_json(diff),
        "text": series_to_text(diff),
        "by_position": {f"u^{p} ubar^{pb}": coeff_to_text(diff[(p, pb)]) for p, pb in BASIS_Q2},
    }
    return rep
