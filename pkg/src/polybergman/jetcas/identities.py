"""Randomized exact checks of the operator identities the solver relies on."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .coeff import CoeffExpr
from .operators import Calculus, op_N
from .series import U, JetSeries, MSeries


def random_coeff(rng: random.Random, n_terms: int = 2) -> CoeffExpr:
    """Small rational combination of products of jet symbols, possibly over beta."""
    out = CoeffExpr.const(0)
    for _ in range(n_terms):
        term = CoeffExpr.const(Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
        for _ in range(rng.randint(0, 2)):
            a = rng.randint(1, 3)
            b = rng.randint(0, 2)
            term = term * CoeffExpr.sym(a, b)
        if rng.random() < 0.3:
            term = term * CoeffExpr.beta_power(-1)
        out = out + term
    return out


def random_series(rng: random.Random, T: int, max_ubar: int | None = None, density: float = 0.4) -> JetSeries:
    """Random series truncated at total degree T (``max_ubar`` caps the conj-power)."""
    terms = {}
    for p in range(T + 1):
        for pb in range(T + 1 - p):
            if max_ubar is not None and pb > max_ubar:
                continue
            if rng.random() < density:
                c = random_coeff(rng)
                if not c.is_zero():
                    terms[(p, pb)] = c
    if not terms:
        terms[(0, 0)] = CoeffExpr.const(1)
    return JetSeries(terms, T)


@dataclass
class IdentityResult:
    name: str
    trials: int = 0
    failures: int = 0
    failing_trials: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def record(self, i: int, residual_zero: bool):
        self.trials += 1
        if not residual_zero:
            self.failures += 1
            self.failing_trials.append(i)

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "trials": self.trials, "failures": self.failures,
                "failing_trials": self.failing_trials}


def _grades_zero(x: MSeries, min_grade: int) -> bool:
    return x.abschnitt(min_grade).is_zero()


def check_identities(n: int = 50, seed: int = 0, T: int = 6, k: int = 3) -> dict[str, IdentityResult]:
    """Check, on ``n`` random series with exact rational arithmetic:

    * S nabla = 2m M S          (grades >= -(k-1), where both sides are complete)
    * nabla S^-1 = 2m S^-1 M    (same grades)
    * N M = id                  (series of conj-degree <= 1)
    * d_w d_theta = d_theta d_w
    """
    calc = Calculus(T)
    rng = random.Random(seed)
    out = {name: IdentityResult(name) for name in ("S_nabla", "nabla_S_inv", "N_M", "dw_dtheta_commute")}
    times_m = lambda x: x.map(lambda s: s * U * (-2)).raise_grade(1)  # noqa: E731  (2m M_{z-w}, M = -u)
    for i in range(n):
        s = random_series(rng, T)
        a = MSeries({0: s})
        low = 1 - k
        lhs = calc.S(calc.nabla(a), k, min_grade=low)
        rhs = times_m(calc.S(a, k))
        out["S_nabla"].record(i, _grades_zero(lhs - rhs, low))

        lhs = calc.nabla(calc.S_inv(a, k))
        rhs = calc.S_inv(times_m(a), k)
        out["nabla_S_inv"].record(i, _grades_zero(lhs - rhs, low))

        b = random_series(rng, T, max_ubar=1)
        out["N_M"].record(i, (op_N(-(b * U), T) - b).is_zero())

        out["dw_dtheta_commute"].record(i, (calc.dw(calc.dtheta(s)) - calc.dtheta(calc.dw(s))).is_zero())
    return out
