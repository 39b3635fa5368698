"""Plain-text and JSON rendering of coefficient expressions and jet series.

Symbols print as derivatives of beta = d_z dbar_w Q where possible
(Q_{2,1} -> ∂β, Q_{1,2} -> ∂̄β, Q_{2,2} -> ∂∂̄β); symbols without a
w-bar derivative print as ∂^aQ. Series print in powers of (z-w), (z̄-w̄)
and |z-w|^2.
"""

from __future__ import annotations

from fractions import Fraction

from .coeff import BETA, PI_INV, CoeffExpr


def _pow(base: str, e: int) -> str:
    return base if e == 1 else f"{base}^{e}"


def _name_beta_derivative(da: int, db: int) -> str:
    out = ""
    if da:
        out += _pow("∂", da)
    if db:
        out += _pow("∂̄", db)
    return out + "β"


def _symbol(sym) -> str:
    a, b = sym
    if a >= 1 and b >= 1:
        return _name_beta_derivative(a - 1, b - 1)
    if b == 0 and a >= 1:
        return f"{_pow('∂', a)}Q"
    return f"Q_{{{a},{b}}}"


def _frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _mono_text(m, c: Fraction) -> tuple[str, bool]:
    """Returns (text without sign, negative?)."""
    neg = c < 0
    c = abs(c)
    pi_pow = 0
    syms = []
    for s, e in m:
        if s == PI_INV:
            pi_pow = e
        else:
            name = _symbol(s)
            syms.append(name if e == 1 else _pow(name if name == "β" else f"[{name}]", e))
    if pi_pow:
        pi = _pow("π", pi_pow)
        scalar = f"({c.numerator}/{pi})" if c.denominator == 1 else f"({c.numerator}/({c.denominator}{pi}))"
    else:
        scalar = _frac(c) if (c != 1 or not syms) else ""
    body = " ".join(([scalar] if scalar else []) + syms)
    return body, neg


def coeff_to_text(c: CoeffExpr) -> str:
    if c.is_zero():
        return "0"
    parts = []
    for i, (m, v) in enumerate(c.num):
        body, neg = _mono_text(m, v)
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    text = " ".join(parts)
    if c.den:
        if len(c.num) > 1:
            text = f"({text})"
        text += f"/{_pow('β', c.den)}"
    return text


def _basis_name(p: int, pb: int) -> str:
    both = min(p, pb)
    out = []
    if both:
        out.append(_pow("|z-w|", 2 * both) if both > 1 else "|z-w|^2")
    if p - both:
        out.append(_pow("(z-w)", p - both))
    if pb - both:
        out.append(_pow("(z̄-w̄)", pb - both))
    return " ".join(out)


def series_to_text(s) -> str:
    """Render in powers of (z-w) and (z̄-w̄); u^p ubar^pb = (-1)^(p+pb) (z-w)^p (z̄-w̄)^pb."""
    if s.is_zero():
        return "0"
    parts = []
    for (p, pb), c in sorted(s.terms.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0])):
        c = c if (p + pb) % 2 == 0 else -c
        basis = _basis_name(p, pb)
        ctext = coeff_to_text(c)
        if basis:
            parts.append(f"[{ctext}] {basis}")
        else:
            parts.append(ctext)
    return " + ".join(parts)


symbol_name = _symbol


def coeff_to_json(c: CoeffExpr) -> dict:
    monos = []
    for m, v in c.num:
        pi_pow = 0
        syms = {}
        for s, e in m:
            if s == PI_INV:
                pi_pow = e
            else:
                syms[f"Q_{s[0]}{s[1]}" if max(s) < 10 else f"Q_{s[0]},{s[1]}"] = e
        monos.append({"scalar": _frac(v), "inverse_pi_power": pi_pow, "symbols": syms})
    return {"beta_denominator_power": c.den, "monomials": monos}


def series_to_json(s) -> dict:
    terms = []
    for (p, pb), c in sorted(s.terms.items()):
        c = c if (p + pb) % 2 == 0 else -c
        terms.append({"z_minus_w_power": p, "zbar_minus_wbar_power": pb, "text": coeff_to_text(c),
                      "coefficient": coeff_to_json(c)})
    from .series import EXACT

    return {"truncation": None if s.prec >= EXACT else s.prec, "terms": terms}
