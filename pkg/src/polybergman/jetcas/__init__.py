"""Exact symbolic engine for the expansion coefficients of polyanalytic kernels."""

from .coeff import BETA, ONE, ZERO, CoeffExpr
from .operators import (
    Calculus,
    Membership,
    dbar_theta_series,
    dw_theta_series,
    membership_test,
    op_d_w_raw,
    op_dbar_w,
    op_dtheta,
    op_dw,
    op_N,
    op_nabla,
    op_S,
    op_S_inv,
    op_Sprime,
    recip_dbar_theta,
    taylor_shift,
    theta_series,
)
from .printer import coeff_to_json, coeff_to_text, series_to_json, series_to_text
from .series import EXACT, U, UBAR, JetSeries, MSeries
from .solver import (
    gaussian_rule,
    printed_q1,
    printed_q2,
    solve_expansion_q1,
    solve_expansion_q2,
    solve_expansion_q2_pair,
    verify_printed_q2,
)
