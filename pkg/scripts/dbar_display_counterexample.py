"""Rescaled d-bar estimate: the displayed constant versus the chain-rule constant.

For u = conj(z) and Q = |z|^2 the left side |d-bar u(0)|^2 is 1 for every m,
while the displayed right side decays like 1/m. The chain-rule version picks
up the factor m / delta^2 and holds. Run: python3 scripts/dbar_display_counterexample.py
"""

from polybergman.bounds import CHAIN_CONSTANT, DISPLAY_CONSTANT, BianalyticTestFn, bound_dbar_rescaled
from polybergman.potential import gaussian


def main():
    u = BianalyticTestFn(c=1.0)
    P = gaussian()
    print(f"{'m':>6} {'delta':>6} {'lhs':>8} {'display rhs':>12} {'chain rhs':>12}  display holds")
    for m in (1, 2, 5, 10, 40):
        for delta in (0.5, 1.0):
            lhs, rhs_display = bound_dbar_rescaled(u, P, m, delta, constant=DISPLAY_CONSTANT)
            _, rhs_chain = bound_dbar_rescaled(u, P, m, delta, constant=CHAIN_CONSTANT)
            print(f"{m:>6} {delta:>6} {lhs:>8.4f} {rhs_display:>12.4f} {rhs_chain:>12.4f}  {lhs <= rhs_display}")


if __name__ == "__main__":
    main()
