"""Print the solved expansion coefficients and check the recorded second-order term.

The ambiguous symbol in the recorded q = 2, j = 2 coefficient is tried under
each reading; only one of them satisfies the order-2 conditions.
Takes about a minute: python3 scripts/symbolic_report.py
"""

from polybergman.jetcas import coeff_to_text, series_to_text
from polybergman.jetcas.solver import solve_expansion_q1, solve_expansion_q2_pair, verify_printed_q2


def main():
    for j, c in enumerate(solve_expansion_q1(2)):
        print(f"q=1  L_{j} = {coeff_to_text(c)}")
    for j, s in enumerate(solve_expansion_q2_pair(1)):
        print(f"q=2  L_{j} = {series_to_text(s)}")
    print()
    for reading in ("dbeta", "dbarbeta", "beta"):
        rep = verify_printed_q2(2, reading=reading)
        print(f"reading {reading:9s} conditions satisfied: {rep.ok}")
        print(f"  solver minus recorded: {rep.difference_from_solver['text']}")


if __name__ == "__main__":
    main()
