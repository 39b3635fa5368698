"""Second polyanalytic metric of the model disk for q = 2, against c / (1 - |z|^2)^2.

Prints the density times (1 - |z|^2)^2 at a few points. At eps = 0 the
product is constant in z, which identifies c; other eps show the dependence
on the second direction. Run: python3 scripts/disk_second_metric.py
"""

from polybergman.metrics import SourceMetrics
from polybergman.sources import KoshelevSource


def main():
    sm = SourceMetrics(KoshelevSource(2), tag="koshelev")
    for z in (0j, 0.3, 0.2 + 0.4j, -0.5 + 0.1j):
        for eps in (0j, 0.1, 0.05 + 0.05j):
            s = sm.metric2_poly(z, eps)
            c = s.isothermal * (1 - abs(z) ** 2) ** 2
            print(f"z={complex(z):.3g}  eps={complex(eps):.3g}  density*(1-|z|^2)^2 = {c:.10f}  "
                  f"dz2 = {s.dz2:.3g}")


if __name__ == "__main__":
    main()
