"""Slow curve at a = 2 as b grows: empty, an oval, the oval widening, two x-winding curves."""
import csv

from _common import out_dir
from jtongues import slow_curve

A = 2.0
out = out_dir(__doc__)
with open(out / "fig4_slow_curves.csv", "w", newline="", encoding="utf-8") as fh:
    w = csv.writer(fh)
    w.writerow(["b", "region", "component", "t", "x"])
    for b in (0.5, 1.5, 2.5, 3.5):
        sc = slow_curve(A, b)
        print(f"b={b}: region {sc.region.value}, {len(sc.components)} components, "
              f"{len(sc.folds)} folds, windings {sc.windings}, contractible {sc.contractible}")
        for i, comp in enumerate(sc.components):
            for t, x in comp:
                w.writerow([b, sc.region.value, i, f"{t:.17g}", f"{x:.17g}"])
