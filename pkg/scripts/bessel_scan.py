"""Distance of the boundaries from k mu -+ J_k(-b/mu) over b in [20, 60] at mu = 1."""
import csv

from _common import out_dir
from jtongues import residual_scan

out = out_dir(__doc__)
with open(out / "bessel_scan.csv", "w", newline="", encoding="utf-8") as fh:
    w = csv.writer(fh)
    w.writerow(["k", "b", "residual_0", "residual_pi"])
    for k in range(3):
        s = residual_scan(k, 1.0, (20.0, 60.0), n_points=41)
        for b, r0, rp in s.rows:
            w.writerow([k, b, f"{r0:.6e}", f"{rp:.6e}"])
        print(f"k={k}: residual 20 -> 60: {s.residual_0[0]:.2e} -> {s.residual_0[-1]:.2e} (side 0), "
              f"{s.residual_pi[0]:.2e} -> {s.residual_pi[-1]:.2e} (side pi); "
              f"fitted exponents {s.exponent_0:.2f}, {s.exponent_pi:.2f}")
