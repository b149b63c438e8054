"""Tongue diagrams at small mu: k = 1..10 at mu = 0.2 and k = 1..20 at mu = 0.1."""
import math
import time

from _common import out_dir, write_curves
from jtongues import TraceConfig, trace_boundary

RUNS = [(0.2, range(1, 11), 5.0, "fig2_mu0.2.csv"), (0.1, range(1, 21), 3.0, "fig3_mu0.1.csv")]

out = out_dir(__doc__)
cfg = TraceConfig(h=0.01)
for mu, ks, b_max, name in RUNS:
    t0 = time.perf_counter()
    curves = [trace_boundary(k, s, mu, b_max, cfg) for k in ks for s in (0.0, math.pi)]
    nb = sum(c.count("bisection") for c in curves)
    worst = max(c.residuals.max() for c in curves)
    write_curves(out / name, curves)
    print(f"mu={mu}: {len(curves)} curves complete={all(c.complete for c in curves)} "
          f"bisections={nb} max residual={worst:.1e} ({time.perf_counter() - t0:.1f} s)")
