"""Tongue boundaries k = 0, 1, 2 at mu = 1 for b <= 10, and their bridges."""
import math
import time

from _common import out_dir, write_curves
from jtongues import TraceConfig, find_bridges, trace_boundary

MU, B_MAX = 1.0, 10.0

out = out_dir(__doc__)
cfg = TraceConfig(h=0.01)
t0 = time.perf_counter()
curves = []
for k in range(3):
    pair = (trace_boundary(k, 0.0, MU, B_MAX, cfg), trace_boundary(k, math.pi, MU, B_MAX, cfg))
    curves += pair
    for br in find_bridges(k, MU, B_MAX, cfg, curves=pair):
        print(f"k={k}  bridge b*={br.b_star:.10f}  a*={br.a_star:.12f}  |a*-k mu|={abs(br.a_star - k * MU):.1e}")
write_curves(out / "fig1_mu1.csv", curves)
print(f"{sum(len(c.samples) for c in curves)} samples in {time.perf_counter() - t0:.1f} s -> {out / 'fig1_mu1.csv'}")
