"""Width of the gap between neighbouring tongues at fixed (a, b) as mu shrinks."""
import numpy as np

from _common import out_dir
from jtongues import gap_near_point

POINTS = [(1.0, 1.0), (1.5, 1.0), (1.0, 0.6)]
MUS = np.array([0.25, 0.2, 0.15, 0.1])

out = out_dir(__doc__)
rows = []
for a, b in POINTS:
    res = [gap_near_point(a, b, mu) for mu in MUS]
    gaps = np.array([g for _, g in res])
    slope = np.polyfit(1 / MUS, np.log(gaps), 1)[0]
    print(f"(a, b)=({a}, {b}): k={[k for k, _ in res]} gaps={['%.2e' % g for g in gaps]} "
          f"d log gap / d(1/mu) = {slope:.2f}")
    rows += [(a, b, mu, k, g) for mu, (k, g) in zip(MUS, res)]
np.savetxt(out / "gap_scaling.csv", np.array(rows), delimiter=",", header="a,b,mu,k,gap",
           comments="", fmt="%.17g")
