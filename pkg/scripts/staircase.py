"""Rotation number against a at fixed b (the Shapiro-step staircase), with map classes."""
import numpy as np

from _common import out_dir
from jtongues import Params, rotation_number

MU, B = 1.0, 1.5
out = out_dir(__doc__)
a_grid = np.linspace(-0.5, 4.0, 451)
res = [rotation_number(Params(a, B, MU)) for a in a_grid]
rho = np.array([r.rho for r in res])
locked = np.array([r.map_class.value != "elliptic" for r in res])
np.savetxt(out / "staircase.csv", np.column_stack([a_grid, rho, locked]), delimiter=",",
           header="a,rho,locked", comments="", fmt="%.17g")
for k in range(int(rho.max()) + 1):
    sel = locked & (rho == k)
    if sel.any():
        print(f"step rho={k}: a in [{a_grid[sel].min():.3f}, {a_grid[sel].max():.3f}]")
