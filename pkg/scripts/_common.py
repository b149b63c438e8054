import argparse
import csv
from pathlib import Path


def out_dir(description):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--out", default="results", help="output directory")
    args = ap.parse_args()
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_curves(path, curves):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "side", "b", "a", "residual", "method"])
        for c in curves:
            side = "0" if c.side == 0.0 else "pi"
            for s in c.samples:
                w.writerow([c.k, side, f"{s.b:.17g}", f"{s.a:.17g}", f"{s.residual:.3e}", s.method])
