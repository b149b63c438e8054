"""Geometry of the slow curve cos x + a + b cos t = 0 on the torus.

With mu as the small parameter, x is fast and t slow.  The slow curve is
attracting where sin x > 0 and repelling where sin x < 0; its folds sit at
x in {0, pi}.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Region", "SlowCurve", "classify_region", "slow_curve", "fold_points"]

TWO_PI = 2.0 * math.pi
BOUNDARY_TOL = 1e-12


class Region(enum.Enum):
    A = "A"            # b < a - 1: no slow curve
    B = "B"            # a - 1 < b < a + 1, a + b > 1: one oval
    C = "C"            # b > a + 1: two curves winding once in x
    C_PRIME = "C'"     # a + b < 1: two curves winding once in t, no folds
    BOUNDARY = "boundary"


def classify_region(a: float, b: float, tol: float = BOUNDARY_TOL) -> Region:
    """Region of the (a, b) plane; negative a or b reduce by symmetry."""
    a, b = abs(a), abs(b)
    lines = (b - (a - 1.0), b - (a + 1.0), a + b - 1.0)
    if any(abs(d) <= tol for d in lines):
        return Region.BOUNDARY
    if b < a - 1.0:
        return Region.A
    if b > a + 1.0:
        return Region.C
    if a + b > 1.0:
        return Region.B
    return Region.C_PRIME


@dataclass
class SlowCurve:
    region: Region
    components: list = field(default_factory=list)   # (n, 2) arrays of lifted (t, x)
    folds: list = field(default_factory=list)        # (t, x) with t in [0, 2pi)
    windings: list = field(default_factory=list)     # (t-winding, x-winding)

    @property
    def contractible(self) -> list[bool]:
        return [tw == 0 and xw == 0 for tw, xw in self.windings]


def _roots_of_cos(level: float) -> list[float]:
    """All t in [0, 2pi) with cos t = level."""
    if abs(level) > 1.0:
        return []
    t = math.acos(level)
    if t == 0.0 or t == math.pi:
        return [t]
    return [t, TWO_PI - t]


def fold_points(a: float, b: float) -> list[tuple[float, float]]:
    """Points of the slow curve with sin x = 0, sorted by t."""
    if b == 0.0:
        return []
    out = [(t, 0.0) for t in _roots_of_cos((-1.0 - a) / b)]
    out += [(t, math.pi) for t in _roots_of_cos((1.0 - a) / b)]
    return sorted(out)


def _branch(a, b, t):
    c = np.clip(a + b * np.cos(t), -1.0, 1.0)
    return np.arccos(-c)


def _closed_winding(pts):
    """Winding of a closed lifted polyline: end minus start over 2 pi."""
    d = pts[-1] - pts[0]
    return int(round(d[0] / TWO_PI)), int(round(d[1] / TWO_PI))


def slow_curve(a: float, b: float, n_samples: int = 400) -> SlowCurve:
    """Sample the slow curve into closed components on the lifted torus.

    Over an arc of t where |a + b cos t| <= 1 the curve has the two branches
    x1 = arccos(-(a + b cos t)) in [0, pi] and x2 = 2 pi - x1.  They join at
    arc ends: at x = pi where a + b cos t = 1, and at x = 0 ~ 2 pi where it
    equals -1.  Each component is returned as a closed lifted loop (last
    point equals the first up to a lattice vector), so its winding pair is
    read off directly.
    """
    region = classify_region(a, b)
    curve = SlowCurve(region, folds=fold_points(a, b))
    cuts = sorted({t for t, _ in curve.folds})

    if not cuts:
        if abs(a) + abs(b) >= 1.0 and not (b == 0.0 and abs(a) == 1.0):
            return curve  # empty (region A or its mirror)
        t = np.linspace(0.0, TWO_PI, n_samples + 1)
        x1 = _branch(a, b, t)
        for x in (x1, TWO_PI - x1):
            pts = np.column_stack([t, x])
            curve.components.append(pts)
            curve.windings.append(_closed_winding(pts))
        return curve

    # arcs between consecutive fold times on which the curve exists
    arcs = []
    for i, t0 in enumerate(cuts):
        t1 = cuts[i + 1] if i + 1 < len(cuts) else cuts[0] + TWO_PI
        mid = 0.5 * (t0 + t1)
        if abs(a + b * math.cos(mid)) <= 1.0:
            arcs.append((t0, t1))

    for t0, t1 in arcs:
        t = np.linspace(t0, t1, max(n_samples // max(len(arcs), 1), 8))
        x1 = _branch(a, b, t)
        x2 = TWO_PI - x1
        # at the far end the branches meet at pi (shift 0) or at 0 ~ 2pi,
        # where x2 must be lowered by 2 pi to continue the lift
        shift = 0.0 if abs(x1[-1] - math.pi) < abs(x1[-1]) else TWO_PI
        back = (x2 - shift)[::-1]
        pts = np.column_stack([np.concatenate([t, t[::-1]]), np.concatenate([x1, back])])
        curve.components.append(pts)
        curve.windings.append(_closed_winding(pts))
    return curve
