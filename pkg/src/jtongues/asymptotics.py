"""Bessel functions from their integral and the large-b boundary asymptote.

For large drive amplitude the tongue boundaries approach

    a_{0,k}  ~ k mu - J_k(-b/mu)
    a_{pi,k} ~ k mu + J_k(-b/mu)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tongues import TraceConfig, boundary_at, _x0

__all__ = ["BesselEval", "ScanResult", "bessel_j", "boundary_asymptote", "residual_scan",
           "default_scan_range"]

_QUAD_TOL = 1e-12
_MAX_NODES = 1 << 20


@dataclass(frozen=True)
class BesselEval:
    k: int
    z: float
    value: float
    quadrature_error: float
    nodes: int


def _trapezoid(k, z, n):
    t = np.arange(n) * (2.0 * math.pi / n)
    return float(np.mean(np.cos(k * t - z * np.sin(t))))


def bessel_j(k: int, z: float) -> BesselEval:
    """J_k(z) = (1/2pi) int_0^{2pi} cos(k t - z sin t) dt.

    The integrand is smooth and periodic, so the trapezoid rule converges
    geometrically once the node count exceeds |k| + |z|; nodes are doubled
    until two successive sums agree to 1e-12.
    """
    k = int(k)
    z = float(z)
    n = 16
    while n < 2 * (abs(k) + abs(z)) + 16:
        n *= 2
    prev = _trapezoid(k, z, n)
    while True:
        n *= 2
        cur = _trapezoid(k, z, n)
        err = abs(cur - prev)
        if err < _QUAD_TOL or n >= _MAX_NODES:
            return BesselEval(k, z, cur, err, n)
        prev = cur


def boundary_asymptote(k: int, mu: float, b: float, side) -> float:
    if not (b > 0 and mu > 0):
        raise ValueError("need b > 0 and mu > 0")
    j = bessel_j(k, -b / mu).value
    return k * mu - j if _x0(side) == 0.0 else k * mu + j


def default_scan_range(mu: float, c: float = 5.0) -> tuple[float, float]:
    lo = max(20.0, c / mu)
    return lo, 3.0 * lo


@dataclass
class ScanResult:
    k: int
    mu: float
    b: np.ndarray
    a_0: np.ndarray
    a_pi: np.ndarray
    residual_0: np.ndarray
    residual_pi: np.ndarray
    exponent_0: float
    exponent_pi: float

    @property
    def rows(self):
        return list(zip(self.b.tolist(), self.residual_0.tolist(), self.residual_pi.tolist()))

    @property
    def exponent(self) -> float:
        """Decay exponent fitted on both sides pooled."""
        b = np.concatenate([self.b, self.b])
        r = np.concatenate([self.residual_0, self.residual_pi])
        return _fit_exponent(b, r)


def _fit_exponent(b, r):
    mask = r > 0
    slope, _ = np.polyfit(np.log(b[mask]), np.log(r[mask]), 1)
    return float(slope)


def residual_scan(k: int, mu: float, b_range: tuple[float, float] | None = None,
                  n_points: int = 41, cfg: TraceConfig = TraceConfig()) -> ScanResult:
    """|a_side,k(b) - asymptote| over a b-range, with fitted power-law exponents.

    Boundaries are solved at each b directly (the defect is monotone in a,
    so the root is unique); the asymptote seeds the bracket.
    """
    if b_range is None:
        b_range = default_scan_range(mu)
    bs = np.linspace(b_range[0], b_range[1], n_points)
    a0 = np.empty(n_points)
    ap = np.empty(n_points)
    r0 = np.empty(n_points)
    rp = np.empty(n_points)
    for i, b in enumerate(bs):
        g0 = boundary_asymptote(k, mu, b, 0.0)
        gp = boundary_asymptote(k, mu, b, math.pi)
        a0[i] = boundary_at(k, 0.0, mu, b, g0, cfg)
        ap[i] = boundary_at(k, math.pi, mu, b, gp, cfg)
        r0[i] = abs(a0[i] - g0)
        rp[i] = abs(ap[i] - gp)
    return ScanResult(k, mu, bs, a0, ap, r0, rp, _fit_exponent(bs, r0), _fit_exponent(bs, rp))
