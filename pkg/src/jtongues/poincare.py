"""Period map, its Mobius representation, classification and rotation number.

In the coordinate u = tan(x/2) the equation is a Riccati equation, so the
period map is fractional-linear.  We represent it by a matrix ``m`` in
SL(2, R) acting on homogeneous vectors v(x) = (sin(x/2), cos(x/2)); the sign
of ``m`` is fixed so that ``m @ v(x)`` is a positive multiple of v(P~(x))
for the continuous lift P~.  Together with ``winding`` this pins down the
lift completely.

Rotation numbers are x-revolutions per period:
    rho = lim (x~(2 pi n) - x0) / (2 pi n).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateFit
from .integrator import DEFAULT_CONFIG, IntegratorConfig, propagate
from .model import Params

__all__ = [
    "MobiusMap",
    "MapClass",
    "RotationResult",
    "poincare_lift",
    "half_period_images",
    "fit_mobius",
    "classify",
    "rotation_number",
    "PARABOLIC_TOL",
]

TWO_PI = 2.0 * math.pi
PARABOLIC_TOL = 1e-7
IDENTITY_TOL = 1e-7
DEFAULT_BASE = (0.0, 0.5 * math.pi, math.pi)
DEFAULT_CHECK = 1.5 * math.pi
# images closer than this (as projective points) cannot carry a stable fit
DEGENERATE_TOL = 1e-9


def _hvec(x):
    return np.array([math.sin(0.5 * x), math.cos(0.5 * x)])


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


class MapClass(enum.Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    IDENTITY = "identity"


@dataclass(frozen=True, eq=False)
class MobiusMap:
    m: np.ndarray
    winding: int
    fit_residual: float = 0.0

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("m must be 2x2")
        if abs(np.linalg.det(m) - 1.0) > 1e-12 * max(1.0, np.abs(m).max() ** 2):
            raise ValueError(f"det(m) = {np.linalg.det(m)!r}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def trace(self) -> float:
        return float(self.m[0, 0] + self.m[1, 1])

    @property
    def lift0(self) -> float:
        """P~(0), reconstructed from the matrix sign and the winding."""
        w = self.m[:, 1]  # m @ v(0)
        x = 2.0 * math.atan2(w[0], w[1])  # image of 0, known mod 4 pi
        centre = TWO_PI * self.winding + math.pi
        return x + 2 * TWO_PI * round((centre - x) / (2 * TWO_PI))

    def lift(self, x):
        """Continuous lift P~(x) computed from the matrix alone."""
        x = np.asarray(x, dtype=float)
        xs = np.atleast_1d(x)
        n_turns = np.floor(xs / TWO_PI)
        r = xs - TWO_PI * n_turns
        w0 = self.m[:, 1]
        out = np.empty_like(xs)
        for i, ri in enumerate(r):
            w = self.m @ _hvec(ri)
            # m preserves orientation, so the image direction turns by (0, pi)
            # while the preimage half-angle turns by ri / 2 in [0, pi)
            d = math.atan2(_cross(w, w0), float(np.dot(w0, w)))
            if d < 0 and ri > math.pi:
                d += TWO_PI
            out[i] = 2.0 * d
        base = self.lift0
        res = base + out + TWO_PI * n_turns
        return res if x.ndim else float(res[0])

    def fixed_points(self) -> list[tuple[float, float]]:
        """Circle fixed points as ``(x in [0, 2pi), multiplier)``."""
        if self.is_identity():
            return []
        lam, vec = np.linalg.eig(self.m)
        if np.iscomplexobj(lam) and np.any(np.abs(lam.imag) > 0):
            return []
        out = []
        for i in range(2):
            v = np.real(vec[:, i])
            x = (2.0 * math.atan2(v[0], v[1])) % TWO_PI
            mult = 1.0 / float(np.real(lam[i])) ** 2
            out.append((x, mult))
        return out

    def is_identity(self, tol: float = IDENTITY_TOL) -> bool:
        eye = np.eye(2)
        return bool(min(np.abs(self.m - eye).max(), np.abs(self.m + eye).max()) < tol)

    def elliptic_angle(self) -> float:
        """Oriented rotation angle in (0, 2 pi) of an elliptic map on the x-circle.

        At the fixed point z of the upper half-plane the derivative of the
        map is 1 / (c z + d)^2 = exp(i theta); the Cayley map sending z to
        the disc centre preserves the orientation of x.
        """
        (A, B), (C, D) = self.m
        if abs(C) < 1e-300:
            raise ValueError("not elliptic")
        disc = (D - A) ** 2 + 4.0 * B * C
        if disc >= 0:
            raise ValueError("not elliptic")
        z = complex(-(D - A), math.sqrt(-disc)) / (2.0 * C)
        if z.imag < 0:
            z = z.conjugate()
        deriv = 1.0 / (C * z + D) ** 2
        return math.atan2(deriv.imag, deriv.real) % TWO_PI


@dataclass(frozen=True)
class RotationResult:
    rho: float
    method: str
    error_bound: float
    map_class: MapClass | None = None
    mobius: MobiusMap | None = field(default=None, repr=False)


def poincare_lift(p: Params, x0: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    return propagate(p, x0, 0.0, TWO_PI, cfg)


def _fit_from_images(xs, ys):
    V = [_hvec(x) for x in xs]
    W = [_hvec(y) for y in ys]
    V12 = np.column_stack(V[:2])
    W12 = np.column_stack(W[:2])
    c = np.linalg.solve(V12, V[2])
    d = np.linalg.solve(W12, W[2])
    lam = d / c
    if np.sign(lam[0]) != np.sign(lam[1]):
        raise DegenerateFit(f"inconsistent image orientation, lambda={lam}")
    m = W12 @ np.diag(lam) @ np.linalg.inv(V12)
    det = np.linalg.det(m)
    if det <= 0:
        raise DegenerateFit(f"fitted map reverses orientation (det={det:g})")
    m = m / math.sqrt(det)
    # sign: m v(x0) must be a positive multiple of v(P~(x0))
    if float(np.dot(m @ V[0], W[0])) < 0:
        m = -m
    return m


def fit_mobius(p: Params, base_points=DEFAULT_BASE, check_point: float = DEFAULT_CHECK,
               cfg: IntegratorConfig = DEFAULT_CONFIG) -> MobiusMap:
    """Fit the period map from the lifted images of three base points."""
    xs = [float(x) for x in base_points]
    if len(xs) != 3:
        raise ValueError("need exactly three base points")
    ys = [poincare_lift(p, x, cfg) for x in xs]
    seps = []
    for i in range(3):
        for j in range(i + 1, 3):
            # sin of half the angular separation of the images
            seps.append(abs(math.sin(0.5 * (ys[i] - ys[j]))))
    if min(seps) < DEGENERATE_TOL:
        raise DegenerateFit(
            f"base point images coincide within {DEGENERATE_TOL:g} "
            f"(a={p.a}, b={p.b}, mu={p.mu})"
        )
    m = _fit_from_images(xs, ys)
    y0 = ys[0] if xs[0] == 0.0 else poincare_lift(p, 0.0, cfg)
    mm = MobiusMap(m, int(math.floor(y0 / TWO_PI)), 0.0)
    resid = abs(mm.lift(check_point) - poincare_lift(p, check_point, cfg))
    return MobiusMap(mm.m, mm.winding, float(resid))


def classify(m: MobiusMap, tol: float = PARABOLIC_TOL) -> MapClass:
    if m.is_identity():
        return MapClass.IDENTITY
    tr = abs(m.trace)
    if abs(tr - 2.0) < tol:
        return MapClass.PARABOLIC
    return MapClass.HYPERBOLIC if tr > 2.0 else MapClass.ELLIPTIC


def half_period_images(p: Params, cfg: IntegratorConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """Lifted x(pi) of the trajectories through x = 0 and x = pi at t = 0."""
    return propagate(p, 0.0, 0.0, math.pi, cfg), propagate(p, math.pi, 0.0, math.pi, cfg)


FINEST_TOL = 1e-13
SPREAD_SAFETY = 10.0


def _refined_images(p, cfg):
    """Half-period images at ``cfg`` and at a 100x tighter tolerance.

    Along canards the images are far more sensitive to local error than the
    tolerance suggests, so the spread between the two runs is the error
    estimate and the finer pair is returned.  Convergence in the tolerance
    is erratic there (the fine run is not always closer), hence the safety
    factor on the measured difference.
    """
    fine = replace(cfg, rel_tol=max(cfg.rel_tol * 1e-2, FINEST_TOL),
                   abs_tol=max(cfg.abs_tol * 1e-2, FINEST_TOL))
    coarse = cfg
    if fine == cfg:
        coarse = replace(cfg, rel_tol=cfg.rel_tol * 1e2, abs_tol=cfg.abs_tol * 1e2)
    xc = half_period_images(p, coarse)
    xf = half_period_images(p, fine)
    floor = 10.0 * (fine.abs_tol + fine.rel_tol * max(abs(v) for v in xf))
    diff = max(abs(xf[0] - xc[0]), abs(xf[1] - xc[1]))
    spread = max(SPREAD_SAFETY * diff, floor)
    return xf[0], xf[1], spread


def _symmetric_invariants(x0, xpi):
    """Trace data of the period map from the two half-period images.

    The field is invariant under (t, x) -> (-t, -x), so the period map is
    R F^-1 R F with F the half-period map and R: x -> -x.  Writing F in the
    (sin x/2, cos x/2) frame,

        tr - 2 = 4 sin(X0/2) cos(Xpi/2) / sin((Xpi - X0)/2)
        tr + 2 = 4 sin(Xpi/2) cos(X0/2) / sin((Xpi - X0)/2)

    and the denominator is positive because the flow preserves order.
    Returns (minus, plus) = (tr - 2, tr + 2) / 4.
    """
    den = math.sin(0.5 * (xpi - x0))
    minus = math.sin(0.5 * x0) * math.cos(0.5 * xpi) / den
    plus = math.sin(0.5 * xpi) * math.cos(0.5 * x0) / den
    return minus, plus


def _elliptic_fraction(x0, xpi, n):
    minus, plus = _symmetric_invariants(x0, xpi)
    # half the conjugate rotation angle: sin^2 = -minus, cos^2 = plus
    half = math.atan2(math.sqrt(max(-minus, 0.0)), math.sqrt(max(plus, 0.0)))
    frac = 2.0 * half / math.pi
    return frac if n % 2 == 0 else 1.0 - frac


def _rotation_mobius(p, cfg, base_points, tol=PARABOLIC_TOL):
    x0, xpi, spread = _refined_images(p, cfg)
    # the displacement range of the period map over one turn, in revolutions
    lo, hi = sorted((x0 / math.pi, xpi / math.pi - 1.0))
    eps = spread / math.pi
    floor_eps = 1e-15
    try:
        mm = fit_mobius(p, base_points=base_points, cfg=cfg)
    except DegenerateFit:
        mm = None  # all base points collapse onto one image; the trace data still resolve the class
    minus, plus = _symmetric_invariants(x0, xpi)
    tr = 2.0 + 4.0 * minus

    k = math.floor(hi)
    if k >= lo:  # an integer displacement is attained: a fixed point of the lift
        margin = min(hi - k, k - lo)
        if mm is not None and mm.is_identity():
            cls = MapClass.IDENTITY
        elif min(abs(tr - 2.0), abs(tr + 2.0)) < tol:
            cls = MapClass.PARABOLIC
        else:
            cls = MapClass.HYPERBOLIC
        err = floor_eps if margin > eps else hi - lo + eps
        return RotationResult(float(k), "mobius", err, cls, mm)

    # just short of an integer: identity and parabolic maps land here by rounding
    k = round(0.5 * (lo + hi))
    if min(abs(lo - k), abs(hi - k)) <= eps:
        if mm is not None and mm.is_identity():
            return RotationResult(float(k), "mobius", hi - lo + eps, MapClass.IDENTITY, mm)
        if min(abs(tr - 2.0), abs(tr + 2.0)) < tol:
            return RotationResult(float(k), "mobius", hi - lo + eps, MapClass.PARABOLIC, mm)

    n = math.floor(lo)
    rho = n + _elliptic_fraction(x0, xpi, n)
    # propagate the integration error in X0, Xpi through the fraction
    h = spread
    sens = max(abs(_elliptic_fraction(x0 + dx, xpi + dy, n) - (rho - n))
               for dx in (-h, 0.0, h) for dy in (-h, 0.0, h))
    err = min(max(sens, mm.fit_residual if mm is not None else 0.0, floor_eps), hi - lo)
    return RotationResult(float(rho), "mobius", err, MapClass.ELLIPTIC, mm)


def _rotation_direct(p, cfg, n_periods):
    x = propagate(p, 0.0, 0.0, TWO_PI * n_periods, cfg)
    return RotationResult(x / (TWO_PI * n_periods), "direct", 1.0 / n_periods)


def rotation_number(p: Params, method: str = "mobius", n_periods: int = 1000,
                    cfg: IntegratorConfig = DEFAULT_CONFIG,
                    base_points=DEFAULT_BASE) -> RotationResult:
    """Rotation number in revolutions of x per period of t.

    ``mobius`` is exact up to integration error: integer on non-elliptic
    maps, ``n + angle / 2pi`` on elliptic ones.  Class and angle come from
    the symmetric factorisation of the period map through the half-period
    images of 0 and pi, which stays well conditioned when the map is
    strongly contracting and its three-point fit degenerates; the fitted
    map is attached when available.  ``direct`` integrates ``n_periods``
    periods from x = 0; its error bound 1/N is rigorous.
    """
    if method == "mobius":
        return _rotation_mobius(p, cfg, base_points)
    if method == "direct":
        if n_periods < 1:
            raise ValueError("n_periods must be >= 1")
        return _rotation_direct(p, cfg, n_periods)
    raise ValueError(f"unknown method {method!r}")
