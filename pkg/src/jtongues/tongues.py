"""Arnold-tongue boundaries by continuation in b with Newton and bisection.

The boundary a_{side,k}(b) of tongue k is where the trajectory through
(x0, t=0), x0 in {0, pi}, reaches x0 + pi*k at t = pi.  Two equivalent
defects are available:

* forward:  x(pi; x(0) = x0) - (x0 + pi k), increasing in a;
* backward: x(0; x(pi) = x0 + pi k) - x0,   decreasing in a.

Both are strictly monotone in a (comparison theorem), so the root at a
fixed b is unique and bisection always applies once it is bracketed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure, NumericFailure, StepUnderflow
from .integrator import DEFAULT_CONFIG, IntegratorConfig, propagate, propagate_with_variations
from .model import Params
from .slowfast import Region, classify_region

__all__ = [
    "TraceConfig",
    "BoundarySample",
    "BoundaryCurve",
    "Bridge",
    "StartPoint",
    "half_period_value",
    "boundary_condition",
    "backward_condition",
    "initial_a",
    "validate_start",
    "solve_boundary",
    "trace_boundary",
    "find_bridges",
    "tongue_gap",
    "gap_near_point",
]

PI = math.pi


@dataclass(frozen=True)
class TraceConfig:
    h: float = 0.01
    newton_tol: float = 1e-10
    max_newton_iters: int = 8
    bisection_bracket: float = 1e-4     # floor of the initial half-width in a
    time_direction: str = "auto"        # auto | forward | backward
    max_expansions: int = 10
    integrator: IntegratorConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be >= 1")
        if self.time_direction not in ("auto", "forward", "backward"):
            raise ValueError(f"unknown time_direction {self.time_direction!r}")


@dataclass(frozen=True)
class BoundarySample:
    b: float
    a: float
    residual: float
    steps_used: int
    method: str        # start | newton | bisection
    direction: str     # forward | backward


@dataclass
class BoundaryCurve:
    k: int
    side: float
    mu: float
    samples: list = field(default_factory=list)
    complete: bool = True
    failure: str | None = None

    @property
    def b(self) -> np.ndarray:
        return np.array([s.b for s in self.samples])

    @property
    def a(self) -> np.ndarray:
        return np.array([s.a for s in self.samples])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([s.residual for s in self.samples])

    def count(self, method: str) -> int:
        return sum(s.method == method for s in self.samples)


@dataclass(frozen=True)
class Bridge:
    k: int
    b_star: float
    a_star: float
    residual_0: float
    residual_pi: float


@dataclass(frozen=True)
class StartPoint:
    a: float            # closed-form value used to start tracing
    a_root: float       # independent root of the b = 0 defect
    formula: str
    candidates: tuple


def _x0(side) -> float:
    if isinstance(side, str):
        side = side.strip().lower()
        if side in ("0", "zero"):
            return 0.0
        if side in ("pi", "π"):
            return PI
        raise ValueError(f"side must be 0 or pi, got {side!r}")
    if side == 0:
        return 0.0
    if abs(side - PI) < 1e-12:
        return PI
    raise ValueError(f"side must be 0 or pi, got {side!r}")


def _target(k: int, x0: float) -> float:
    return x0 + PI * k


def half_period_value(p: Params, x0: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    """Lifted x(pi) of the trajectory through (x0, 0), x0 in {0, pi}."""
    return propagate(p, _x0(x0), 0.0, PI, cfg)


def boundary_condition(p: Params, k: int, side, cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    """Forward defect; zero exactly on a_{side,k}."""
    x0 = _x0(side)
    return propagate(p, x0, 0.0, PI, cfg) - _target(k, x0)


def backward_condition(p: Params, k: int, side, cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    """Backward-time defect; same zero set as ``boundary_condition``."""
    x0 = _x0(side)
    return propagate(p, _target(k, x0), PI, 0.0, cfg) - x0


def _defect(p, k, x0, direction, cfg, variations):
    tgt = _target(k, x0)
    if direction == "forward":
        if variations:
            x, ua, ub = propagate_with_variations(p, x0, 0.0, PI, cfg)
            return x - tgt, ua, ub
        return propagate(p, x0, 0.0, PI, cfg) - tgt
    if variations:
        x, ua, ub = propagate_with_variations(p, tgt, PI, 0.0, cfg)
        return x - x0, ua, ub
    return propagate(p, tgt, PI, 0.0, cfg) - x0


def initial_a(k: int, mu: float) -> float:
    """b = 0 point of tongue k: sqrt(a^2 - 1) = k mu."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return math.sqrt(1.0 + (k * mu) ** 2)


def validate_start(k: int, side, mu: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                   tol: float = 1e-8) -> StartPoint:
    """Pick the closed-form b = 0 start that zeroes the defect, and confirm it
    against an independent bracketed root of the defect."""
    x0 = _x0(side)
    # one-off check: afford a tight integrator so the root is not blurred by global error
    cfg = replace(cfg, rel_tol=min(cfg.rel_tol, 1e-13), abs_tol=min(cfg.abs_tol, 1e-13))
    cands = [("sqrt(1+k^2 mu^2)", initial_a(k, mu)),
             ("sqrt(1+(k/2)^2 mu^2)", math.sqrt(1.0 + (0.5 * k * mu) ** 2)),
             ("-sqrt(1+k^2 mu^2)", -initial_a(k, mu))]
    tried = []
    for name, a in cands:
        d, da, _ = _defect(Params(a, 0.0, mu), k, x0, "forward", cfg, True)
        tried.append((name, a, d))
        # tolerance is on a: at small mu the defect is steep in a
        if abs(d) < tol * max(1.0, abs(da)):
            break
    else:
        raise NumericFailure(f"no closed-form start zeroes the b=0 defect for k={k}, side={side}: {tried}")

    def f(a):
        return boundary_condition(Params(a, 0.0, mu), k, x0, cfg)

    w = 1e-3
    for _ in range(20):
        if f(a - w) < 0 < f(a + w):
            break
        w *= 2
    root = brentq(f, a - w, a + w, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    if abs(root - a) > tol:
        raise NumericFailure(f"start {a!r} disagrees with defect root {root!r}")
    return StartPoint(a, root, name, tuple(tried))


def _direction(cfg: TraceConfig, a: float, b: float) -> str:
    if cfg.time_direction != "auto":
        return cfg.time_direction
    return "backward" if classify_region(a, b) is Region.B else "forward"


def _newton(k, x0, mu, b, a, direction, cfg):
    """Newton in a at fixed b.  Returns (a, |D|, evals, slope) or None."""
    prev = math.inf
    for it in range(1, cfg.max_newton_iters + 1):
        try:
            d, da, db = _defect(Params(a, b, mu), k, x0, direction, cfg.integrator, True)
        except StepUnderflow:
            return None
        if not (math.isfinite(d) and math.isfinite(da) and math.isfinite(db)) or da == 0.0:
            return None
        if abs(d) < cfg.newton_tol:
            return a, abs(d), it, -db / da
        step = d / da
        if abs(step) >= abs(prev):
            return None  # not contracting
        a -= step
        prev = step
    return None


def _bisect(k, x0, mu, b, centre, half_width, direction, cfg):
    """Bracket the monotone defect around ``centre`` and bisect.

    Returns (a, residual, evals, direction_of_residual).
    """
    sgn = 1.0 if direction == "forward" else -1.0

    def g(a):
        return sgn * _defect(Params(a, b, mu), k, x0, direction, cfg.integrator, False)

    lo, hi = centre - half_width, centre + half_width
    glo, ghi = g(lo), g(hi)
    evals = 2
    w = half_width
    for _ in range(cfg.max_expansions):
        if glo <= 0.0 <= ghi:
            break
        w *= 2.0
        if glo > 0.0:
            hi, ghi = lo, glo
            lo = centre - w
            glo = g(lo)
        else:
            lo, glo = hi, ghi
            hi = centre + w
            ghi = g(hi)
        evals += 1
    if not (glo <= 0.0 <= ghi):
        raise BracketFailure(
            f"cannot bracket a_(side={x0:.3g}, k={k}) at b={b!r} within +-{w:.3g} of {centre!r}"
        )

    best_a, best_r = (lo, -glo) if -glo < ghi else (hi, ghi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        evals += 1
        if abs(gm) < best_r:
            best_a, best_r = mid, abs(gm)
        if abs(gm) < cfg.newton_tol:
            break
        if gm < 0.0:
            lo = mid
        else:
            hi = mid

    res_dir = direction
    if best_r >= cfg.newton_tol:
        # root resolved to machine precision in a; the other formulation may
        # be far better conditioned there
        other = "backward" if direction == "forward" else "forward"
        try:
            r2 = abs(_defect(Params(best_a, b, mu), k, x0, other, cfg.integrator, False))
            evals += 1
            if r2 < best_r:
                best_r, res_dir = r2, other
        except StepUnderflow:
            pass
    return best_a, best_r, evals, res_dir


def solve_boundary(k: int, side, mu: float, b: float, a_guess: float,
                   cfg: TraceConfig = TraceConfig(), slope: float = 0.0) -> BoundarySample:
    """Corrector at fixed b: Newton from ``a_guess``, bisection on failure."""
    x0 = _x0(side)
    direction = _direction(cfg, a_guess, b)
    out = _newton(k, x0, mu, b, a_guess, direction, cfg)
    if out is not None:
        a, r, n, _ = out
        return BoundarySample(b, a, r, n, "newton", direction)
    w = max(5.0 * cfg.h * abs(slope), cfg.bisection_bracket)
    a, r, n, d = _bisect(k, x0, mu, b, a_guess, w, direction, cfg)
    return BoundarySample(b, a, r, n + cfg.max_newton_iters, "bisection", d)


def _b_grid(b_max, h):
    n = int(math.floor(b_max / h + 1e-9))
    grid = [i * h for i in range(1, n + 1)]
    if b_max - n * h > 1e-12:
        grid.append(b_max)
    return grid


def trace_boundary(k: int, side, mu: float, b_max: float,
                   cfg: TraceConfig = TraceConfig()) -> BoundaryCurve:
    """Continue a_{side,k}(b) from the validated b = 0 start up to ``b_max``.

    Predictor: tangent a' = -D_b / D_a from the variational values of the
    last Newton solve (secant after a bisection).  Corrector: Newton on the
    forward or backward defect, falling back to bracketed bisection.
    Raises BracketFailure with the partial curve attached if the curve is
    lost.
    """
    if not b_max > 0:
        raise ValueError("b_max must be positive")
    x0 = _x0(side)
    start = validate_start(k, x0, mu, cfg.integrator)
    a = start.a
    d, da, db = _defect(Params(a, 0.0, mu), k, x0, "forward", cfg.integrator, True)
    curve = BoundaryCurve(k, x0, mu, [BoundarySample(0.0, a, abs(d), 1, "start", "forward")])
    slope = -db / da if da != 0 else 0.0

    b_prev = 0.0
    for b in _b_grid(b_max, cfg.h):
        a_pred = a + slope * (b - b_prev)
        direction = _direction(cfg, a_pred, b)
        out = _newton(k, x0, mu, b, a_pred, direction, cfg)
        if out is not None:
            a_new, r, n, new_slope = out
            sample = BoundarySample(b, a_new, r, n, "newton", direction)
        else:
            w = max(5.0 * cfg.h * abs(slope), cfg.bisection_bracket)
            try:
                a_new, r, n, rdir = _bisect(k, x0, mu, b, a_pred, w, direction, cfg)
            except BracketFailure as exc:
                curve.complete = False
                curve.failure = str(exc)
                raise BracketFailure(str(exc), curve) from None
            sample = BoundarySample(b, a_new, r, n + cfg.max_newton_iters, "bisection", rdir)
            new_slope = (a_new - a) / (b - b_prev)
        curve.samples.append(sample)
        a, slope, b_prev = a_new, new_slope, b
    return curve


def find_bridges(k: int, mu: float, b_max: float, cfg: TraceConfig = TraceConfig(),
                 curves: tuple | None = None, noise: float = 1e-8) -> list[Bridge]:
    """Crossings of a_{0,k} and a_{pi,k}, refined by root-finding in b."""
    if curves is None:
        curves = (trace_boundary(k, 0.0, mu, b_max, cfg), trace_boundary(k, PI, mu, b_max, cfg))
    c0, cp = curves
    b = c0.b
    if not np.array_equal(b, cp.b):
        raise ValueError("boundary curves must share the b grid")
    g = c0.a - cp.a

    def gap(bb, guess0, guesspi):
        s0 = solve_boundary(k, 0.0, mu, bb, guess0, cfg)
        sp = solve_boundary(k, PI, mu, bb, guesspi, cfg)
        return s0, sp

    bridges = []
    for i in range(1, len(b) - 1):
        if max(abs(g[i]), abs(g[i + 1])) < noise or g[i] * g[i + 1] > 0:
            continue
        if g[i] == 0.0 and i > 1 and g[i - 1] * g[i + 1] < 0:
            continue  # counted in the previous interval
        lo, hi = b[i], b[i + 1]
        a0i, a0j, api, apj = c0.a[i], c0.a[i + 1], cp.a[i], cp.a[i + 1]

        def G(bb):
            w = (bb - lo) / (hi - lo)
            s0, sp = gap(bb, a0i + w * (a0j - a0i), api + w * (apj - api))
            return s0.a - sp.a

        if g[i] == 0.0:
            bs = lo
        else:
            bs = brentq(G, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        w = (bs - lo) / (hi - lo)
        s0, sp = gap(bs, a0i + w * (a0j - a0i), api + w * (apj - api))
        bridges.append(Bridge(k, float(bs), float(0.5 * (s0.a + sp.a)), float(s0.residual), float(sp.residual)))
    return sorted(bridges, key=lambda br: br.b_star)


def boundary_at(k: int, side, mu: float, b: float, a_guess: float | None = None,
                cfg: TraceConfig = TraceConfig(), tol_a: float = 1e-15) -> float:
    """a_{side,k}(b) at a single b by bracketing the monotone defect.

    No continuation: the root is unique, so a bracket grown from any guess
    finds it.
    """
    x0 = _x0(side)
    if a_guess is None:
        a_guess = k * mu
    direction = _direction(cfg, a_guess, b)
    sgn = 1.0 if direction == "forward" else -1.0

    def g(a):
        return sgn * _defect(Params(a, b, mu), k, x0, direction, cfg.integrator, False)

    step = max(0.05 * mu, 1e-3)
    lo = hi = a_guess
    glo = ghi = g(a_guess)
    for _ in range(60):
        if glo <= 0.0 <= ghi:
            break
        if ghi < 0.0:
            lo, glo = hi, ghi
            hi = hi + step
            ghi = g(hi)
        else:
            hi, ghi = lo, glo
            lo = lo - step
            glo = g(lo)
        step *= 2.0
    else:
        raise BracketFailure(f"cannot bracket a_(side={x0:.3g}, k={k}) at b={b}")
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    return brentq(g, lo, hi, xtol=tol_a, rtol=4 * np.finfo(float).eps, maxiter=500)


def tongue_gap(k: int, mu: float, b: float, cfg: TraceConfig = TraceConfig(),
               a_guess: float | None = None) -> float:
    """Distance in a at fixed b from tongue k to tongue k + 1."""
    guess_k = a_guess if a_guess is not None else k * mu
    guess_k1 = a_guess if a_guess is not None else (k + 1) * mu
    right_k = max(boundary_at(k, s, mu, b, guess_k, cfg) for s in (0.0, PI))
    left_k1 = min(boundary_at(k + 1, s, mu, b, guess_k1, cfg) for s in (0.0, PI))
    return left_k1 - right_k


def gap_near_point(a: float, b: float, mu: float, cfg: TraceConfig = TraceConfig()):
    """``(k, gap)`` for the tongue pair (k, k+1) with k = floor(rho(a, b))."""
    from .poincare import rotation_number

    rho = rotation_number(Params(a, b, mu), cfg=cfg.integrator).rho
    k = int(math.floor(rho + 1e-9))
    return k, tongue_gap(k, mu, b, cfg, a_guess=a)
