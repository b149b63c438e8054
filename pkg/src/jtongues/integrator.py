"""Adaptive DOP853 integration of the Josephson equation and its variations.

The kernel is a direct port of the explicit Dormand-Prince 8(5,3) scheme
with its 7th-order continuous extension, compiled with numba and
specialised to the right-hand side

    x'   = (cos x + a + b cos t) / mu
    u_a' = (1   - u_a sin x) / mu
    u_b' = (cos t - u_b sin x) / mu

The state is never reduced modulo 2*pi, so the returned phase is the
continuous lift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _dop853 as tab
from .errors import NumericFailure, StepUnderflow
from .model import Params

__all__ = [
    "IntegratorConfig",
    "DEFAULT_CONFIG",
    "LiftedTrajectory",
    "integrate",
    "integrate_with_variations",
    "propagate",
    "propagate_with_variations",
]

_NS = tab.N_STAGES
_A = np.ascontiguousarray(tab.A)
_B = np.ascontiguousarray(tab.B)
_C = np.ascontiguousarray(tab.C)
_E3 = np.ascontiguousarray(tab.E3)
_E5 = np.ascontiguousarray(tab.E5)
_D = np.ascontiguousarray(tab.D)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERR_EXP = -1.0 / 8.0
# the lifted phase is an angle: its tolerance scale is capped so that error
# control does not loosen as x winds up (and commutes with x -> x + 2 pi)
_PHASE_SCALE = 2.0 * math.pi

_OK, _UNDERFLOW, _TOO_MANY = 0, 1, 2


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = 0.1
    min_step: float = 1e-12
    # None infers the direction from the endpoints; otherwise it must agree.
    direction: str | None = None
    max_steps: int = 20_000_000

    def __post_init__(self):
        if not (0 < self.rel_tol < 1 and 0 < self.abs_tol < 1):
            raise ValueError("tolerances must lie in (0, 1)")
        if not (0 < self.min_step <= self.max_step):
            raise ValueError("need 0 < min_step <= max_step")
        if self.direction not in (None, "forward", "backward"):
            raise ValueError(f"unknown direction {self.direction!r}")


DEFAULT_CONFIG = IntegratorConfig()


@njit(cache=True)
def _rhs(t, y, a, b, mu, out):
    ct = math.cos(t)
    out[0] = (math.cos(y[0]) + a + b * ct) / mu
    if y.shape[0] == 3:
        s = math.sin(y[0])
        out[1] = (1.0 - y[1] * s) / mu
        out[2] = (ct - y[2] * s) / mu


@njit(cache=True)
def _rms(v):
    acc = 0.0
    for i in range(v.shape[0]):
        acc += v[i] * v[i]
    return math.sqrt(acc / v.shape[0])


@njit(cache=True)
def _initial_step(t0, y0, f0, t1, direction, a, b, mu, rtol, atol, max_step):
    n = y0.shape[0]
    span = abs(t1 - t0)
    scale = atol + np.abs(y0) * rtol
    scale[0] = atol + min(abs(y0[0]), _PHASE_SCALE) * rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * direction * f0
    f1 = np.empty(n)
    _rhs(t0 + h0 * direction, y1, a, b, mu, f1)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1, span, max_step)


@njit(cache=True)
def _solve(a, b, mu, y0, t0, t1, rtol, atol, max_step, min_step, dense, max_steps):
    n = y0.shape[0]
    direction = 1.0 if t1 > t0 else -1.0
    K = np.zeros((16, n))
    y = y0.copy()
    t = t0
    f = np.empty(n)
    _rhs(t, y, a, b, mu, f)
    nfev = 1

    cap = 64 if dense else 1
    ts = np.empty(cap + 1)
    ys = np.empty((cap + 1, n))
    Fs = np.empty((cap, 7, n))
    ts[0] = t0
    ys[0, :] = y0
    nseg = 0

    h_abs = _initial_step(t0, y0, f, t1, direction, a, b, mu, rtol, atol, max_step)
    # the guess can collapse when y0 is tiny but nonzero; let step control grow it
    h_abs = max(h_abs, min_step)
    nfev += 1
    ystage = np.empty(n)
    y_new = np.empty(n)
    err5 = np.empty(n)
    err3 = np.empty(n)
    nsteps = 0

    while direction * (t1 - t) > 0.0:
        if nsteps >= max_steps:
            return _TOO_MANY, t, y, nsteps, nfev, ts[:1], ys[:1], Fs[:0]
        if h_abs > max_step:
            h_abs = max_step
        rejected = False
        while True:
            if h_abs < min_step:
                return _UNDERFLOW, t, y, nsteps, nfev, ts[:1], ys[:1], Fs[:0]
            t_new = t + h_abs * direction
            if direction * (t_new - t1) > 0.0:
                t_new = t1
            h = t_new - t

            K[0, :] = f
            for s in range(1, _NS):
                for i in range(n):
                    acc = 0.0
                    for j in range(s):
                        acc += _A[s, j] * K[j, i]
                    ystage[i] = y[i] + h * acc
                _rhs(t + _C[s] * h, ystage, a, b, mu, K[s])
            for i in range(n):
                acc = 0.0
                for j in range(_NS):
                    acc += _B[j] * K[j, i]
                y_new[i] = y[i] + h * acc
            _rhs(t + h, y_new, a, b, mu, K[_NS])
            nfev += _NS

            e5 = 0.0
            e3 = 0.0
            finite = True
            for i in range(n):
                ymag = max(abs(y[i]), abs(y_new[i]))
                if i == 0:
                    ymag = min(ymag, _PHASE_SCALE)
                sc = atol + ymag * rtol
                acc5 = 0.0
                acc3 = 0.0
                for j in range(_NS + 1):
                    acc5 += _E5[j] * K[j, i]
                    acc3 += _E3[j] * K[j, i]
                err5[i] = acc5 / sc
                err3[i] = acc3 / sc
                e5 += err5[i] * err5[i]
                e3 += err3[i] * err3[i]
                if not math.isfinite(y_new[i]):
                    finite = False
            if not finite:
                err = np.inf
            elif e5 == 0.0 and e3 == 0.0:
                err = 0.0
            else:
                err = abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * n)

            if err < 1.0:
                if err == 0.0:
                    factor = _MAX_FACTOR
                else:
                    factor = min(_MAX_FACTOR, _SAFETY * err ** _ERR_EXP)
                if rejected:
                    factor = min(1.0, factor)
                h_abs *= factor
                break
            if math.isfinite(err):
                h_abs *= max(_MIN_FACTOR, _SAFETY * err ** _ERR_EXP)
            else:
                h_abs *= _MIN_FACTOR
            rejected = True

        if dense:
            for s in range(_NS + 1, 16):
                for i in range(n):
                    acc = 0.0
                    for j in range(s):
                        acc += _A[s, j] * K[j, i]
                    ystage[i] = y[i] + h * acc
                _rhs(t + _C[s] * h, ystage, a, b, mu, K[s])
            nfev += 3
            if nseg == cap:
                cap *= 2
                ts2 = np.empty(cap + 1)
                ys2 = np.empty((cap + 1, n))
                Fs2 = np.empty((cap, 7, n))
                ts2[: nseg + 1] = ts[: nseg + 1]
                ys2[: nseg + 1] = ys[: nseg + 1]
                Fs2[:nseg] = Fs[:nseg]
                ts, ys, Fs = ts2, ys2, Fs2
            for i in range(n):
                dy = y_new[i] - y[i]
                Fs[nseg, 0, i] = dy
                Fs[nseg, 1, i] = h * K[0, i] - dy
                Fs[nseg, 2, i] = 2.0 * dy - h * (K[_NS, i] + K[0, i])
                for r in range(4):
                    acc = 0.0
                    for j in range(16):
                        acc += _D[r, j] * K[j, i]
                    Fs[nseg, 3 + r, i] = h * acc
            nseg += 1
            ts[nseg] = t_new
            ys[nseg, :] = y_new

        t = t_new
        y[:] = y_new
        f[:] = K[_NS]
        nsteps += 1

    if dense:
        return _OK, t, y, nsteps, nfev, ts[: nseg + 1], ys[: nseg + 1], Fs[:nseg]
    return _OK, t, y, nsteps, nfev, ts[:1], ys[:1], Fs[:0]


def _check_span(t0, t1, cfg):
    if t0 == t1:
        raise ValueError("integration interval is empty (t0 == t1)")
    if cfg.direction == "forward" and t1 < t0:
        raise ValueError("config says forward but t1 < t0")
    if cfg.direction == "backward" and t1 > t0:
        raise ValueError("config says backward but t1 > t0")


def _run(p, y0, t0, t1, cfg, dense):
    _check_span(t0, t1, cfg)
    status, t, y, nsteps, nfev, ts, ys, Fs = _solve(
        float(p.a), float(p.b), float(p.mu), np.asarray(y0, dtype=float),
        float(t0), float(t1), cfg.rel_tol, cfg.abs_tol, cfg.max_step,
        cfg.min_step, dense, cfg.max_steps,
    )
    if status == _UNDERFLOW:
        raise StepUnderflow(
            f"step below min_step={cfg.min_step:g} at t={t:.6g} "
            f"(a={p.a:.17g}, b={p.b:.17g}, mu={p.mu:.17g})"
        )
    if status == _TOO_MANY:
        raise NumericFailure(f"exceeded max_steps={cfg.max_steps} at t={t:.6g}")
    return y, nsteps, ts, ys, Fs


def propagate(p: Params, x0: float, t0: float, t1: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    """Lifted phase at ``t1`` of the solution with ``x(t0) = x0``."""
    y, *_ = _run(p, np.array([x0], dtype=float), t0, t1, cfg, False)
    return float(y[0])


def propagate_with_variations(p: Params, x0: float, t0: float, t1: float,
                              cfg: IntegratorConfig = DEFAULT_CONFIG):
    """``(x(t1), dx(t1)/da, dx(t1)/db)`` for the solution with ``x(t0) = x0``."""
    y, *_ = _run(p, np.array([x0, 0.0, 0.0]), t0, t1, cfg, False)
    return float(y[0]), float(y[1]), float(y[2])


@dataclass(frozen=True, eq=False)
class LiftedTrajectory:
    """Solution on the universal cover with 7th-order dense output.

    ``t_grid`` is increasing regardless of the integration direction;
    ``t_start``/``t_end`` record the direction actually used.
    """

    params: Params
    t_start: float
    t_end: float
    t_grid: np.ndarray
    x_values: np.ndarray
    u_a: np.ndarray | None
    u_b: np.ndarray | None
    n_steps: int
    _seg_t: np.ndarray
    _seg_h: np.ndarray
    _seg_y: np.ndarray
    _seg_F: np.ndarray

    @property
    def x_end(self) -> float:
        return float(self._seg_y[-1, 0] + self._seg_F[-1, 0, 0])

    def _eval(self, t, comp):
        t = np.asarray(t, dtype=float)
        lo, hi = min(self.t_start, self.t_end), max(self.t_start, self.t_end)
        if np.any((t < lo - 1e-12) | (t > hi + 1e-12)):
            raise ValueError(f"t outside the integrated interval [{lo}, {hi}]")
        tt = np.atleast_1d(t)
        if self._seg_h[0] > 0:
            idx = np.searchsorted(self._seg_t, tt, side="right") - 1
        else:
            # segments ordered by decreasing start time
            idx = np.searchsorted(-self._seg_t, -tt, side="right") - 1
        idx = np.clip(idx, 0, len(self._seg_t) - 1)
        s = (tt - self._seg_t[idx]) / self._seg_h[idx]
        F = self._seg_F[idx, :, comp]
        y = np.zeros_like(tt)
        for i in range(F.shape[1] - 1, -1, -1):
            y = y + F[:, i]
            y = y * (s if (F.shape[1] - 1 - i) % 2 == 0 else 1.0 - s)
        y = y + self._seg_y[idx, comp]
        return y if t.ndim else float(y[0])

    def __call__(self, t):
        """Dense lifted phase at ``t`` (scalar or array)."""
        return self._eval(t, 0)

    def variations(self, t):
        if self.u_a is None:
            raise ValueError("trajectory was integrated without variations")
        return self._eval(t, 1), self._eval(t, 2)


def _trajectory(p, y0, t0, t1, cfg):
    _, nsteps, ts, ys, Fs = _run(p, y0, t0, t1, cfg, True)
    seg_t = ts[:-1].copy()
    seg_h = np.diff(ts)
    seg_y = ys[:-1].copy()
    order = slice(None) if t1 > t0 else slice(None, None, -1)
    grid, vals = ts[order].copy(), ys[order].copy()
    for arr in (grid, vals, seg_t, seg_h, seg_y, Fs):
        arr.setflags(write=False)
    has_var = y0.shape[0] == 3
    return LiftedTrajectory(
        params=p, t_start=float(t0), t_end=float(t1), t_grid=grid,
        x_values=vals[:, 0], u_a=vals[:, 1] if has_var else None,
        u_b=vals[:, 2] if has_var else None, n_steps=int(nsteps),
        _seg_t=seg_t, _seg_h=seg_h, _seg_y=seg_y, _seg_F=Fs,
    )


def integrate(p: Params, x0: float, t0: float, t1: float,
              cfg: IntegratorConfig = DEFAULT_CONFIG) -> LiftedTrajectory:
    return _trajectory(p, np.array([x0], dtype=float), t0, t1, cfg)


def integrate_with_variations(p: Params, x0: float, t0: float, t1: float,
                              cfg: IntegratorConfig = DEFAULT_CONFIG) -> LiftedTrajectory:
    """Co-integrate the a- and b-variational equations, both starting at 0."""
    return _trajectory(p, np.array([x0, 0.0, 0.0]), t0, t1, cfg)
