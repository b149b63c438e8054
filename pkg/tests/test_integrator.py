import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jtongues import (IntegratorConfig, NumericFailure, Params, StepUnderflow, integrate,
                      integrate_with_variations, propagate, propagate_with_variations)
from oracles import scipy_propagate, time_to_reach

TIGHT = IntegratorConfig(rel_tol=1e-13, abs_tol=1e-13)

params = st.builds(Params, st.floats(-3, 3), st.floats(-5, 5), st.floats(0.1, 2))


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(min_step=1.0, max_step=0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(direction="sideways")


def test_empty_and_misdirected_span():
    p = Params(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        propagate(p, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        propagate(p, 0.0, 1.0, 0.0, IntegratorConfig(direction="forward"))


@pytest.mark.parametrize("a,mu", [(1.5, 1.0), (3.0, 0.5), (1.1, 0.2)])
def test_b0_against_quadrature(a, mu):
    # time to reach x1 from 0 is a closed integral; propagate must land on x1
    for x1 in (1.0, math.pi, 5.0, 4 * math.pi):
        t1 = time_to_reach(a, mu, x1)
        assert propagate(Params(a, 0.0, mu), 0.0, 0.0, t1) == pytest.approx(x1, abs=1e-8)


@given(params, st.floats(-3, 3))
def test_matches_scipy(p, x0):
    ours = propagate(p, x0, 0.0, 2 * math.pi)
    ref = scipy_propagate(p.a, p.b, p.mu, x0, 0.0, 2 * math.pi)
    assert ours == pytest.approx(ref, abs=1e-7)


@given(params, st.floats(-3, 3))
def test_forward_backward_roundtrip(p, x0):
    x1 = propagate(p, x0, 0.0, math.pi, TIGHT)
    # backward time expands by the inverse of the forward contraction
    h = 1e-4
    slope = (propagate(p, x0 + h, 0.0, math.pi, TIGHT) - propagate(p, x0 - h, 0.0, math.pi, TIGHT)) / (2 * h)
    tol = 1e-9 * (1.0 + abs(x1)) / max(slope, 1e-300)
    assert propagate(p, x1, math.pi, 0.0, TIGHT) == pytest.approx(x0, abs=max(tol, 1e-9))


def test_roundtrip_small_mu():
    # forward along an attracting branch, back along the same (now repelling) one
    p = Params(0.5, 1.0, 0.01)
    x1 = propagate(p, 1.0, 0.0, 0.5)
    assert propagate(p, x1, 0.5, 0.0, TIGHT) == pytest.approx(1.0, abs=1e-6)


@given(params)
def test_central_symmetry(p):
    fwd = propagate(p, 0.0, 0.0, math.pi)
    bwd = propagate(p, 0.0, 0.0, -math.pi)
    assert abs(fwd + bwd) < 1e-8


@given(params, st.floats(-3, 3))
def test_lift_commutes_with_deck_shift(p, x0):
    y, ua, _ = propagate_with_variations(p, x0, 0.0, math.pi, TIGHT)
    # local errors are amplified like a perturbation of a; canards make this large
    tol = 1e-10 * (1.0 + abs(y)) * max(1.0, abs(ua) * p.mu)
    shifted = propagate(p, x0 + 2 * math.pi, 0.0, math.pi, TIGHT)
    assert shifted == pytest.approx(y + 2 * math.pi, abs=tol)


@given(params)
def test_order_preserving(p):
    xs = [propagate(p, x0, 0.0, 2 * math.pi) for x0 in (0.0, 1.0, 2.0)]
    # monotone, and never overtaking the deck translate, up to rounding
    eps = 1e-9 * (1.0 + max(abs(v) for v in xs))
    assert xs[0] <= xs[1] + eps and xs[1] <= xs[2] + eps
    assert xs[2] - xs[0] <= 2 * math.pi + eps


def _fd(p, x0, t1, which, d=1e-4):
    f = (lambda v: p.with_a(v)) if which == "a" else (lambda v: p.with_b(v))
    base = p.a if which == "a" else p.b
    return (propagate(f(base + d), x0, 0.0, t1, TIGHT) - propagate(f(base - d), x0, 0.0, t1, TIGHT)) / (2 * d)


def _close_to_fd(u, p, x0, which):
    # truncation error of the central difference, estimated from two step sizes
    f1, f2 = _fd(p, x0, math.pi, which, 1e-4), _fd(p, x0, math.pi, which, 5e-5)
    return abs(u - f2) <= 2.0 * abs(f1 - f2) + 1e-5 * abs(f2) + 1e-6


@given(params, st.floats(-3, 3))
def test_variations_match_finite_differences(p, x0):
    x, ua, ub = propagate_with_variations(p, x0, 0.0, math.pi, TIGHT)
    assert x == pytest.approx(propagate(p, x0, 0.0, math.pi, TIGHT), rel=1e-10, abs=1e-10)
    assert _close_to_fd(ua, p, x0, "a")
    assert _close_to_fd(ub, p, x0, "b")


def test_backward_variations():
    p = Params(1.2, 0.8, 0.5)
    x, ua, ub = propagate_with_variations(p, 2.0, math.pi, 0.0, TIGHT)
    d = 1e-6
    fd = (propagate(p.with_a(p.a + d), 2.0, math.pi, 0.0, TIGHT)
          - propagate(p.with_a(p.a - d), 2.0, math.pi, 0.0, TIGHT)) / (2 * d)
    assert ua == pytest.approx(fd, rel=1e-6)


def test_dense_output():
    p = Params(0.7, 2.0, 0.3)
    traj = integrate(p, 0.5, 0.0, 2 * math.pi)
    assert np.all(np.diff(traj.t_grid) > 0)
    ts = np.linspace(0.0, 2 * math.pi, 37)
    ref = np.array([propagate(p, 0.5, 0.0, t, TIGHT) if t > 0 else 0.5 for t in ts])
    assert np.max(np.abs(traj(ts) - ref)) < 1e-8
    assert traj.x_end == pytest.approx(traj.x_values[-1], abs=1e-12)
    with pytest.raises(ValueError):
        traj(7.0)
    with pytest.raises(ValueError):
        traj.variations(1.0)


def test_dense_output_backward_with_variations():
    p = Params(0.7, 2.0, 0.3)
    traj = integrate_with_variations(p, 0.5, math.pi, 0.0)
    assert np.all(np.diff(traj.t_grid) > 0)
    assert traj(0.0) == pytest.approx(propagate(p, 0.5, math.pi, 0.0), abs=1e-10)
    assert traj(math.pi) == pytest.approx(0.5, abs=1e-12)
    ua, ub = traj.variations(1.0)
    x, ua_ref, ub_ref = propagate_with_variations(p, 0.5, math.pi, 1.0)
    assert ua == pytest.approx(ua_ref, rel=1e-6, abs=1e-9)
    assert ub == pytest.approx(ub_ref, rel=1e-6, abs=1e-9)


def test_step_underflow_raises():
    cfg = IntegratorConfig(min_step=0.05, max_step=0.1, rel_tol=1e-12, abs_tol=1e-12)
    with pytest.raises(StepUnderflow):
        propagate(Params(0.5, 1.0, 0.001), 0.0, 0.0, 2 * math.pi, cfg)


def test_step_budget():
    with pytest.raises(NumericFailure):
        propagate(Params(0.5, 1.0, 1.0), 0.0, 0.0, 100.0, IntegratorConfig(max_steps=10))
