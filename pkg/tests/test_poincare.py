import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from jtongues import DegenerateFit, MapClass, MobiusMap, Params, classify, fit_mobius, rotation_number
from jtongues.poincare import poincare_lift
from oracles import linear_period_matrix, rho_b0

TWO_PI = 2 * math.pi
moderate = st.builds(Params, st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 2))


@given(moderate)
def test_matrix_matches_linear_system(p):
    ref = linear_period_matrix(p.a, p.b, p.mu)
    try:
        mm = fit_mobius(p)
    except DegenerateFit:
        assume(False)
    scale = max(1.0, np.abs(ref).max())
    # continuous transport of (sin x/2, cos x/2) fixes the sign as well
    assert np.abs(mm.m - ref).max() < 1e-6 * scale ** 2


def test_fit_residual_grid():
    worst = 0.0
    for a in np.linspace(0, 3, 10):
        for b in np.linspace(0, 3, 10):
            worst = max(worst, fit_mobius(Params(a, b, 1.0)).fit_residual)
    assert worst < 1e-8


@pytest.mark.parametrize("a,b", [(0.3, 1.7), (2.0, 1.0), (1.2, 2.5), (0.0, 0.0)])
def test_base_point_invariance(a, b):
    p = Params(a, b, 1.0)
    m1 = fit_mobius(p)
    m2 = fit_mobius(p, base_points=(math.pi / 4, math.pi, 7 * math.pi / 4))
    assert np.allclose(m1.m, m2.m, atol=1e-8)
    assert m1.winding == m2.winding
    r1 = rotation_number(p).rho
    r2 = rotation_number(p, base_points=(math.pi / 4, math.pi, 7 * math.pi / 4)).rho
    assert r1 == pytest.approx(r2, abs=1e-9)


@given(moderate, st.floats(-10, 10))
def test_lift_reproduces_flow(p, x):
    try:
        mm = fit_mobius(p)
    except DegenerateFit:
        assume(False)
    assert mm.lift(x) == pytest.approx(poincare_lift(p, x), abs=1e-7)
    assert mm.lift(x + TWO_PI) == pytest.approx(mm.lift(x) + TWO_PI, abs=1e-9)


@given(moderate)
def test_classification_matches_trace_oracle(p):
    tr = abs(np.trace(linear_period_matrix(p.a, p.b, p.mu)))
    assume(abs(tr - 2) > 1e-5)
    res = rotation_number(p)
    if tr > 2:
        assert res.map_class is MapClass.HYPERBOLIC
    else:
        assert res.map_class in (MapClass.ELLIPTIC, MapClass.IDENTITY)


@given(moderate)
def test_locked_maps_have_integer_rho(p):
    res = rotation_number(p)
    if res.map_class in (MapClass.HYPERBOLIC, MapClass.PARABOLIC):
        assert abs(res.rho - round(res.rho)) < 1e-9


@given(st.builds(Params, st.floats(-3, 3), st.floats(-3, 3), st.floats(0.3, 2)))
def test_methods_agree(p):
    n = 400
    m = rotation_number(p)
    d = rotation_number(p, method="direct", n_periods=n)
    assert abs(m.rho - d.rho) <= d.error_bound + 1e-6


@pytest.mark.parametrize("a", [1.1, 1.5, 2.0, -2.0, 3.0])
@pytest.mark.parametrize("mu", [0.5, 1.0])
def test_b0_closed_form(a, mu):
    assert rotation_number(Params(a, 0.0, mu)).rho == pytest.approx(rho_b0(a, mu), abs=1e-9)


def test_identity_map():
    # b = 0 and rho = 1 exactly: the period map is the deck shift
    p = Params(math.sqrt(1.25), 0.0, 0.5)
    res = rotation_number(p)
    assert res.map_class is MapClass.IDENTITY
    assert res.rho == pytest.approx(1.0, abs=1e-9)


def test_collapsed_images_are_hyperbolic():
    p = Params(0.5, 0.5, 0.02)
    with pytest.raises(DegenerateFit):
        fit_mobius(p)
    res = rotation_number(p)
    assert res.map_class is MapClass.HYPERBOLIC
    assert res.rho == 0.0


def test_mobius_validation_and_fixed_points():
    with pytest.raises(ValueError):
        MobiusMap(np.diag([2.0, 2.0]), 0)
    lam = 2.0
    mm = MobiusMap(np.diag([lam, 1 / lam]), 0)
    assert classify(mm) is MapClass.HYPERBOLIC
    fps = sorted(mm.fixed_points())
    # v = (0, 1) is x = 0, v = (1, 0) is x = pi
    assert fps[0][0] == pytest.approx(0.0) and fps[1][0] == pytest.approx(math.pi)
    assert {round(m, 12) for _, m in fps} == {round(lam ** 2, 12), round(lam ** -2, 12)}
    th = 0.3
    rot = MobiusMap(np.array([[math.cos(th), math.sin(th)], [-math.sin(th), math.cos(th)]]), 0)
    assert classify(rot) is MapClass.ELLIPTIC
    # rotating the half-angle vector by th advances x by 2 th
    assert rot.elliptic_angle() == pytest.approx(2 * th)
    assert rot.lift(1.0) == pytest.approx(1.0 + 2 * th)


def test_unknown_method():
    with pytest.raises(ValueError):
        rotation_number(Params(1, 1, 1), method="guess")
    with pytest.raises(ValueError):
        rotation_number(Params(1, 1, 1), method="direct", n_periods=0)


@given(moderate)
def test_elliptic_angle_matches_oracle_trace(p):
    res = rotation_number(p)
    assume(res.map_class is MapClass.ELLIPTIC)
    tr = np.trace(linear_period_matrix(p.a, p.b, p.mu))
    # a lift-consistent matrix conjugate to a half-angle rotation by pi rho
    assert 2 * math.cos(math.pi * res.rho) == pytest.approx(tr, abs=1e-6)


def test_canard_point_inside_narrow_gap():
    # images of three base points collapse, yet the map is elliptic; the
    # oracle trace is about -1.6e-4, i.e. rho close to 6.5
    p = Params(1.027749968442, 1.0, 0.1)
    with pytest.raises(DegenerateFit):
        fit_mobius(p)
    tr = np.trace(linear_period_matrix(p.a, p.b, p.mu, rtol=1e-13, atol=1e-14))
    res = rotation_number(p)
    assert res.map_class is MapClass.ELLIPTIC
    rho_ref = 6 + math.acos(tr / 2) / math.pi
    assert abs(res.rho - rho_ref) <= res.error_bound
    assert abs(res.rho - rho_ref) < 1e-4
