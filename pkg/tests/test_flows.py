import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from petras.engine import estimate_T0
from petras.errors import DomainError, PetrasError
from petras.flows import (FlowConfig, bound_evaluators, d_bounds_check, d_from_c,
                          k_lower_p_le_1, k_upper_p_le_1, leftward_flow, rightward_flow,
                          solve_c, solve_d, solve_d_array, t_lower_p_gt_1, t_upper_p_gt_1)
from petras.geometry import EngineConfig
from petras.integrands import get_integrand


def residual(x, g, cfg, d):
    return abs(max(x - g * d, 0.0) ** cfg.p - cfg.h * d)


def test_config_derived_values():
    cfg = FlowConfig(2.0, 1.0)
    assert (cfg.B, cfg.h, cfg.g_left, cfg.g_right) == (0.75, 0.375, 0.125, 1.125)
    assert cfg.x_tilde(cfg.g_left) == pytest.approx(3.0)
    assert FlowConfig(0.5, 1.0).x_tilde(0.125) == pytest.approx((0.125 / 0.375) ** 2)
    with pytest.raises(DomainError):
        FlowConfig(1.0, 1.0).x_tilde(0.125)
    for bad in [(0.0, 1.0), (1.0, 0.0), (1.0, 1.0, 1.0)]:
        with pytest.raises(DomainError):
            FlowConfig(*bad)


def test_solve_d_examples():
    assert solve_d(0.9, 0.125, FlowConfig(1.0, 0.375)) == pytest.approx(0.8, rel=1e-15)
    # frozen from a 40-digit root
    assert solve_d(0.1, 0.125, FlowConfig(2.0, 1.0)) == pytest.approx(0.02502446186295040, rel=1e-14)
    for p in (0.5, 1.0, 2.0, 3.5):
        assert solve_d(0.0, 0.125, FlowConfig(p, 1.0)) == 0.0
    assert solve_d(-1.0, 0.125, FlowConfig(2.0, 1.0)) == 0.0
    with pytest.raises(DomainError):
        solve_d(0.1, 0.0, FlowConfig(2.0, 1.0))


def test_solve_c_examples():
    cfg = FlowConfig(2.0, 1.0)
    assert solve_c(0.1, 0.125, cfg) == pytest.approx(0.93841731986064003, rel=1e-12)
    assert solve_c(0.0, 0.125, cfg) == 1.0
    assert solve_c(0.0, 0.125, FlowConfig(3.0, 0.5)) == 1.0
    with pytest.raises(DomainError):
        solve_c(4.0, 0.125, cfg)
    with pytest.raises(DomainError):
        solve_c(0.1, 0.125, FlowConfig(1.0, 1.0))


@pytest.mark.parametrize("p,gamma", [(2.0, 1.0), (3.0, 0.5), (1.5, 4.0)])
def test_c_nonincreasing(p, gamma):
    cfg = FlowConfig(p, gamma)
    g = cfg.g_left
    xs = np.linspace(0.0, min(1.0, cfg.x_tilde(g)), 300)
    cs = np.array([solve_c(float(x), g, cfg) for x in xs])
    assert np.all(np.diff(cs) <= 1e-15)
    assert np.all((cs >= 0) & (cs <= 1))


@pytest.mark.parametrize("p,gamma,side", [(2.0, 1.0, "left"), (3.0, 0.2, "right"),
                                          (1.3, 2.0, "left"), (0.5, 1.0, "left"),
                                          (0.7, 0.3, "right")])
def test_c_consistent_with_d(p, gamma, side):
    cfg = FlowConfig(p, gamma)
    g = cfg.g(side)
    top = min(1.0, cfg.x_tilde(g))
    for x in np.linspace(top * 1e-3, top, 60):
        c = solve_c(float(x), g, cfg)
        d = solve_d(float(x), g, cfg)
        assert d_from_c(float(x), g, cfg, c) == pytest.approx(d, rel=1e-10, abs=1e-300)


@settings(max_examples=400, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(0.05, 20.0), st.floats(1.01, 3.0),
       st.floats(-3.0, 0.0), st.booleans())
def test_solver_properties(p, gamma, A, log_x, right):
    cfg = FlowConfig(p, gamma, A)
    g = cfg.g_left if right else cfg.g_right
    x = 10.0 ** log_x
    d = solve_d(x, g, cfg)
    assert residual(x, g, cfg, d) <= 1e-13 * max(1.0, cfg.h * d)
    assert 0 < d <= x / g
    assert d < (2.0 / cfg.B) * gamma * x ** p or x - g * d == x
    assert solve_d(x * 1.01, g, cfg) > d


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(1.01, 3.0), st.floats(1e-6, 1e3))
def test_linear_case_closed_form(gamma, A, x):
    cfg = FlowConfig(1.0, gamma, A)
    for g in (cfg.g_left, cfg.g_right):
        assert solve_d(x, g, cfg) == pytest.approx(x / (g + cfg.h), rel=1e-14)
        # the bisection route converges to the same value
        assert float(solve_d_array([x], g, cfg)[0]) == pytest.approx(x / (g + cfg.h), rel=1e-14)


@pytest.mark.parametrize("p", [0.5, 0.8, 1.5, 2.0, 3.0])
def test_two_solvers_agree(p):
    # dual route: Newton-bisection hybrid against pure bisection
    cfg = FlowConfig(p, 0.7, 1.6)
    xs = np.logspace(-3, 0, 200)
    for g in (cfg.g_left, cfg.g_right):
        a = np.array([solve_d(float(x), g, cfg) for x in xs])
        b = solve_d_array(xs, g, cfg)
        np.testing.assert_allclose(a, b, rtol=1e-12)


def test_bounds_report_examples():
    cfg = FlowConfig(2.0, 1.0)
    rep = d_bounds_check(cfg, cfg.g_left, np.linspace(0, 1, 500))
    assert rep.ok and 0 < rep.c2 <= rep.c1 <= 2 * cfg.gamma / cfg.B
    assert rep.max_residual <= 1e-13
    again = d_bounds_check(cfg, cfg.g_left, np.linspace(0, 1, 500))
    assert (again.c_low, again.c_high) == (rep.c_low, rep.c_high)
    lin = FlowConfig(1.0, 0.375)
    rep = d_bounds_check(lin, 0.125, np.linspace(0.01, 1, 100))
    assert rep.c_low == pytest.approx(0.8 / 0.9, rel=1e-15)
    assert rep.c_high == pytest.approx(rep.c_low, rel=1e-15)
    sub = FlowConfig(0.5, 1.0)
    rep = d_bounds_check(sub, sub.g_right, np.linspace(0, sub.x_tilde(sub.g_right), 300))
    assert rep.ok
    with pytest.raises(DomainError):
        d_bounds_check(cfg, 0.125, [0.0, -1.0])


def _corner_gaps(trace, cfg, g):
    pts = trace.points
    if trace.direction == "right":
        x, d = pts[:-1], np.diff(pts)
    else:
        x, d = pts[:-1], -np.diff(pts)
    cx = x - g * d
    cy = cfg.B * d / 2
    return np.abs(cy - cfg.gamma * cx ** cfg.p) / cy


@pytest.mark.parametrize("p,gamma", [(1.0, 0.375), (2.0, 1.0), (3.0, 1e5), (0.5, 2.0)])
def test_boundary_contact(p, gamma):
    cfg = FlowConfig(p, gamma)
    r = rightward_flow(cfg, 1e-3, 0.5)
    assert np.all(np.diff(r.points) > 0) and r.points[-1] >= 0.5 > r.points[-2]
    assert _corner_gaps(r, cfg, cfg.g_left).max() <= 1e-10
    lft = leftward_flow(cfg, 0.5, 1e-3)
    assert np.all(np.diff(lft.points) < 0) and lft.points[-1] <= 1e-3 < lft.points[-2]
    assert _corner_gaps(lft, cfg, cfg.g_right).max() <= 1e-10


def test_linear_flows_are_geometric():
    cfg = FlowConfig(1.0, 0.375)
    lft = leftward_flow(cfg, 0.5, 1e-6)
    ratios = lft.points[1:] / lft.points[:-1]
    np.testing.assert_allclose(ratios, 9 / 17, rtol=1e-14)
    start = 1e-6 / 2
    r = rightward_flow(cfg, start, 0.5)
    ratio = 1 + 1 / (cfg.g_left + cfg.h)
    assert abs(r.steps - math.log(0.5 / start) / math.log(ratio)) <= 1


def test_empty_flows():
    cfg = FlowConfig(2.0, 1.0)
    r = rightward_flow(cfg, 0.6, 0.5)
    assert r.steps == 0 and r.points.tolist() == [0.6]
    lft = leftward_flow(cfg, 0.5, 0.7)
    assert lft.steps == 0 and lft.step_lengths().size == 0
    with pytest.raises(DomainError):
        rightward_flow(cfg, 0.0, 0.5)
    with pytest.raises(DomainError):
        leftward_flow(cfg, 0.5, 0.0)


def test_flow_errors():
    with pytest.raises(PetrasError):
        rightward_flow(FlowConfig(4.0, 1.0), 1e-80, 0.5)
    with pytest.raises(PetrasError):
        rightward_flow(FlowConfig(2.0, 1.0), 1e-3, 0.5, max_steps=10)


def test_rightward_steps_scale_like_one_over_eps():
    cfg = FlowConfig(2.0, 1.0)
    prod = []
    for eps in (1e-2, 1e-3, 1e-4, 1e-5):
        prod.append(rightward_flow(cfg, eps / 2, 0.5).steps * eps)
    prod = np.array(prod)
    assert np.all(prod > 0)
    assert abs(prod[-1] / prod[-2] - 1) < 0.05


def test_trace_csv(tmp_path):
    cfg = FlowConfig(2.0, 1.0)
    r = rightward_flow(cfg, 0.01, 0.5)
    path = tmp_path / "t.csv"
    r.write_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["step", "x", "d"]
    assert len(rows) == r.steps + 2
    assert float(rows[1][1]) == 0.01
    assert float(rows[1][2]) == pytest.approx(solve_d(0.01, cfg.g_left, cfg), rel=1e-15)
    assert rows[-1][2] == ""


def test_closed_form_examples():
    assert k_lower_p_le_1(1.0, 0.5, 1e-6, 9 / 8) == pytest.approx(20.722884555360006, rel=1e-12)
    assert k_lower_p_le_1(1.0, 0.5, 1.0, 9 / 8) == -1.0
    c1 = 3.0
    assert t_lower_p_gt_1(2.0, 1.0, 0.5, 1e-4, c1) == pytest.approx(2 / (c1 * 1e-4) - 1 / (c1 * 0.5))
    assert t_upper_p_gt_1(2.0, 1.0, 0.5, 1e-4, 1.0, 2.0) == pytest.approx((1e4 - 1) / 0.25)
    assert k_upper_p_le_1(1.0, 0.5, 1e-4, 9 / 8, 1.0) == pytest.approx(
        math.log(5e3) / math.log(1 + 1 / 3.5) + 1)
    with pytest.raises(DomainError):
        t_lower_p_gt_1(1.0, 1.0, 0.5, 1e-4, c1)
    with pytest.raises(DomainError):
        t_upper_p_gt_1(0.5, 1.0, 0.5, 1e-4, 1.0, 1.0)


def test_bound_evaluators():
    out = bound_evaluators(FlowConfig(1.0, 1.0), 1.0, 0.5, 0.5, 1e-6)
    assert out["k_lower_p_le_1"] == pytest.approx(20.722884555360006, rel=1e-12)
    assert out["t_lower_p_gt_1"] is None and out["k_upper_p_le_1"] is None
    out = bound_evaluators(FlowConfig(2.0, 1.0), 1.0, 0.5, 0.5, 1e-4, c1=3.0, c2=1.0, T0=2.0)
    assert out["t_lower_p_gt_1"] > 0 and out["t_upper_p_gt_1"] > out["t_lower_p_gt_1"]
    assert out["k_lower_p_le_1"] is None


@given(st.floats(1.0, 1e6), st.floats(1.0, 1e6))
def test_k_lower_increases_as_eps_shrinks(u, v):
    lo, hi = sorted((u, v))
    assert k_lower_p_le_1(1.0, 0.5, 1 / hi, 9 / 8) >= k_lower_p_le_1(1.0, 0.5, 1 / lo, 9 / 8)


@pytest.mark.parametrize("p,gamma", [(2.0, 1.0), (3.0, 1e5)])
def test_rightward_not_below_lower_bound(p, gamma):
    cfg = FlowConfig(p, gamma)
    rep = d_bounds_check(cfg, cfg.g_left, np.logspace(-14, 0, 400))
    for eps in (1e-3, 1e-4, 1e-5):
        steps = rightward_flow(cfg, eps / 2, 0.5).steps
        assert steps >= t_lower_p_gt_1(p, 1.0, 0.5, eps, rep.c1) - 1


def test_linear_rightward_not_below_lower_bound():
    cfg = FlowConfig(1.0, 0.375)
    for eps in (1e-3, 1e-4, 1e-5):
        steps = rightward_flow(cfg, eps / 2, 0.5).steps
        assert steps >= k_lower_p_le_1(1.0, 0.5, eps, cfg.g_right) - 2


def test_leftward_not_above_upper_bounds():
    f = get_integrand("sin_inv")
    cfg = FlowConfig(2.0, 0.5)
    rep = d_bounds_check(cfg, cfg.g_right, np.logspace(-12, 0, 400))
    for eps in (1e-2, 1e-3):
        T0 = estimate_T0(f, -1, 1, EngineConfig(eps))
        lft = leftward_flow(cfg, 0.5, eps / T0)
        assert lft.steps <= t_upper_p_gt_1(2.0, 1.0, 0.5, eps, rep.c2, T0) + 1
    lin = FlowConfig(1.0, 1.0)
    g = get_integrand("abs_x")
    for eps in (1e-3, 1e-5):
        T0 = estimate_T0(g, -1, 1, EngineConfig(eps))
        lft = leftward_flow(lin, 0.5, eps / T0)
        assert lft.steps <= k_upper_p_le_1(1.0, 0.5, eps, lin.g_right, T0) + 1
