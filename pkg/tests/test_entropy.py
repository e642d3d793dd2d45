import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rifields.entropy import (MetricMeasureSpace, ball_function, build_net_hierarchy,
                              covering_number, entropy, entropy_bracket, exact_covering_number,
                              greedy_net)


def line_cover_count(n, eps):
    # n equally spaced points on [0, 1]: a closed eps-ball centered at a point
    # holds 2 floor(eps / h) + 1 of them
    h = 1.0 / (n - 1)
    per = 2 * math.floor(eps / h + 1e-9) + 1
    return math.ceil(n / per)


def test_space_validation():
    with pytest.raises(ValueError):
        MetricMeasureSpace(np.array([[0.0, 1.0], [2.0, 0.0]]), np.ones(2))
    with pytest.raises(ValueError):
        MetricMeasureSpace(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float), np.ones(3))
    with pytest.raises(ValueError):
        MetricMeasureSpace(np.zeros((2, 2)), np.array([1.0, -1.0]))


def test_single_point_space():
    sp = MetricMeasureSpace(np.zeros((1, 1)), np.array([1.0]))
    assert covering_number(sp, 0.1) == (1, 1)
    assert ball_function(sp, 0.1) == 1.0
    assert math.isinf(sp.resolution)


@pytest.mark.parametrize("n,eps", [(10, 0.05), (10, 0.12), (12, 0.3), (16, 0.1), (9, 0.5)])
def test_line_covering_brackets_the_closed_form(n, eps):
    sp = MetricMeasureSpace.uniform_grid(n)
    exact = line_cover_count(n, eps)
    b = covering_number(sp, eps)
    assert b.lower <= exact <= b.upper
    if n <= 16:
        assert exact_covering_number(sp, eps) == exact


def test_covering_extremes():
    sp = MetricMeasureSpace.uniform_grid(20)
    assert covering_number(sp, sp.diameter) == (1, 1)
    assert covering_number(sp, sp.resolution / 3) == (20, 20)
    assert entropy(sp, sp.diameter) == 0.0
    up, lo = entropy_bracket(sp, 0.2)
    assert up >= lo


def test_greedy_net_is_a_cover():
    sp = MetricMeasureSpace.from_coords(np.random.default_rng(3).random((40, 2)))
    net = greedy_net(sp, 0.2)
    assert np.all(sp.dist[:, net].min(axis=1) <= 0.2)
    assert np.all(np.diff(net) > 0)


def test_ball_function_on_grid():
    sp = MetricMeasureSpace.uniform_grid(11)
    assert ball_function(sp, 0.1) == pytest.approx(3 / 11)
    assert ball_function(sp, 2.0) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.floats(0.01, 1.0), st.integers(0, 10**6))
def test_bracket_contains_exhaustive_optimum(n, eps, seed):
    sp = MetricMeasureSpace.from_coords(np.random.default_rng(seed).random((n, 2)))
    b = covering_number(sp, eps)
    assert b.lower <= exact_covering_number(sp, eps) <= b.upper


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.integers(0, 10**6))
def test_covering_monotone_in_radius(n, seed):
    sp = MetricMeasureSpace.from_coords(np.random.default_rng(seed).random((n, 2)))
    radii = np.geomspace(1e-3, 2, 25)
    lower = [covering_number(sp, r).lower for r in radii]
    assert all(a >= b for a, b in zip(lower, lower[1:]))
    balls = [ball_function(sp, r) for r in radii]
    assert all(a <= b for a, b in zip(balls, balls[1:]))


def test_net_hierarchy_projection_radius():
    sp = MetricMeasureSpace.from_coords(np.random.default_rng(1).random((50, 2)))
    h = build_net_hierarchy(sp, 0.5)
    assert len(h.levels[0].net) == 1
    for lv in h.levels:
        assert np.all(sp.dist[np.arange(sp.n), lv.projection] <= lv.radius + 1e-12)
        assert set(lv.projection) <= set(lv.net)
    assert h.resolution_limited
    assert h.levels[-1].projection.tolist() == list(range(sp.n))


def test_net_hierarchy_on_wide_space_uses_base_radius():
    sp = MetricMeasureSpace.uniform_grid(9, 0.0, 8.0)
    h = build_net_hierarchy(sp, 0.5)
    assert h.base_radius == pytest.approx(4.0)
    assert h.levels[1].radius == pytest.approx(2.0)
