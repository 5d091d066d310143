import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polycover.cost import CostKind, CostModel, polyline_cost, segment_time
from polycover.errors import InvalidInputError
from polycover.geometry import Polyline


def ramp_oracle(d, v, a):
    """Integrate a rest-to-rest trapezoidal profile numerically."""
    # accelerate to the peak speed reachable within d/2, cruise, decelerate
    v_peak = min(v, math.sqrt(a * d))
    t_ramp = v_peak / a
    d_ramp = v_peak * t_ramp  # both ramps together
    return 2 * t_ramp + (d - d_ramp) / v_peak if v_peak > 0 else 0.0


def test_segment_time_examples():
    assert segment_time(0, 3, 0.5) == 0.0
    assert segment_time(18, 3, 0.5) == pytest.approx(12.0, abs=1e-12)
    assert segment_time(30, 3, 0.5) == pytest.approx(16.0, abs=1e-12)
    with pytest.raises(InvalidInputError):
        segment_time(-1, 3, 0.5)


def test_segment_time_branches_continuous():
    d_a = 0.5 * 3 * (3 / 0.5)
    below = math.sqrt(4 * 2 * d_a / 0.5)
    above = 2 * (3 / 0.5) + 0 / 3
    assert abs(below - above) <= 1e-9
    eps = 1e-9
    assert abs(segment_time(2 * d_a - eps, 3, 0.5) - segment_time(2 * d_a, 3, 0.5)) < 1e-6


@given(st.floats(0, 1e4), st.floats(0.1, 20), st.floats(0.05, 5))
def test_segment_time_matches_profile_and_bounds(d, v, a):
    t = segment_time(d, v, a)
    assert t == pytest.approx(ramp_oracle(d, v, a), rel=1e-9, abs=1e-9)
    assert t >= d / v - 1e-9
    assert segment_time(d + 1.0, v, a) > t


def test_polyline_cost_examples():
    dot = Polyline(((1.0, 1.0),))
    assert polyline_cost(dot, CostModel(CostKind.TIME)) == 0
    assert polyline_cost(dot, CostModel(CostKind.DISTANCE)) == 0
    assert polyline_cost(dot, CostModel(CostKind.WAYPOINTS)) == 1
    loop = Polyline(((0, 0), (10, 0), (10, 10), (0, 10), (0, 0)))
    assert polyline_cost(loop, CostModel(CostKind.DISTANCE)) == pytest.approx(40)
    assert polyline_cost(loop, CostModel(CostKind.WAYPOINTS)) == 5
    two = Polyline(((0, 0), (18, 0), (36, 0)))
    assert polyline_cost(two, CostModel(CostKind.TIME, 3, 0.5)) == pytest.approx(24)


@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=1, max_size=8),
       st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=1, max_size=8))
def test_time_cost_additive_at_shared_waypoint(a, b):
    model = CostModel()
    joined = Polyline(tuple(a) + tuple(b))
    left = Polyline(tuple(a))
    right = Polyline((a[-1],) + tuple(b))
    assert polyline_cost(joined, model) == pytest.approx(polyline_cost(left, model) + polyline_cost(right, model))


def test_vectorized_costs_match_scalar():
    model = CostModel(CostKind.TIME, 3.0, 0.5)
    d = np.linspace(0, 60, 241)
    assert np.allclose(model.segment_costs(d), [segment_time(x, 3.0, 0.5) for x in d], rtol=0, atol=1e-12)


def test_invalid_time_parameters():
    with pytest.raises(InvalidInputError):
        CostModel(CostKind.TIME, 0.0, 0.5)
    with pytest.raises(ValueError):
        CostModel("speed")
