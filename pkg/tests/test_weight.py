import numpy as np
import pytest
from hypothesis import given, strategies as st

from cornerwaves.core.errors import GeometryError
from cornerwaves.meshing.trace_grid import line_grid
from cornerwaves.traces.fields import TraceField
from cornerwaves.traces.seminorms import l2_norm
from cornerwaves.traces.weight import (
    build_weight,
    commutator_apply,
    projected_derivative,
    smooth_Keps,
    weight_profile,
    weighted_derivative,
    weighted_derivative_power,
)


@given(st.floats(0.01, 1.0), st.floats(0.0, 3.0))
def test_profile_is_bounded_and_monotone(rho0, r):
    rho = weight_profile(np.array([r, r + 0.01]), rho0)
    assert 0.0 <= rho[0] <= rho0 + 1e-15
    assert rho[0] <= rho[1] + 1e-15
    assert rho[0] <= r + 1e-15


def test_profile_pieces():
    rho0 = 0.4
    r = np.array([0.0, 0.1, 0.2, 0.4, 0.5, 0.6, 1.0])
    # at r = rho0 the weight is 7 rho0 / 8, the cap is only reached at 3 rho0 / 2
    np.testing.assert_allclose(weight_profile(r, rho0), [0.0, 0.1, 0.2, 0.35, 0.3875, 0.4, 0.4])
    # the blend is C1: slope 1 at rho0/2 and 0 at 3 rho0/2
    d = 1e-6
    left = (weight_profile(np.array([0.2 + d]), rho0) - weight_profile(np.array([0.2]), rho0)) / d
    right = (weight_profile(np.array([0.6]), rho0) - weight_profile(np.array([0.6 - d]), rho0)) / d
    assert left[0] == pytest.approx(1.0, abs=1e-5)
    assert right[0] == pytest.approx(0.0, abs=1e-5)


def test_weight_vanishes_only_at_corners():
    grid = line_grid([np.linspace(0.0, 2.0, 81)])
    w = build_weight(grid, 0.25)
    assert w.values[0] == 0.0 and w.values[-1] == 0.0
    assert np.all(w.values[1:-1] > 0)
    assert w.values.max() == pytest.approx(0.25)


def test_truncated_end_keeps_full_weight(one_object_problem):
    w = one_object_problem.weight
    first = w.parts()[0]
    assert first[0] == pytest.approx(w.rho0)
    assert first[-1] == 0.0


def test_rho0_checked_against_geometry(rectangle_problem):
    with pytest.raises(GeometryError):
        build_weight(rectangle_problem.grid, 0.9, rectangle_problem.spec)
    with pytest.raises(GeometryError):
        build_weight(rectangle_problem.grid, 0.0)


def test_projected_derivative_exact_for_linear():
    x = np.sort(np.concatenate([[0.0, 1.0], np.random.default_rng(3).uniform(0.0, 1.0, 20)]))
    np.testing.assert_allclose(projected_derivative(x, 3.0 * x - 1.0), 3.0, atol=1e-12)


def test_weighted_derivative_of_linear_is_the_weight():
    grid = line_grid([np.linspace(0.0, 1.0, 41)])
    w = build_weight(grid, 0.2)
    df = weighted_derivative(TraceField(grid, 2.0 * grid.x), w)
    np.testing.assert_allclose(df.values, 2.0 * w.values, atol=1e-12)
    twice = weighted_derivative_power(TraceField(grid, grid.x), w, 0)
    np.testing.assert_allclose(twice.values, grid.x)


def test_smoothing_is_non_expansive_and_consistent():
    grid = line_grid([np.linspace(0.0, 1.0, 81)])
    w = build_weight(grid, 0.2)
    rng = np.random.default_rng(11)
    f = TraceField(grid, rng.standard_normal(grid.n_nodes))
    assert l2_norm(smooth_Keps(f, 0.01, w)) <= l2_norm(f) * (1 + 1e-10)
    smooth = TraceField.from_function(grid, lambda x: np.sin(2.0 * x))
    assert l2_norm(smooth_Keps(smooth, 1e-6, w) - smooth) < 1e-4
    constant = TraceField.constant(grid, 3.0)
    np.testing.assert_allclose(smooth_Keps(constant, 0.5, w).values, 3.0, atol=1e-12)
    with pytest.raises(ValueError):
        smooth_Keps(f, 0.0, w)


def test_commutator_of_constants_vanishes(rectangle_problem):
    prob = rectangle_problem
    c = TraceField.constant(prob.grid, 1.0)
    out = commutator_apply(prob.op, prob.weight, 1, c)
    assert np.abs(out.values).max() < 1e-8
    with pytest.raises(ValueError):
        commutator_apply(prob.op, prob.weight, 4, c)
