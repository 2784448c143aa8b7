import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cornerwaves.core.errors import DimensionError, GeometryError
from cornerwaves.meshing.trace_grid import line_grid
from cornerwaves.traces.fields import TraceField
from cornerwaves.traces.seminorms import (
    ScreenedForm,
    averages,
    component_average,
    full_h_half_norm,
    gagliardo_matrix,
    jump_sum,
    l2_norm,
    seminorm_gammaD,
    seminorm_screened,
    trace_report,
    weighted_mean,
    zero_mass_project,
)

NODES = np.linspace(0.0, 2.0, 21)
values_on_nodes = arrays(np.float64, NODES.shape, elements=st.floats(-5.0, 5.0, allow_nan=False))


def test_linear_function_fills_the_band():
    x = np.linspace(0.0, 2.0, 41)
    assert seminorm_screened(x, x, 1.0) == pytest.approx(math.sqrt(3.0), rel=1e-10)


@pytest.mark.parametrize("length", [0.5, 1.0, 3.0])
def test_linear_function_unscreened(length):
    x = np.linspace(0.0, length, 17)
    assert seminorm_screened(x, x, math.inf) == pytest.approx(length, rel=1e-10)


def test_kink_seminorm():
    x = np.linspace(0.0, 2.0, 41)
    expected = math.sqrt(8.0 * (1.0 - math.log(2.0)))
    assert seminorm_screened(np.abs(x - 1.0), x, math.inf) == pytest.approx(expected, rel=1e-3)


def test_graded_nodes_give_the_same_linear_value():
    x = 2.0 * np.linspace(0.0, 1.0, 25) ** 2
    assert seminorm_screened(x, x, 1.0) == pytest.approx(math.sqrt(3.0), rel=1e-9)


@given(values_on_nodes, st.floats(-10.0, 10.0))
def test_constants_are_invisible(values, c):
    base = seminorm_screened(values, NODES, 0.7)
    assert seminorm_screened(values + c, NODES, 0.7) == pytest.approx(base, rel=1e-9, abs=1e-5)


@given(values_on_nodes, st.floats(0.1, 5.0))
def test_seminorm_is_homogeneous(values, scale):
    base = seminorm_screened(values, NODES, 0.7)
    assert seminorm_screened(scale * values, NODES, 0.7) == pytest.approx(scale * base, rel=1e-9, abs=1e-5)


@given(values_on_nodes)
def test_screening_only_removes_mass(values):
    narrow = seminorm_screened(values, NODES, 0.3)
    wide = seminorm_screened(values, NODES, 1.0)
    full = seminorm_screened(values, NODES, math.inf)
    assert narrow <= wide * (1 + 1e-9) + 1e-5
    assert wide <= full * (1 + 1e-9) + 1e-5


def test_form_matrix_is_symmetric_semidefinite():
    Q = gagliardo_matrix([np.linspace(0.0, 1.0, 15), np.linspace(1.5, 2.0, 8)], 0.8)
    np.testing.assert_allclose(Q, Q.T)
    np.testing.assert_allclose(Q @ np.ones(len(Q)), 0.0, atol=1e-10)
    assert np.linalg.eigvalsh(Q).min() > -1e-10


def test_bad_inputs():
    with pytest.raises(GeometryError):
        seminorm_screened(np.zeros(1), np.zeros(1), 1.0)
    with pytest.raises(DimensionError):
        seminorm_screened(np.zeros(3), NODES, 1.0)
    with pytest.raises(GeometryError):
        seminorm_screened(NODES, NODES, 0.0)


def test_averages_and_jumps(unit_grid):
    f = TraceField(unit_grid, np.concatenate([np.full(21, 1.0), np.full(31, 4.0)]))
    assert averages(f) == pytest.approx([1.0, 4.0])
    assert jump_sum(f) == pytest.approx(3.0)
    assert weighted_mean(f) == pytest.approx((1.0 * 1.0 + 1.5 * 4.0) / 2.5)
    assert seminorm_gammaD(f, 0.5) == pytest.approx(3.0, abs=1e-12)
    assert seminorm_gammaD(f, 1) == pytest.approx(3.0, abs=1e-12)


def test_window_average(unit_grid):
    f = TraceField.from_function(unit_grid, lambda x: x)
    assert component_average(f, 2, window=(2.0, 2.5)) == pytest.approx(2.25)
    with pytest.raises(KeyError):
        component_average(f, 3)


def test_zero_mass_projection_is_idempotent(unit_grid):
    f = TraceField.from_function(unit_grid, lambda x: np.sin(3.0 * x) + x)
    g = zero_mass_project(f)
    assert weighted_mean(g) == pytest.approx(0.0, abs=1e-13)
    np.testing.assert_allclose(zero_mass_project(g).values, g.values, atol=1e-13)


def test_seminorm_order_must_be_half_or_one(unit_grid):
    with pytest.raises(ValueError):
        seminorm_gammaD(TraceField.zeros(unit_grid), 0.75)


def test_truncated_component_is_screened():
    x = np.linspace(0.0, 4.0, 41)
    bounded = line_grid([x])
    truncated = line_grid([x], unbounded={1: True})
    f_b = TraceField(bounded, x)
    f_t = TraceField(truncated, x)
    assert ScreenedForm(bounded).component_values(f_b)[0] == pytest.approx(4.0, rel=1e-10)
    # screening radius 1 on a length-4 interval: band area 16 - 9
    assert ScreenedForm(truncated, 1.0).component_values(f_t)[0] == pytest.approx(math.sqrt(7.0), rel=1e-10)


def test_norms_and_report(unit_grid):
    f = TraceField.constant(unit_grid, 2.0)
    assert l2_norm(f) == pytest.approx(2.0 * math.sqrt(2.5))
    assert full_h_half_norm(f) == pytest.approx(l2_norm(f), rel=1e-9)
    steps = TraceField(unit_grid, np.concatenate([np.full(21, 1.0), np.full(31, 4.0)]))
    assert full_h_half_norm(steps) > l2_norm(steps)
    rows = trace_report(TraceField.from_function(unit_grid, np.cos))
    assert [r["component"] for r in rows] == [1, 2]
    assert all(r["screen_radius"] is None for r in rows)
    assert all(r["seminorm_half"] > 0 and r["l2"] > 0 for r in rows)
