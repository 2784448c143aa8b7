import math

import numpy as np
import pytest

from cornerwaves.core.errors import ConfigError, DimensionError
from cornerwaves.dno.operator import dtn_spectrum
from cornerwaves.evolution.integrator import (
    CrankNicolson,
    discrete_cn_frequency,
    evolve,
    standing_mode_frequency,
    step_cn,
)
from cornerwaves.evolution.operators import (
    apply_A,
    energy,
    surface_integral,
    triple_norm,
    weighted_norm_Nn,
    x_inner,
    x_norm,
)
from cornerwaves.evolution.state import EvolveConfig, Forcing, WaveState
from cornerwaves.traces.fields import TraceField
from cornerwaves.traces.seminorms import zero_mass_project


def _random_state(grid, seed):
    rng = np.random.default_rng(seed)
    return WaveState.from_values(grid, rng.standard_normal(grid.n_nodes), rng.standard_normal(grid.n_nodes))


def test_A_is_skew_in_the_energy_product(two_object_problem):
    prob = two_object_problem
    U = _random_state(prob.grid, 1)
    V = _random_state(prob.grid, 2)
    g = prob.gravity
    lhs = x_inner(prob.op, g, apply_A(prob.op, g, U), V)
    rhs = -x_inner(prob.op, g, U, apply_A(prob.op, g, V))
    scale = x_norm(prob.op, g, apply_A(prob.op, g, U)) * x_norm(prob.op, g, V)
    assert abs(lhs - rhs) <= 1e-11 * scale


def test_crank_nicolson_conserves_energy(rectangle_problem):
    prob = rectangle_problem
    psi0 = TraceField.from_function(prob.grid, np.cos)
    U0 = WaveState(TraceField.zeros(prob.grid), psi0)
    traj = evolve(prob.op, prob.gravity, U0, None, EvolveConfig(dt=0.05, steps=200, monitor_orders=0))
    assert len(traj) == 201
    assert traj.relative_energy_drift() < 1e-9
    assert traj.bound_ok
    t = traj.column("t")
    assert np.all(np.diff(t) > 0)
    assert t[-1] == pytest.approx(10.0)


def test_surface_masses_are_conserved(two_object_problem):
    prob = two_object_problem
    U0 = WaveState(TraceField.zeros(prob.grid), zero_mass_project(TraceField.from_function(prob.grid, np.sin)))
    traj = evolve(prob.op, prob.gravity, U0, None,
                  EvolveConfig(dt=0.05, steps=50, zero_mass_mode=True, monitor_orders=0))
    assert np.abs(traj.column("mass_zeta")).max() < 1e-10
    assert np.abs(traj.column("mass_psi")).max() < 1e-10


def test_zero_mass_mode_rejects_non_zero_mean(two_object_problem):
    prob = two_object_problem
    U0 = WaveState(TraceField.zeros(prob.grid), TraceField.constant(prob.grid, 1.0))
    with pytest.raises(ConfigError):
        evolve(prob.op, prob.gravity, U0, None, EvolveConfig(dt=0.1, steps=1, zero_mass_mode=True))


def test_standing_mode_rotates_at_the_discrete_frequency(rectangle_problem):
    prob = rectangle_problem
    op, g = prob.op, prob.gravity
    lam, v = dtn_spectrum(op, 2)[1]
    dt = 0.1
    stepper = CrankNicolson(op, g, dt)
    U = WaveState(TraceField.zeros(prob.grid), TraceField(prob.grid, v))
    theta = discrete_cn_frequency(math.sqrt(g * lam), dt) * dt
    amplitudes = [float(v @ (op.mass @ U.psi.values))]
    for _ in range(40):
        U = stepper.step(U)
        amplitudes.append(float(v @ (op.mass @ U.psi.values)))
    a = np.array(amplitudes)
    np.testing.assert_allclose(a[2:] + a[:-2], 2.0 * math.cos(theta) * a[1:-1], atol=1e-9)
    assert standing_mode_frequency(op, g) == pytest.approx(math.sqrt(g * lam))


def test_forcing_enters_the_bound(rectangle_problem):
    prob = rectangle_problem
    grid = prob.grid
    times = [0.0, 0.5, 1.0]
    f = np.outer([0.0, 1.0, 0.0], np.cos(grid.x))
    forcing = Forcing.from_samples(times, f_samples=f)
    traj = evolve(prob.op, prob.gravity, WaveState.zeros(grid), forcing,
                  EvolveConfig(dt=0.1, steps=10, monitor_orders=0))
    assert traj.bound_ok
    assert traj.rows[-1]["bound"] > 0
    assert traj.rows[-1]["x_norm"] <= traj.rows[-1]["bound"] * (1 + 1e-6)


def test_forcing_beyond_its_samples(rectangle_problem):
    forcing = Forcing.from_samples([0.0, 0.1], f_samples=np.zeros((2, rectangle_problem.grid.n_nodes)))
    with pytest.raises(DimensionError):
        forcing.state(rectangle_problem.grid, 0.5)


def test_energy_is_half_the_squared_norm(rectangle_problem):
    prob = rectangle_problem
    U = _random_state(prob.grid, 5)
    assert energy(prob.op, prob.gravity, U) == pytest.approx(0.5 * x_norm(prob.op, prob.gravity, U) ** 2)
    assert surface_integral(prob.op, TraceField.constant(prob.grid, 1.0)) == pytest.approx(math.pi)


def test_norm_orders(rectangle_problem):
    prob = rectangle_problem
    U = WaveState(TraceField.zeros(prob.grid), TraceField.from_function(prob.grid, np.cos))
    g = prob.gravity
    n0 = triple_norm(prob.op, g, U, 0)
    n1 = triple_norm(prob.op, g, U, 1)
    assert n0 == pytest.approx(x_norm(prob.op, g, U))
    assert n1 > n0
    assert weighted_norm_Nn(prob.op, g, prob.weight, U, 1) >= n1 - 1e-12
    with pytest.raises(ValueError):
        triple_norm(prob.op, g, U, 3)
    assert triple_norm(prob.op, g, U, 3, experimental=True) > n1


def test_weighted_norms_stay_bounded_along_a_run(rectangle_problem):
    prob = rectangle_problem
    U0 = WaveState(TraceField.zeros(prob.grid), TraceField.from_function(prob.grid, np.cos))
    traj = evolve(prob.op, prob.gravity, U0, None, EvolveConfig(dt=0.05, steps=40, monitor_orders=1),
                  prob.weight)
    n1 = traj.column("N1")
    assert n1.max() <= 1.5 * n1[0]


def test_state_grid_mismatch(rectangle_problem, unit_grid):
    prob = rectangle_problem
    with pytest.raises(DimensionError):
        x_norm(prob.op, prob.gravity, WaveState.zeros(unit_grid))
    with pytest.raises(ConfigError):
        CrankNicolson(prob.op, prob.gravity, 0.0)


def test_step_cn_matches_the_cached_stepper(rectangle_problem):
    prob = rectangle_problem
    U = _random_state(prob.grid, 9)
    stepper = CrankNicolson(prob.op, prob.gravity, 0.1)
    a = step_cn(prob.op, prob.gravity, U, 0.1)
    b = step_cn(prob.op, prob.gravity, U, 0.1, stepper=stepper)
    np.testing.assert_allclose(a.psi.values, b.psi.values, atol=1e-12)
    np.testing.assert_allclose(a.zeta.values, b.zeta.values, atol=1e-12)
    assert a.t == pytest.approx(U.t + 0.1)
