import math

import numpy as np
import pytest

from cornerwaves.core.errors import DimensionError, NeumannCompatibilityError
from cornerwaves.fem.assembly import assemble, element_stiffness
from cornerwaves.fem.solvers import dirichlet_energy, l2_error, solve_mixed, solve_neumann


def test_element_stiffness_annihilates_constants():
    K = element_stiffness(np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.2, 0.7]))
    np.testing.assert_allclose(K @ np.ones(3), 0.0, atol=1e-14)
    np.testing.assert_allclose(K, K.T)
    assert np.all(np.linalg.eigvalsh(K) > -1e-14)


def test_constant_trace_extends_to_constant(rectangle_problem):
    system = rectangle_problem.system
    phi = solve_mixed(system, np.full(system.n_trace, 2.5))
    np.testing.assert_allclose(phi.values, 2.5, atol=1e-8)
    assert dirichlet_energy(system, phi) == pytest.approx(0.0, abs=1e-12)


def test_extension_keeps_the_trace(two_object_problem):
    system = two_object_problem.system
    psi = np.sin(system.grid.x)
    phi = solve_mixed(system, psi)
    np.testing.assert_allclose(phi.trace(system), psi, atol=1e-14)
    assert phi.residual < 1e-8


def test_cos_mode_extension_matches_closed_form(rectangle_problem):
    system = rectangle_problem.system
    phi = solve_mixed(system, np.cos(system.grid.x))
    # cos(x) cosh(z + 1) / cosh(1): energy (pi / 2) tanh(1)
    assert dirichlet_energy(system, phi) == pytest.approx(0.5 * math.pi * math.tanh(1.0), rel=2e-2)
    err = l2_error(system, phi, lambda x, z: np.cos(x) * np.cosh(z + 1.0) / math.cosh(1.0))
    assert err < 1e-2


def test_neumann_rejects_incompatible_data(rectangle_problem):
    system = rectangle_problem.system
    with pytest.raises(NeumannCompatibilityError):
        solve_neumann(system, None, np.ones(system.n_trace))


def test_neumann_rejects_wrong_volume_size(rectangle_problem):
    system = rectangle_problem.system
    with pytest.raises(DimensionError):
        solve_neumann(system, np.zeros(3), None)


def test_neumann_solution_is_zero_mean(rectangle_problem):
    system = rectangle_problem.system
    b = system.boundary_basis_integrals()
    g = np.cos(system.grid.x)
    g = g - (b @ g) / b.sum()
    u = solve_neumann(system, None, g)
    assert float(system.area_vector @ u.values) == pytest.approx(0.0, abs=1e-10)
    # Neumann data cos(x) on top: u = cos(x) cosh(z + 1) / sinh(1) up to a constant
    exact = lambda x, z: np.cos(x) * np.cosh(z + 1.0) / math.sinh(1.0)
    assert l2_error(system, u, exact) < 2e-2


def test_neumann_inverts_the_dtn_map(rectangle_problem):
    system = rectangle_problem.system
    op = rectangle_problem.op
    psi = np.cos(2.0 * system.grid.x)
    g = op.solve_mass(op.apply_schur(psi))
    u = solve_neumann(system, None, g)
    # the Neumann solution matches psi up to the gauge constant
    diff = u.trace(system) - psi
    assert np.ptp(diff) < 1e-5 * np.abs(psi).max()


def test_assemble_splits_trace_and_free_vertices(rectangle_problem):
    mesh = rectangle_problem.mesh
    system = assemble(mesh)
    assert len(np.intersect1d(system.gamma, system.free)) == 0
    assert system.n_trace + len(system.free) == mesh.n_vertices
    np.testing.assert_allclose(system.stiffness @ np.ones(mesh.n_vertices), 0.0, atol=1e-11)
    assert system.mass.sum() == pytest.approx(math.pi)
    assert system.area_vector.sum() == pytest.approx(math.pi)
    assert system.boundary_basis_integrals().sum() == pytest.approx(math.pi)
