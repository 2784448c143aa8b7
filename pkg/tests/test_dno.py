import math

import numpy as np
import pytest

from cornerwaves.config.settings import override_settings
from cornerwaves.core.errors import DimensionError
from cornerwaves.dno.operator import (
    analytic_rectangle_eigenvalue,
    build,
    dtn_apply,
    dtn_form,
    dtn_spectrum,
    spectrum_rows,
)
from cornerwaves.fem.solvers import dirichlet_energy, solve_mixed
from cornerwaves.geometry.catalog import rectangle_dimensions
from cornerwaves.traces.fields import TraceField


def test_schur_is_symmetric_semidefinite(two_object_problem):
    S = two_object_problem.op.schur
    np.testing.assert_allclose(S, S.T, atol=1e-12)
    np.testing.assert_allclose(S @ np.ones(len(S)), 0.0, atol=1e-10)
    assert np.linalg.eigvalsh(S).min() > -1e-10


def test_form_is_the_extension_energy(one_object_problem):
    prob = one_object_problem
    psi = np.cos(1.3 * prob.grid.x) + 0.2 * prob.grid.x
    phi = solve_mixed(prob.system, psi)
    assert dtn_form(prob.op, psi, psi) == pytest.approx(dirichlet_energy(prob.system, phi), rel=1e-7)


def test_flux_of_any_trace_has_zero_integral(two_object_problem):
    op = two_object_problem.op
    rng = np.random.default_rng(7)
    for _ in range(5):
        flux = dtn_apply(op, rng.standard_normal(op.n))
        assert abs(float(np.sum(op.mass @ flux.values))) < 1e-9


def test_rectangle_spectrum_matches_oracle(rectangle_problem):
    pairs = dtn_spectrum(rectangle_problem.op, 4)
    assert pairs[0][0] == pytest.approx(0.0, abs=1e-9)
    for n, (lam, _) in enumerate(pairs[1:], start=1):
        assert lam == pytest.approx(analytic_rectangle_eigenvalue(n), rel=2e-2)
    lams = [lam for lam, _ in pairs]
    assert lams == sorted(lams)


def test_eigenvectors_are_mass_orthonormal(rectangle_problem):
    op = rectangle_problem.op
    V = np.column_stack([v for _, v in dtn_spectrum(op, 4)])
    np.testing.assert_allclose(V.T @ (op.mass @ V), np.eye(4), atol=1e-8)


def test_spectrum_rows_carry_analytic_column(rectangle_problem):
    prob = rectangle_problem
    rows = spectrum_rows(prob.op, 3, rectangle=rectangle_dimensions(prob.spec))
    assert [r["index"] for r in rows] == [0, 1, 2, 3]
    assert rows[2]["analytic_lambda"] == pytest.approx(2.0 * math.tanh(2.0))
    assert all(r["rel_error"] < 0.05 for r in rows[1:])


def test_spectrum_rejects_too_many_modes(rectangle_problem):
    with pytest.raises(DimensionError):
        dtn_spectrum(rectangle_problem.op, rectangle_problem.op.n + 1)


@pytest.mark.slow
def test_matrix_free_agrees_with_dense(rectangle_problem):
    override_settings(linear_solver="direct")
    system = rectangle_problem.system
    lazy = build(system, mode="matrix-free")
    assert not lazy.dense
    psi = np.sin(2.0 * system.grid.x) + 0.1
    np.testing.assert_allclose(lazy.apply_schur(psi), rectangle_problem.op.apply_schur(psi), atol=1e-8)
    dense_pairs = dtn_spectrum(rectangle_problem.op, 3)
    lazy_pairs = dtn_spectrum(lazy, 3)
    for (a, _), (b, _) in zip(dense_pairs[1:], lazy_pairs[1:]):
        assert b == pytest.approx(a, rel=1e-6)


def test_apply_returns_trace_field(rectangle_problem):
    op = rectangle_problem.op
    flux = dtn_apply(op, TraceField.from_function(op.grid, np.cos))
    assert isinstance(flux, TraceField)
    # cos(x) is close to the first eigenfunction with eigenvalue tanh(1)
    interior = slice(op.n // 4, 3 * op.n // 4)
    ratio = flux.values[interior] / np.cos(op.grid.x[interior])
    mask = np.abs(np.cos(op.grid.x[interior])) > 0.3
    np.testing.assert_allclose(ratio[mask], math.tanh(1.0), rtol=5e-2)
