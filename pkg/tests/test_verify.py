import math

import numpy as np
import pytest

from cornerwaves.core.errors import ConfigError, MeshGenerationError
from cornerwaves.geometry.catalog import builtin_domain
from cornerwaves.meshing.generator import generate
from cornerwaves.meshing.grading import GradingParams
from cornerwaves.verify.contracts import CheckRecord, SuiteReport
from cornerwaves.verify.corner import analytic_exponent, corner_exponent_fit
from cornerwaves.verify.ensembles import (
    jacobi_smooth_chain,
    jacobi_trace_ensemble,
    jacobi_volume_ensemble,
    VolumeTrigSample,
    sample_streams,
    trig_trace_ensemble,
    trig_volume_ensemble,
)
from cornerwaves.verify.rellich import AffineField, affine_field, rellich_residual, rellich_terms
from cornerwaves.verify.suites import SUITES, SuiteParams, run_suite


@pytest.mark.parametrize("field", ["e_x", "-e_z", "position", {"matrix": [[0.0, 1.0], [-1.0, 0.0]]}])
def test_rellich_identity_is_exact_for_affine_potentials(one_object_problem, field):
    system = one_object_problem.system
    v = system.mesh.vertices
    phi = 0.3 + v[:, 0] - 2.0 * v[:, 1]
    assert rellich_residual(system, phi, field) < 1e-10


def test_rellich_with_volume_source(rectangle_problem):
    system = rectangle_problem.system
    v = system.mesh.vertices
    # u = x^2 has Laplacian 2
    terms = rellich_terms(system, v[:, 0] ** 2, "e_x", f=np.full(len(v), 2.0))
    assert terms.energy > 0
    assert terms.residual < 0.1


def test_unknown_named_field():
    with pytest.raises(ConfigError):
        affine_field("swirl")
    assert affine_field("position").divergence == 2.0
    assert isinstance(affine_field({"offset": [1.0, 2.0]}), AffineField)


def test_streams_are_reproducible():
    a = [rng.standard_normal(3) for rng in sample_streams(42, 4)]
    b = [rng.standard_normal(3) for rng in sample_streams(42, 4)]
    c = [rng.standard_normal(3) for rng in sample_streams(43, 4)]
    np.testing.assert_array_equal(np.array(a), np.array(b))
    assert not np.allclose(np.array(a), np.array(c))


def test_ensembles_do_not_depend_on_threads(unit_grid):
    serial = trig_trace_ensemble(unit_grid, 5, 8, threads=1)
    pooled = trig_trace_ensemble(unit_grid, 5, 8, threads=4)
    for s, p in zip(serial, pooled):
        np.testing.assert_array_equal(s.values, p.values)
    jac = jacobi_trace_ensemble(unit_grid, 5, 6)
    assert len(jac) == 6 and all(f.grid is unit_grid for f in jac)


def test_jacobi_sweeps_smooth():
    rng = np.random.default_rng(0)
    noise = rng.standard_normal(200)
    rough = np.abs(np.diff(noise)).mean()
    smooth = np.abs(np.diff(jacobi_smooth_chain(noise, 8))).mean()
    assert smooth < 0.5 * rough
    np.testing.assert_array_equal(jacobi_smooth_chain(noise, 0), noise)


def test_volume_ensemble_shape(rectangle_problem):
    fields = jacobi_volume_ensemble(rectangle_problem.system, 1, 3)
    assert [f.shape for f in fields] == [(rectangle_problem.mesh.n_vertices,)] * 3


def test_smooth_volume_samples_ignore_the_mesh(rectangle_problem):
    box = np.array([[0.0, -1.0], [math.pi, -1.0], [math.pi, 0.0], [0.0, 0.0]])
    extra = np.array([[0.3, -0.2], [1.7, -0.9]])
    sample = VolumeTrigSample(np.random.default_rng(3))
    coarse = sample.evaluate(box)
    fine = sample.evaluate(np.vstack([box, extra]))
    np.testing.assert_allclose(fine[:4], coarse, rtol=0, atol=1e-14)
    fields = trig_volume_ensemble(rectangle_problem.system, 1, 2)
    assert [f.shape for f in fields] == [(rectangle_problem.mesh.n_vertices,)] * 2
    assert not np.allclose(fields[0], fields[1])


def test_report_merge_and_sort():
    a = SuiteReport(suite="all", geometry="rectangle", seed=1,
                    checks=[CheckRecord(name="b.x", value=1.0, bound=2.0, passed=True)])
    b = SuiteReport(suite="b", geometry="rectangle", seed=1,
                    checks=[CheckRecord(name="a.y", value=None, passed=False, detail="boom")],
                    tables={"a.t": [{"k": 1}]})
    merged = a.merged(b)
    assert [c.name for c in merged.checks] == ["a.y", "b.x"]
    assert not merged.passed
    assert [c.name for c in merged.failures] == ["a.y"]
    assert SuiteReport.model_validate_json(merged.model_dump_json()) == merged


def test_unknown_suite():
    with pytest.raises(ConfigError):
        run_suite("nonsense")


def test_analytic_exponent():
    assert analytic_exponent(0.5 * math.pi) == pytest.approx(1.0)
    assert analytic_exponent(0.75 * math.pi) == pytest.approx(2.0 / 3.0)


def test_thin_fitting_ring_is_refused():
    spec = builtin_domain("sector", omega=0.75 * math.pi)
    grading = GradingParams(h0=0.1, grading_exponent=1.0, rho0=0.1)
    mesh = generate(spec, grading)
    with pytest.raises(MeshGenerationError):
        corner_exponent_fit(spec, mesh, lambda x: np.cos(0.5 * math.pi * x), grading)


@pytest.mark.slow
@pytest.mark.parametrize("omega", [0.5 * math.pi, 0.75 * math.pi])
def test_corner_exponent_fit(omega):
    spec = builtin_domain("sector", omega=omega)
    grading = GradingParams(h0=0.02, grading_exponent=3.0, rho0=0.1)
    fit = corner_exponent_fit(spec, generate(spec, grading), lambda x: np.cos(0.5 * math.pi * x), grading)
    assert fit.relative_error < 0.05


@pytest.mark.slow
def test_rellich_suite_on_rectangle():
    report = run_suite("rellich", "rectangle", SuiteParams(h0=0.1), seed=3)
    names = {c.name: c for c in report.checks}
    for key in ("rellich.affine[z,-e_z]", "rellich.affine[x,e_x]", "rellich.affine[x+2z,position]"):
        assert names[key].passed
    ratio = names["rellich.cos_mode_halving_ratio"].value
    assert ratio is not None and ratio > 1.5
    assert report.mesh_params["rho0"] == pytest.approx(0.25)


@pytest.mark.slow
def test_evolution_suite_conserves():
    report = run_suite("evolution", "rectangle", SuiteParams(h0=0.1, evolve_steps=100, ensemble_size=4), seed=7)
    names = {c.name: c for c in report.checks}
    assert names["evolution.skew_adjoint"].passed
    assert names["evolution.energy_drift"].passed
    assert all(c.name.startswith("evolution.") for c in report.checks)


def test_suite_names_are_stable():
    assert SUITES == ("traces", "dno", "rellich", "evolution", "commutator", "corner")


def _by_name(report):
    return {c.name: c for c in report.checks}


def test_dno_suite_records_ellipticity_and_continuity():
    report = run_suite("dno", "rectangle", SuiteParams(h0=0.2, ensemble_size=4, modes=2), seed=2)
    names = _by_name(report)
    for key in ("dno.ellipticity_constant", "dno.continuity_constant", "dno.dirichlet_principle"):
        assert names[key].passed, names[key]
    assert "dno.ellipticity_refinement_drift" in names and "dno.continuity_refinement_drift" in names
    assert [row["h0"] for row in report.tables["dno.ellipticity"]] == [0.2, 0.1]
    assert all(row["constant"] > 0 for row in report.tables["dno.continuity"])


@pytest.mark.slow
def test_dno_acceptance_on_one_object():
    names = _by_name(run_suite("dno", "one-object", SuiteParams(ensemble_size=20), seed=1))
    for key in ("dno.equivalence_low_drift", "dno.equivalence_high_drift",
                "dno.ellipticity_constant", "dno.ellipticity_refinement_drift",
                "dno.continuity_constant", "dno.continuity_refinement_drift"):
        assert names[key].passed, names[key]


@pytest.mark.slow
def test_trace_constants_are_refinement_stable():
    names = _by_name(run_suite("traces", "one-object", SuiteParams(ensemble_size=20), seed=1))
    for key in ("traces.poincare_refinement_drift", "traces.screening_refinement_drift",
                "traces.trace_refinement_drift"):
        assert names[key].passed, names[key]


@pytest.mark.slow
def test_rectangle_spectrum_matches_closed_form():
    names = _by_name(run_suite("dno", "rectangle", SuiteParams(h0=0.05, ensemble_size=4), seed=1))
    assert names["dno.spectrum_rel_error"].passed
    assert names["dno.spectrum_rel_error"].value < 0.01


@pytest.mark.slow
def test_evolution_acceptance_on_rectangle():
    names = _by_name(run_suite("evolution", "rectangle", SuiteParams(ensemble_size=4), seed=1))
    assert names["evolution.energy_drift"].passed
    assert names["evolution.energy_drift"].bound == 1e-8
    assert names["evolution.dispersion_period"].passed
    assert names["evolution.dispersion_period"].bound == 0.005


@pytest.mark.slow
def test_dispersion_runs_without_closed_form():
    names = _by_name(run_suite("evolution", "one-object", SuiteParams(h0=0.1, ensemble_size=4, evolve_steps=100),
                               seed=1))
    check = names["evolution.dispersion_period"]
    assert check.passed
    assert "first nonzero DtN mode" in check.detail


@pytest.mark.slow
def test_commutator_bounds():
    names = _by_name(run_suite("commutator", "rectangle", seed=1))
    for key in ("commutator.sector_residual", "commutator.sector_monotone",
                "commutator.flat_residual", "commutator.flat_growth"):
        assert names[key].passed, names[key]
