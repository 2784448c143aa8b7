"""Named diagnostic suites: identities and inequalities run end to end.

Each suite returns a SuiteReport whose checks are sorted by name. A check
that raises is recorded with passed = False and the error as detail, so a
report is always complete.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from cornerwaves.config.settings import get_settings
from cornerwaves.core.errors import ConfigError
from cornerwaves.core.logger import log_error, log_event
from cornerwaves.dno.operator import dtn_apply, dtn_spectrum, spectrum_rows
from cornerwaves.evolution.integrator import CrankNicolson, discrete_cn_frequency, evolve, standing_mode_frequency
from cornerwaves.evolution.operators import apply_A, triple_norm, x_inner, x_norm
from cornerwaves.evolution.state import EvolveConfig, Forcing, WaveState
from cornerwaves.fem.assembly import assemble_line_mass
from cornerwaves.fem.solvers import dirichlet_energy, solve_mixed, solve_neumann
from cornerwaves.geometry.catalog import BUILTINS, builtin_domain, rectangle_dimensions
from cornerwaves.geometry.domain import DomainSpec
from cornerwaves.meshing.grading import GradingParams
from cornerwaves.meshing.generator import generate
from cornerwaves.problem import Problem, build_problem
from cornerwaves.traces.fields import TraceField
from cornerwaves.traces.seminorms import (
    ScreenedForm,
    component_average,
    derivative_l2,
    full_h_half_norm,
    l2_norm,
    seminorm_gammaD,
    seminorm_screened,
    weighted_mean,
    zero_mass_project,
)
from cornerwaves.traces.weight import commutator_apply, smooth_Keps
from cornerwaves.verify.contracts import CheckRecord, SuiteReport
from cornerwaves.verify.corner import corner_exponent_fit
from cornerwaves.verify.ensembles import (
    jacobi_trace_ensemble,
    jacobi_volume_ensemble,
    sample_streams,
    trig_samples,
    trig_trace_ensemble,
    trig_volume_ensemble,
)
from cornerwaves.verify.rellich import rellich_residual

SUITES = ("traces", "dno", "rellich", "evolution", "commutator", "corner")

REFINEMENT_DRIFT = 0.10
N1_DRIFT = 0.15
DTN_CONSTANT_CEILING = 10.0


class SuiteParams(BaseModel):
    """Mesh and ensemble controls shared by all suites."""
    h0: float = Field(default=0.05, gt=0, description="Base edge length; refinement studies also use h0/2")
    grading_exponent: float = Field(default=3.0, ge=1.0, le=4.0)
    rho0: Optional[float] = Field(default=None, gt=0)
    ensemble_size: int = Field(default=100, ge=2, description="Random fields per ensemble")
    modes: int = Field(default=5, ge=1, description="Eigenvalues compared with the rectangle oracle")
    evolve_steps: int = Field(default=1000, ge=10, description="Steps of the conservation runs")
    geometry_params: Dict[str, float] = Field(default_factory=dict, description="Built-in geometry keyword overrides")

    def grading(self, h0: Optional[float] = None, rho0: Optional[float] = None) -> GradingParams:
        return GradingParams(h0=h0 or self.h0, grading_exponent=self.grading_exponent, rho0=rho0)


@dataclass
class SuiteContext:
    """Shared state of one run_suite call: geometry, seed and a problem cache."""
    spec: DomainSpec
    params: SuiteParams
    seed: int
    threads: Optional[int] = None
    _problems: Dict[tuple, Problem] = field(default_factory=dict)

    def problem(self, spec: Optional[DomainSpec] = None, h0: Optional[float] = None,
                rho0: Optional[float] = None, grading_exponent: Optional[float] = None) -> Problem:
        # the user's rho0 belongs to the suite geometry; other geometries pick their own
        if spec is None:
            spec = self.spec
            rho0 = rho0 if rho0 is not None else self.params.rho0
        grading = self.params.grading(h0, rho0)
        if grading_exponent is not None:
            grading = grading.model_copy(update={"grading_exponent": grading_exponent})
        key = (spec.model_dump_json(), grading.model_dump_json())
        if key not in self._problems:
            self._problems[key] = build_problem(spec, grading, threads=self.threads)
        return self._problems[key]

    def builtin(self, name: str, **kw) -> DomainSpec:
        return builtin_domain(name, gravity=self.spec.gravity, **kw)


class _Recorder:
    """Collects checks; guard() turns exceptions into failed records."""

    def __init__(self, prefix: str):
        self.prefix = prefix
        self.checks: List[CheckRecord] = []
        self.tables: Dict[str, List[dict]] = {}

    def add(self, name: str, value: Optional[float], bound: Optional[float], passed: bool,
            detail: Optional[str] = None) -> None:
        value = None if value is None else float(value)
        if value is not None and not math.isfinite(value):
            passed = False
        self.checks.append(CheckRecord(name=f"{self.prefix}.{name}", value=value, bound=bound,
                                       passed=bool(passed), detail=detail))

    def at_most(self, name: str, value: float, bound: float, detail: Optional[str] = None) -> None:
        self.add(name, value, bound, value <= bound, detail)

    def at_least(self, name: str, value: float, bound: float, detail: Optional[str] = None) -> None:
        self.add(name, value, bound, value >= bound, detail)

    def finite(self, name: str, value: float, detail: Optional[str] = None) -> None:
        self.add(name, value, None, math.isfinite(value) and value > 0, detail)

    def guard(self, name: str, fn: Callable[[], None]) -> None:
        try:
            fn()
        except Exception as exc:
            log_error("verify", exc, {"check": f"{self.prefix}.{name}"})
            self.add(name, None, None, False, f"{type(exc).__name__}: {exc}")


def _drift(a: float, b: float) -> float:
    """Relative change from the coarse value a to the fine value b."""
    return abs(b - a) / max(abs(b), 1e-300)


def _component_l2(x: np.ndarray, values: np.ndarray) -> float:
    return math.sqrt(max(0.0, float(values @ (assemble_line_mass(x) @ values))))


# --------------------------------------------------------------------------- traces

def _poincare_constant(grid, fields, form: ScreenedForm) -> float:
    best = 0.0
    for f in fields:
        halves = form.component_values(f)
        for comp, part, half in zip(grid.components, f.parts(), halves):
            mean = component_average(f, comp.index, grid, window=comp.interval)
            if half > 0:
                best = max(best, _component_l2(comp.x, part - mean) / half)
    return best


def _screening_bracket(grid, fields) -> Tuple[float, float]:
    lo, hi = math.inf, 0.0
    radius = get_settings().screen_radius
    for comp_pos, comp in enumerate(grid.components):
        r = radius if comp.originally_unbounded else 0.25 * comp.length
        for f in fields:
            part = f.parts()[comp_pos]
            narrow = seminorm_screened(part, comp.x, r)
            if narrow > 0:
                ratio = seminorm_screened(part, comp.x, 2.0 * r) / narrow
                lo, hi = min(lo, ratio), max(hi, ratio)
    return lo, hi


def _traces_suite(ctx: SuiteContext, rec: _Recorder) -> None:
    p = ctx.params
    n = p.ensemble_size
    coarse = ctx.problem()
    fine = ctx.problem(h0=0.5 * p.h0)
    samples = trig_samples(ctx.seed, n, len(coarse.grid.components))

    def band_area():
        x = np.linspace(0.0, 2.0, 41)
        value = seminorm_screened(x, x, 1.0)
        rec.at_most("screened_band_area", abs(value - math.sqrt(3.0)) / math.sqrt(3.0), 1e-6,
                    f"value {value:.12g}, exact sqrt(3)")

    def projection():
        f = samples[0].evaluate(coarse.grid)
        once = zero_mass_project(f)
        twice = zero_mass_project(once)
        defect = max(float(np.abs(twice.values - once.values).max()), abs(weighted_mean(once)))
        rec.at_most("zero_mass_idempotent", defect, 1e-12)

    def poincare_and_screening():
        consts, brackets = [], []
        for prob in (coarse, fine):
            fields = [s.evaluate(prob.grid) for s in samples]
            consts.append(_poincare_constant(prob.grid, fields, ScreenedForm(prob.grid)))
            brackets.append(_screening_bracket(prob.grid, fields))
        rec.finite("poincare_constant", consts[1], f"coarse {consts[0]:.6g}, fine {consts[1]:.6g}")
        rec.at_most("poincare_refinement_drift", _drift(*consts), REFINEMENT_DRIFT)
        rec.at_least("screening_ratio_min", min(b[0] for b in brackets), 1.0 - 1e-12)
        rec.finite("screening_ratio_max", brackets[1][1])
        rec.at_most("screening_refinement_drift", _drift(brackets[0][1], brackets[1][1]), REFINEMENT_DRIFT,
                    f"C_eq coarse {brackets[0][1]:.6g}, fine {brackets[1][1]:.6g}")

    def full_norm():
        brackets = []
        for prob in (coarse, fine):
            form = ScreenedForm(prob.grid)
            ratios = []
            for s in samples:
                f = s.evaluate(prob.grid)
                ours = l2_norm(f, mass=prob.op.mass) + seminorm_gammaD(f, 0.5, form=form)
                ratios.append(ours / full_h_half_norm(f, mass=prob.op.mass))
            brackets.append((min(ratios), max(ratios)))
        rec.tables["traces.full_norm_bracket"] = [
            {"h0": h, "low": b[0], "high": b[1]} for h, b in zip((p.h0, 0.5 * p.h0), brackets)
        ]
        rec.finite("full_norm_ratio_low", brackets[1][0])
        rec.finite("full_norm_ratio_high", brackets[1][1])

    def trace_constant(prob: Problem, fields) -> float:
        form = ScreenedForm(prob.grid)
        best = 0.0
        for phi in fields:
            energy = dirichlet_energy(prob.system, phi)
            trace = TraceField(prob.grid, phi[prob.system.gamma])
            if energy > 0:
                best = max(best, seminorm_gammaD(trace, 0.5, form=form) / math.sqrt(energy))
        return best

    def trace_continuity():
        # ratios over nodal noise scale like h^1/2; only the smooth ensemble is drift-checked
        rough = [trace_constant(pr, jacobi_volume_ensemble(pr.system, ctx.seed, n, sweeps=1)) for pr in (coarse, fine)]
        worst = [trace_constant(pr, trig_volume_ensemble(pr.system, ctx.seed, n)) for pr in (coarse, fine)]
        rec.tables["traces.trace_constant"] = [
            {"h0": h, "smooth": c, "jacobi": r} for h, c, r in zip((p.h0, 0.5 * p.h0), worst, rough)
        ]
        rec.finite("trace_constant_jacobi", rough[1], f"coarse {rough[0]:.6g}, fine {rough[1]:.6g}")
        rec.finite("trace_constant", worst[1], f"coarse {worst[0]:.6g}, fine {worst[1]:.6g}")
        rec.at_most("trace_refinement_drift", _drift(*worst), REFINEMENT_DRIFT)

    def right_inverse():
        form = ScreenedForm(coarse.grid)
        exact, ratio = 0.0, 0.0
        for s in samples:
            psi = s.evaluate(coarse.grid)
            phi = solve_mixed(coarse.system, psi)
            exact = max(exact, float(np.abs(phi.trace(coarse.system) - psi.values).max()))
            half = seminorm_gammaD(psi, 0.5, form=form)
            if half > 0:
                ratio = max(ratio, dirichlet_energy(coarse.system, phi) / half ** 2)
        rec.at_most("extension_trace_exact", exact, 1e-12)
        rec.finite("extension_energy_constant", ratio)

    def windows():
        grid = coarse.grid
        form = ScreenedForm(grid)
        best = 0.0
        for s in samples:
            f = s.evaluate(grid)
            halves = form.component_values(f)
            for comp, half in zip(grid.components, halves):
                a, b = comp.interval
                mid = 0.5 * (a + b)
                gap = abs(component_average(f, comp.index, grid, (a, mid))
                          - component_average(f, comp.index, grid, (mid, b)))
                if half > 0:
                    best = max(best, gap / half)
        rec.finite("window_independence_constant", best)

    def smoother():
        w = coarse.weight
        fields = jacobi_trace_ensemble(coarse.grid, ctx.seed, min(n, 30))
        growth = max(l2_norm(smooth_Keps(f, 1e-2, w), mass=coarse.op.mass) / l2_norm(f, mass=coarse.op.mass)
                     for f in fields)
        rec.at_most("keps_non_expansive", growth, 1.0 + 1e-10)
        smooth = jacobi_trace_ensemble(coarse.grid, ctx.seed + 1, min(n, 30), sweeps=(8,))
        change = max(l2_norm(smooth_Keps(f, 1e-4, w) - f, mass=coarse.op.mass) / l2_norm(f, mass=coarse.op.mass)
                     for f in smooth)
        rec.at_most("keps_consistency", change, 1e-2, "eps = 1e-4, 8 Jacobi sweeps")

    for name, fn in (("band_area", band_area), ("projection", projection),
                     ("poincare_screening", poincare_and_screening), ("full_norm", full_norm),
                     ("trace_continuity", trace_continuity), ("right_inverse", right_inverse),
                     ("windows", windows), ("smoother", smoother)):
        rec.guard(name, fn)


# --------------------------------------------------------------------------- dno

def _dno_suite(ctx: SuiteContext, rec: _Recorder) -> None:
    p = ctx.params
    prob = ctx.problem()
    op = prob.op

    def structure():
        S = op.dense_schur()
        scale = float(np.abs(S).max())
        rec.at_most("symmetry", float(np.abs(S - S.T).max()) / scale, 1e-12)
        rec.at_most("constants_in_kernel", float(np.abs(S @ np.ones(op.n)).max()) / scale, 1e-10)
        lam0 = dtn_spectrum(op, 1)[0][0]
        rec.at_least("semidefinite", lam0, -1e-10 * scale)

    def spectrum():
        dims = rectangle_dimensions(prob.spec)
        if dims is None:
            rows = spectrum_rows(op, p.modes)
            rec.tables["dno.spectrum"] = rows
            rec.finite("first_nonzero_eigenvalue", rows[1]["lambda"] if len(rows) > 1 else float("nan"))
            return
        rows = spectrum_rows(op, p.modes, rectangle=dims)
        rec.tables["dno.spectrum"] = rows
        worst = max(r["rel_error"] for r in rows[1:])
        rec.at_most("spectrum_rel_error", worst, 0.01, "k tanh(k depth), first nonzero modes")

    def green_mean():
        for name in sorted(BUILTINS):
            spec = ctx.builtin(name)
            geo = ctx.problem(spec=spec, h0=max(p.h0, 0.1), rho0=None)
            worst = 0.0
            for psi in jacobi_trace_ensemble(geo.grid, ctx.seed, 100):
                worst = max(worst, abs(float(np.sum(geo.op.mass @ dtn_apply(geo.op, psi).values))))
            rec.at_most(f"green_mean[{name}]", worst, 1e-9)

    def neumann_roundtrip():
        psi = trig_samples(ctx.seed, 1, len(prob.grid.components))[0].evaluate(prob.grid)
        phi = solve_mixed(prob.system, psi)
        flux = dtn_apply(op, psi)
        back = solve_neumann(prob.system, None, flux)
        w = prob.system.area_vector
        centred = phi.values - (w @ phi.values) / w.sum()
        rec.at_most("neumann_roundtrip", float(np.abs(back.values - centred).max())
                    / max(float(np.abs(centred).max()), 1e-300), 1e-6)

    def equivalence():
        brackets = []
        for h in (p.h0, 0.5 * p.h0):
            pr = ctx.problem(h0=h)
            form = ScreenedForm(pr.grid)
            ratios = []
            for s in trig_samples(ctx.seed, p.ensemble_size, len(pr.grid.components)):
                psi = s.evaluate(pr.grid)
                half = seminorm_gammaD(psi, 0.5, form=form)
                if half > 0:
                    ratios.append(float(psi.values @ pr.op.apply_schur(psi.values)) / half ** 2)
            brackets.append((min(ratios), max(ratios)))
        rec.tables["dno.norm_equivalence"] = [
            {"h0": h, "low": b[0], "high": b[1]} for h, b in zip((p.h0, 0.5 * p.h0), brackets)
        ]
        rec.at_most("equivalence_low_drift", _drift(brackets[0][0], brackets[1][0]), REFINEMENT_DRIFT)
        rec.at_most("equivalence_high_drift", _drift(brackets[0][1], brackets[1][1]), REFINEMENT_DRIFT)

    def ellipticity_continuity():
        # |psi'| <= C (|psi|_1/2 + |G psi|) and |G psi| <= C |psi|_1
        worst = []
        for h in (p.h0, 0.5 * p.h0):
            pr = ctx.problem(h0=h)
            form = ScreenedForm(pr.grid)
            ell, cont = 0.0, 0.0
            for psi in trig_trace_ensemble(pr.grid, ctx.seed, p.ensemble_size, threads=ctx.threads):
                flux = l2_norm(dtn_apply(pr.op, psi), mass=pr.op.mass)
                lower = seminorm_gammaD(psi, 0.5, form=form) + flux
                upper = seminorm_gammaD(psi, 1)
                if lower > 0:
                    ell = max(ell, derivative_l2(psi) / lower)
                if upper > 0:
                    cont = max(cont, flux / upper)
            worst.append((ell, cont))
        hs = (p.h0, 0.5 * p.h0)
        rec.tables["dno.ellipticity"] = [{"h0": h, "constant": w[0]} for h, w in zip(hs, worst)]
        rec.tables["dno.continuity"] = [{"h0": h, "constant": w[1]} for h, w in zip(hs, worst)]
        for i, name in enumerate(("ellipticity", "continuity")):
            rec.at_most(f"{name}_constant", worst[1][i], DTN_CONSTANT_CEILING,
                        f"coarse {worst[0][i]:.6g}, fine {worst[1][i]:.6g}")
            rec.at_most(f"{name}_refinement_drift", _drift(worst[0][i], worst[1][i]), REFINEMENT_DRIFT)

    def dirichlet_principle():
        # the discrete harmonic extension minimises energy among fields with the same trace
        worst = -math.inf
        for phi in jacobi_volume_ensemble(prob.system, ctx.seed, min(p.ensemble_size, 30), sweeps=1):
            psi = phi[prob.system.gamma]
            energy = dirichlet_energy(prob.system, phi)
            if energy > 0:
                worst = max(worst, float(psi @ op.apply_schur(psi)) / energy - 1.0)
        rec.at_most("dirichlet_principle", worst, 1e-8, "max psi.S psi / E(phi) - 1")

    for name, fn in (("structure", structure), ("spectrum", spectrum), ("green_mean", green_mean),
                     ("neumann_roundtrip", neumann_roundtrip), ("equivalence", equivalence),
                     ("ellipticity_continuity", ellipticity_continuity),
                     ("dirichlet_principle", dirichlet_principle)):
        rec.guard(name, fn)


# --------------------------------------------------------------------------- rellich

def _rellich_suite(ctx: SuiteContext, rec: _Recorder) -> None:
    prob = ctx.problem()
    v = prob.mesh.vertices

    def affine():
        cases = (("z", v[:, 1], "-e_z"), ("x", v[:, 0], "e_x"), ("x+2z", v[:, 0] + 2.0 * v[:, 1], "position"))
        for label, phi, alpha in cases:
            rec.at_most(f"affine[{label},{alpha}]", rellich_residual(prob.system, phi, alpha), 1e-10)

    def convergence():
        rect = ctx.builtin("rectangle")
        residuals = []
        for h in (0.2, 0.1, 0.05):
            pr = ctx.problem(spec=rect, h0=h, rho0=None)
            phi = solve_mixed(pr.system, pr.grid.sample(np.cos))
            residuals.append(rellich_residual(pr.system, phi, "position"))
        rec.tables["rellich.cos_mode"] = [{"h0": h, "residual": r} for h, r in zip((0.2, 0.1, 0.05), residuals)]
        ratio = min(a / b for a, b in zip(residuals[:-1], residuals[1:]))
        rec.at_least("cos_mode_halving_ratio", ratio, 2.0, ", ".join(f"{r:.3e}" for r in residuals))

    rec.guard("affine", affine)
    rec.guard("convergence", convergence)


# --------------------------------------------------------------------------- evolution

def _period_from_modal_series(a: np.ndarray, dt: float) -> float:
    """Period of a_n = c cos(theta n) from the three-term recurrence."""
    num = float(np.sum(a[1:-1] * (a[2:] + a[:-2])))
    den = 2.0 * float(np.sum(a[1:-1] ** 2))
    theta = math.acos(max(-1.0, min(1.0, num / den)))
    return 2.0 * math.pi * dt / theta


def _modal_run(prob: Problem, psi0: TraceField, mode_vector: np.ndarray, dt: float, steps: int) -> np.ndarray:
    g = prob.gravity
    stepper = CrankNicolson(prob.op, g, dt)
    U = WaveState(TraceField.zeros(prob.grid), psi0)
    coeffs = [float(mode_vector @ (prob.op.mass @ U.psi.values))]
    for _ in range(steps):
        U = stepper.step(U)
        coeffs.append(float(mode_vector @ (prob.op.mass @ U.psi.values)))
    return np.asarray(coeffs)


def _evolution_suite(ctx: SuiteContext, rec: _Recorder) -> None:
    p = ctx.params
    prob = ctx.problem()
    op, g = prob.op, prob.gravity

    def skew():
        streams = sample_streams(ctx.seed, 4)
        fields = [jacobi_trace_ensemble(prob.grid, int(r.integers(2 ** 31)), 50, sweeps=(2,)) for r in streams]
        worst = 0.0
        for zu, pu, zv, pv in zip(*fields):
            U, V = WaveState(zu, pu), WaveState(zv, pv)
            defect = abs(x_inner(op, g, apply_A(op, g, U), V) + x_inner(op, g, U, apply_A(op, g, V)))
            worst = max(worst, defect / (x_norm(op, g, U) * x_norm(op, g, V)))
        rec.at_most("skew_adjoint", worst, 1e-11)

    def conservation():
        omega = standing_mode_frequency(op, g)
        dt = 2.0 * math.pi / omega / 100.0
        U0 = WaveState(TraceField.zeros(prob.grid), TraceField.from_function(prob.grid, np.cos))
        cfg = EvolveConfig(dt=dt, steps=p.evolve_steps, snapshot_every=max(1, p.evolve_steps // 20),
                           monitor_orders=0)
        traj = evolve(op, g, U0, None, cfg)
        rec.at_most("energy_drift", traj.relative_energy_drift(), 1e-8, f"{p.evolve_steps} steps, dt = T/100")
        base = triple_norm(op, g, traj.snapshots[0], 1)
        growth = max(triple_norm(op, g, U, 1) for U in traj.snapshots) / base
        rec.at_most("time_regularity_n1", growth, 1.0 + 1e-4)

    def dispersion():
        lam, vec = dtn_spectrum(op, 2)[1]
        omega_h = math.sqrt(g * lam)
        dims = rectangle_dimensions(prob.spec)
        if dims is not None:
            length, depth = dims
            k = math.pi / length
            period = 2.0 * math.pi / math.sqrt(g * k * math.tanh(k * depth))
            psi0 = TraceField.from_function(prob.grid, lambda x: np.cos(k * (x - prob.grid.components[0].x[0])))
            source = "k tanh(k depth)"
        else:
            # no closed form: the oracle is the first nonzero DtN eigenpair itself
            period = 2.0 * math.pi / omega_h
            psi0 = TraceField(prob.grid, vec.copy())
            source = "first nonzero DtN mode"
        series = _modal_run(prob, psi0, vec, period / 2000.0, 2000)
        measured = _period_from_modal_series(series, period / 2000.0)
        rec.at_most("dispersion_period", abs(measured - period) / period, 0.005,
                    f"measured {measured:.8g}, oracle {period:.8g} ({source})")
        envelope = float(np.abs(series).max() / abs(series[0]))
        rec.at_most("standing_mode_amplitude", abs(envelope - 1.0), 0.01)
        errors, predicted = [], []
        for steps_per_period in (50, 100):
            dt = period / steps_per_period
            T_h = _period_from_modal_series(_modal_run(prob, psi0, vec, dt, steps_per_period), dt)
            errors.append(abs(T_h - 2.0 * math.pi / omega_h))
            predicted.append(abs(2.0 * math.pi / discrete_cn_frequency(omega_h, dt) - 2.0 * math.pi / omega_h))
        rec.at_least("dispersion_dt_order", errors[0] / errors[1], 3.5,
                     f"predicted ratio {predicted[0] / predicted[1]:.4g}")

    def zero_mass():
        two = ctx.problem(spec=ctx.builtin("two-object"), h0=max(p.h0, 0.1), rho0=None)
        s1, s2 = trig_samples(ctx.seed, 2, len(two.grid.components))
        U0 = WaveState(zero_mass_project(s1.evaluate(two.grid)), zero_mass_project(s2.evaluate(two.grid)))
        cfg = EvolveConfig(dt=0.01, steps=p.evolve_steps, zero_mass_mode=True, monitor_orders=0)
        traj = evolve(two.op, two.gravity, U0, None, cfg)
        worst = max(float(np.abs(traj.column("mass_zeta")).max()), float(np.abs(traj.column("mass_psi")).max()))
        rec.at_most("zero_mass[two-object]", worst, 1e-10)

    def duhamel():
        grid = prob.grid
        shape1 = grid.sample(lambda x: np.cos(x))
        shape2 = grid.sample(lambda x: np.sin(2.0 * x))
        forcing = Forcing(f=lambda t: math.sin(t) * shape1, g_src=lambda t: math.cos(2.0 * t) * shape2)
        cfg = EvolveConfig(dt=0.02, steps=200, monitor_orders=0)
        traj = evolve(op, g, WaveState.zeros(grid), forcing, cfg)
        slack = float(np.max(traj.column("x_norm") - traj.column("bound")))
        rec.add("duhamel_bound", slack, 0.0, traj.bound_ok, "max |U(t)|_X - int |F|_X")

    def weighted_norm():
        one = ctx.builtin("one-object")
        ratios = []
        for h in (p.h0, 0.5 * p.h0):
            pr = ctx.problem(spec=one, h0=h, rho0=None)
            s = trig_samples(ctx.seed, 1, len(pr.grid.components))[0]
            psi0 = zero_mass_project(s.evaluate(pr.grid))
            omega = standing_mode_frequency(pr.op, pr.gravity)
            period = 2.0 * math.pi / omega
            cfg = EvolveConfig(dt=period / 200, steps=200, monitor_orders=1)
            traj = evolve(pr.op, pr.gravity, WaveState(TraceField.zeros(pr.grid), psi0), None, cfg, pr.weight)
            n1 = traj.column("N1")
            ratios.append(float(n1.max() / n1[0]))
        rec.finite("n1_growth", ratios[1], f"coarse {ratios[0]:.6g}, fine {ratios[1]:.6g}")
        rec.at_most("n1_refinement_drift", _drift(*ratios), N1_DRIFT)

    for name, fn in (("skew", skew), ("conservation", conservation), ("dispersion", dispersion),
                     ("zero_mass", zero_mass), ("duhamel", duhamel), ("weighted_norm", weighted_norm)):
        rec.guard(name, fn)


# --------------------------------------------------------------------------- commutator

def _restricted_l2(grid, values: np.ndarray, lo: float, hi: float) -> float:
    total = 0.0
    for comp, part in zip(grid.components, grid.split(values)):
        sel = (comp.x >= lo - 1e-12) & (comp.x <= hi + 1e-12)
        if sel.sum() >= 2:
            total += _component_l2(comp.x[sel], part[sel]) ** 2
    return math.sqrt(total)


def _bump(centre: float, half_width: float, power: int) -> Callable[[np.ndarray], np.ndarray]:
    def fn(x):
        s = (np.asarray(x, dtype=float) - centre) / half_width
        return np.where(np.abs(s) < 1.0, (1.0 - s ** 2) ** power, 0.0)
    return fn


def _commutator_suite(ctx: SuiteContext, rec: _Recorder) -> None:
    levels = (0.1, 0.05, 0.025)

    def sector():
        spec = ctx.builtin("sector", omega=0.5 * math.pi, radius=4.0)
        rho0 = 1.0
        residuals = []
        for h in levels:
            pr = ctx.problem(spec=spec, h0=h, rho0=rho0)
            psi = TraceField.from_function(pr.grid, _bump(0.0, 0.3, 2))
            g0 = dtn_apply(pr.op, psi)
            comm = commutator_apply(pr.op, pr.weight, 1, psi)
            # [G0, rho d/dx] = -[(rho d/dx), G0]
            defect = -comm - g0
            residuals.append(_restricted_l2(pr.grid, defect.values, 0.0, 0.5 * rho0)
                             / _restricted_l2(pr.grid, g0.values, 0.0, 0.5 * rho0))
        rec.tables["commutator.sector"] = [{"h0": h, "residual": r} for h, r in zip(levels, residuals)]
        rec.at_most("sector_residual", residuals[-1], 0.05)
        rec.add("sector_monotone", max(b / a for a, b in zip(residuals[:-1], residuals[1:])), 1.0,
                all(b < a for a, b in zip(residuals[:-1], residuals[1:])))

    def flat():
        spec = ctx.builtin("rectangle")
        rho0 = 0.25
        residuals = []
        lo, hi = 1.5 * rho0, math.pi - 1.5 * rho0
        for h in levels:
            pr = ctx.problem(spec=spec, h0=h, rho0=rho0)
            bump = _bump(0.5 * math.pi, 0.37, 3)
            psi = TraceField.from_function(pr.grid, bump)
            comm = commutator_apply(pr.op, pr.weight, 1, psi)
            dpsi = TraceField.from_function(pr.grid, lambda x: -6.0 * ((x - 0.5 * math.pi) / 0.37 ** 2)
                                            * np.clip(1.0 - ((x - 0.5 * math.pi) / 0.37) ** 2, 0.0, None) ** 2)
            scale = _restricted_l2(pr.grid, rho0 * dtn_apply(pr.op, dpsi).values, lo, hi)
            residuals.append(_restricted_l2(pr.grid, comm.values, lo, hi) / scale)
        rec.tables["commutator.flat"] = [{"h0": h, "residual": r} for h, r in zip(levels, residuals)]
        rec.at_most("flat_residual", residuals[-1], 0.1)
        rec.at_most("flat_growth", max(b / a for a, b in zip(residuals[:-1], residuals[1:])), 1.1)

    rec.guard("sector", sector)
    rec.guard("flat", flat)


# --------------------------------------------------------------------------- corner

CORNER_ANGLES = (0.5 * math.pi, 2.0 * math.pi / 3.0, 0.75 * math.pi)


def _corner_suite(ctx: SuiteContext, rec: _Recorder) -> None:
    if ctx.spec.name == "sector" and "omega" in ctx.params.geometry_params:
        angles = (float(ctx.params.geometry_params["omega"]),)
    else:
        angles = CORNER_ANGLES
    grading = GradingParams(h0=0.02, grading_exponent=3.0, rho0=0.1)
    rows = []

    def fit(omega: float):
        spec = ctx.builtin("sector", omega=omega, radius=1.0)
        mesh = generate(spec, grading)
        result = corner_exponent_fit(spec, mesh, lambda x: np.cos(0.5 * math.pi * x), grading)
        rows.append({"omega": omega, "nu": result.nu, "target": result.target,
                     "rel_error": result.relative_error})
        rec.at_most(f"exponent[omega={omega:.6f}]", result.relative_error, 0.05,
                    f"fitted {result.nu:.5f}, target {result.target:.5f}")

    for omega in angles:
        rec.guard(f"exponent[omega={omega:.6f}]", lambda omega=omega: fit(omega))
    rec.tables["corner.fits"] = rows


_RUNNERS: Dict[str, Callable[[SuiteContext, _Recorder], None]] = {
    "traces": _traces_suite,
    "dno": _dno_suite,
    "rellich": _rellich_suite,
    "evolution": _evolution_suite,
    "commutator": _commutator_suite,
    "corner": _corner_suite,
}


def run_suite(name: str, geometry: Union[str, DomainSpec] = "rectangle", params: Optional[SuiteParams] = None,
              seed: int = 0, threads: Optional[int] = None) -> SuiteReport:
    """Run one named suite (or 'all') and return its sorted report."""
    if name != "all" and name not in _RUNNERS:
        raise ConfigError(f"unknown suite '{name}' (known: {', '.join(SUITES)}, all)")
    params = params or SuiteParams()
    spec = builtin_domain(geometry, **params.geometry_params) if isinstance(geometry, str) else geometry
    ctx = SuiteContext(spec=spec, params=params, seed=seed, threads=threads)

    names = SUITES if name == "all" else (name,)
    report = SuiteReport(suite=name, geometry=spec.name, seed=seed)
    try:
        base = ctx.params.grading().resolve(spec)
        report.mesh_params = {"h0": base.h0, "grading_exponent": base.grading_exponent,
                              "rho0": base.rho0, "h_min": base.h_min}
    except Exception as exc:
        log_error("verify", exc, {"suite": name, "stage": "resolve"})

    for suite in names:
        rec = _Recorder(suite)
        log_event("verify", "suite_started", {"suite": suite, "geometry": spec.name, "seed": seed})
        _RUNNERS[suite](ctx, rec)
        part = SuiteReport(suite=suite, geometry=spec.name, seed=seed, checks=rec.checks, tables=rec.tables)
        report = report.merged(part)
        log_event("verify", "suite_finished", {
            "suite": suite, "checks": len(rec.checks), "failed": sum(not c.passed for c in rec.checks),
        })
    return report.sorted()
