"""Command-line entry point: mesh, dn, evolve, verify, report."""
import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError
from rich.console import Console

from cornerwaves.config.settings import get_settings, override_settings
from cornerwaves.core.errors import ConfigError, CornerWavesError, GeometryError
from cornerwaves.core.logger import log_error, log_event
from cornerwaves.dno.operator import dtn_spectrum, spectrum_rows
from cornerwaves.evolution.integrator import evolve
from cornerwaves.evolution.state import EvolveConfig, WaveState
from cornerwaves.fem.solvers import solve_mixed
from cornerwaves.geometry.catalog import rectangle_dimensions
from cornerwaves.geometry.domain import DomainSpec
from cornerwaves.ingest.geometry_loader import domain_schema_help, load_domain
from cornerwaves.meshing.generator import generate
from cornerwaves.meshing.grading import GradingParams
from cornerwaves.meshing.mesh import mesh_quality
from cornerwaves.meshing.mesh_io import dump_mesh
from cornerwaves.outputs.writers import (
    export_field_csv,
    read_report,
    render_report,
    render_rows,
    write_json,
    write_snapshot_csv,
    write_spectrum_csv,
    write_trajectory_csv,
)
from cornerwaves.problem import Problem, build_problem
from cornerwaves.traces.fields import TraceField
from cornerwaves.traces.seminorms import trace_report, zero_mass_project
from cornerwaves.verify.contracts import SuiteReport
from cornerwaves.verify.ensembles import trig_samples
from cornerwaves.verify.suites import SUITES, SuiteParams, run_suite

from cornerwaves import __version__ as VERSION

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

_console = Console()


class RunConfig(BaseModel):
    """Everything one invocation needs; loaded from --config and overridden by flags."""
    geometry: Union[str, Dict[str, Any]] = Field(default="rectangle", description="Built-in id, file path, inline JSON or document")
    geometry_params: Dict[str, float] = Field(default_factory=dict, description="Built-in geometry keyword overrides")
    h0: float = Field(default=0.05, gt=0)
    grading_exponent: float = Field(default=3.0, ge=1.0, le=4.0)
    rho0: Optional[float] = Field(default=None, gt=0)
    modes: int = Field(default=5, ge=1)
    dt: float = Field(default=0.01, gt=0)
    steps: int = Field(default=1000, ge=1)
    snapshot_every: int = Field(default=0, ge=0)
    initial: Literal["mode", "cos", "random"] = Field(default="mode", description="Initial surface data for evolve")
    zero_mass: bool = False
    suite: str = Field(default="all")
    ensemble_size: int = Field(default=100, ge=2)
    field: Literal["cos", "sin", "x", "mode", "random"] = Field(default="cos", description="Trace field for 'report'")
    out: Optional[str] = None
    seed: Optional[int] = None
    threads: Optional[int] = Field(default=None, ge=1)
    timestamp: bool = True

    def grading(self) -> GradingParams:
        return GradingParams(h0=self.h0, grading_exponent=self.grading_exponent, rho0=self.rho0)


def _key_value(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got '{text}'")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter '{key}' needs a numeric value, got '{value}'")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="RunConfig JSON file; flags override its values")
    common.add_argument("--geometry", help="built-in id, JSON file or inline JSON")
    common.add_argument("--param", dest="geometry_params", action="append", type=_key_value, metavar="KEY=VALUE",
                        help="built-in geometry parameter (repeatable), e.g. omega=1.5708")
    common.add_argument("--h0", type=float, help="base mesh size")
    common.add_argument("--beta", dest="grading_exponent", type=float, help="grading exponent in [1, 4]")
    common.add_argument("--rho0", type=float, help="corner-region radius")
    common.add_argument("--out", help="output directory (default: $CORNER_WAVES_OUT)")
    common.add_argument("--threads", type=int, help="worker threads (default: hardware count)")
    common.add_argument("--seed", type=int, help="master seed of random ensembles")
    common.add_argument("--no-timestamp", dest="timestamp", action="store_const", const=False,
                        help="omit the '# generated' line from CSV outputs")
    common.add_argument("--verbose", action="store_const", const=True, help="echo events to stderr")

    parser = argparse.ArgumentParser(
        prog="corner-waves",
        description="Finite-element study of linear surface waves on corner domains.",
        epilog=domain_schema_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("mesh", parents=[common], help="generate and write a graded mesh")

    dn = sub.add_parser("dn", parents=[common], help="DtN spectrum to CSV")
    dn.add_argument("--modes", type=int, help="nonzero eigenvalues to report")

    ev = sub.add_parser("evolve", parents=[common], help="time-step the surface system")
    ev.add_argument("--dt", type=float)
    ev.add_argument("--steps", type=int)
    ev.add_argument("--snapshot-every", dest="snapshot_every", type=int, help="write the state every k steps")
    ev.add_argument("--initial", choices=["mode", "cos", "random"])
    ev.add_argument("--zero-mass", dest="zero_mass", action="store_const", const=True)

    ver = sub.add_parser("verify", parents=[common], help="run diagnostic suites")
    ver.add_argument("--suite", choices=list(SUITES) + ["all"])
    ver.add_argument("--ensemble-size", dest="ensemble_size", type=int)
    ver.add_argument("--modes", type=int)
    ver.add_argument("--steps", type=int, help="steps of the conservation runs")

    rep = sub.add_parser("report", parents=[common], help="render a suite report or a trace semi-norm report")
    rep.add_argument("--input", help="suite report JSON to render")
    rep.add_argument("--field", choices=["cos", "sin", "x", "mode", "random"])
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Config file values, then every flag that was given."""
    data: Dict[str, Any] = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file '{path}' does not exist")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k in RunConfig.model_fields}
    if "geometry_params" in flags:
        flags["geometry_params"] = {**data.get("geometry_params", {}), **dict(flags["geometry_params"])}
    try:
        return RunConfig.model_validate({**data, **flags})
    except ValidationError as exc:
        raise ConfigError(f"invalid run configuration: {exc}") from exc


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out or get_settings().out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _geometry(cfg: RunConfig) -> DomainSpec:
    return load_domain(cfg.geometry, **cfg.geometry_params)


def _problem(cfg: RunConfig) -> Problem:
    return build_problem(_geometry(cfg), cfg.grading(), threads=cfg.threads)


def _trace_field(problem: Problem, kind: str, seed: int) -> TraceField:
    grid = problem.grid
    if kind == "cos":
        return TraceField.from_function(grid, np.cos)
    if kind == "sin":
        return TraceField.from_function(grid, np.sin)
    if kind == "x":
        return TraceField(grid, grid.x.copy())
    if kind == "mode":
        _, vec = dtn_spectrum(problem.op, 2)[1]
        return TraceField(grid, vec / np.abs(vec).max())
    return trig_samples(seed, 1, len(grid.components))[0].evaluate(grid)


# --------------------------------------------------------------------------- commands

def cmd_mesh(cfg: RunConfig) -> int:
    spec = _geometry(cfg)
    params = cfg.grading().resolve(spec)
    mesh = generate(spec, params)
    out = _out_dir(cfg)
    dump_mesh(mesh, out / "mesh.txt")
    quality = mesh_quality(mesh)
    write_json(out / "mesh_quality.json", {"geometry": spec.name, **params.model_dump(), **quality})
    render_rows(f"mesh of {spec.name}", [quality], _console)
    return EXIT_OK


def cmd_dn(cfg: RunConfig) -> int:
    problem = _problem(cfg)
    rows = spectrum_rows(problem.op, cfg.modes, rectangle=rectangle_dimensions(problem.spec))
    write_spectrum_csv(rows, _out_dir(cfg) / "spectrum.csv", cfg.timestamp)
    render_rows(f"DtN spectrum on {problem.spec.name}", rows, _console)
    return EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    problem = _problem(cfg)
    psi0 = _trace_field(problem, cfg.initial, cfg.seed or 0)
    if cfg.zero_mass:
        psi0 = zero_mass_project(psi0)
    U0 = WaveState(TraceField.zeros(problem.grid), psi0)
    evolve_cfg = EvolveConfig(dt=cfg.dt, steps=cfg.steps, zero_mass_mode=cfg.zero_mass,
                              snapshot_every=cfg.snapshot_every, monitor_orders=2)
    traj = evolve(problem.op, problem.gravity, U0, None, evolve_cfg, problem.weight)

    out = _out_dir(cfg)
    write_trajectory_csv(traj, out / "trajectory.csv", cfg.timestamp)
    for k, U in enumerate(traj.snapshots):
        write_snapshot_csv(U, out / f"snapshot_{k * cfg.snapshot_every:06d}.csv", cfg.timestamp)
    final = solve_mixed(problem.system, traj.final.psi)
    export_field_csv(problem.mesh, final.values, out / "potential_final.csv", cfg.timestamp)
    _console.print(f"{cfg.steps} steps, relative energy drift {traj.relative_energy_drift():.3e}, "
                   f"bound {'held' if traj.bound_ok else 'VIOLATED'}")
    return EXIT_OK if traj.bound_ok else EXIT_FAILED


def cmd_verify(cfg: RunConfig, run_id: Optional[int] = None) -> int:
    if cfg.seed is None:
        raise ConfigError("verify needs --seed")
    params = SuiteParams(h0=cfg.h0, grading_exponent=cfg.grading_exponent, rho0=cfg.rho0,
                         ensemble_size=cfg.ensemble_size, modes=cfg.modes, evolve_steps=max(cfg.steps, 10),
                         geometry_params=cfg.geometry_params)
    report = run_suite(cfg.suite, _geometry(cfg), params, seed=cfg.seed, threads=cfg.threads)
    write_json(_out_dir(cfg) / f"report_{cfg.suite}.json", report)
    render_report(report, _console)
    _store_checks(report, run_id)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_report(cfg: RunConfig, input_path: Optional[str]) -> int:
    if input_path:
        report = read_report(input_path)
        render_report(report, _console)
        return EXIT_OK if report.passed else EXIT_FAILED
    problem = _problem(cfg)
    field = _trace_field(problem, cfg.field, cfg.seed or 0)
    rows = trace_report(field)
    write_json(_out_dir(cfg) / f"seminorms_{cfg.field}.json", rows)
    render_rows(f"trace semi-norms of '{cfg.field}' on {problem.spec.name}", rows, _console)
    return EXIT_OK


# --------------------------------------------------------------------------- run ledger

def _start_run(command: str, cfg: RunConfig) -> Optional[int]:
    if not get_settings().enable_database:
        return None
    from cornerwaves.storage.db import get_db_sync, init_db
    from cornerwaves.storage.models import Run

    try:
        init_db()
        db = get_db_sync()
        try:
            run = Run(started_at=datetime.now(timezone.utc), command=command, seed=cfg.seed,
                      config_json=cfg.model_dump_json())
            db.add(run)
            db.commit()
            return run.id
        except Exception as e:
            db.rollback()
            log_error("cli", e, {"action": "start_run"})
            return None
        finally:
            db.close()
    except Exception as e:
        log_error("cli", e, {"action": "init_database"})
        return None


def _end_run(run_id: Optional[int], exit_code: int) -> None:
    if run_id is None:
        return
    from cornerwaves.storage.db import get_db_sync
    from cornerwaves.storage.models import Run

    db = get_db_sync()
    try:
        run = db.get(Run, run_id)
        if run:
            run.ended_at = datetime.now(timezone.utc)
            run.exit_code = exit_code
            db.commit()
    except Exception as e:
        db.rollback()
        log_error("cli", e, {"action": "end_run"})
    finally:
        db.close()


def _store_checks(report: SuiteReport, run_id: Optional[int]) -> None:
    if run_id is None:
        return
    from cornerwaves.storage.db import get_db_sync
    from cornerwaves.storage.models import CheckResult

    db = get_db_sync()
    try:
        for check in report.checks:
            db.add(CheckResult(run_id=run_id, suite=check.name.split(".", 1)[0], name=check.name,
                               value=check.value, bound=None if check.bound is None else repr(check.bound),
                               passed=check.passed))
        db.commit()
    except Exception as e:
        db.rollback()
        log_error("cli", e, {"action": "store_checks"})
    finally:
        db.close()


# --------------------------------------------------------------------------- entry

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            print(domain_schema_help(), file=sys.stderr)
            return EXIT_USAGE
        return EXIT_OK

    run_id = None
    code = EXIT_USAGE
    try:
        cfg = load_run_config(args)
        override_settings(out=cfg.out, threads=cfg.threads, verbose=getattr(args, "verbose", None))
        run_id = _start_run(args.command, cfg)
        log_event("cli", "command_started", {"command": args.command, "geometry": str(cfg.geometry)[:200],
                                             "seed": cfg.seed, "version": VERSION})
        if args.command == "mesh":
            code = cmd_mesh(cfg)
        elif args.command == "dn":
            code = cmd_dn(cfg)
        elif args.command == "evolve":
            code = cmd_evolve(cfg)
        elif args.command == "verify":
            code = cmd_verify(cfg, run_id)
        else:
            code = cmd_report(cfg, args.input)
    except (ConfigError, GeometryError) as e:
        log_error("cli", e, {"command": args.command})
        print(f"error: {e}\n\n{domain_schema_help()}", file=sys.stderr)
        code = EXIT_USAGE
    except CornerWavesError as e:
        log_error("cli", e, {"command": args.command})
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_FAILED
    except ValueError as e:
        # numerics rejecting an input (e.g. an eps or commutator order) mid-command
        log_error("cli", e, {"command": args.command})
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_FAILED
    finally:
        _end_run(run_id, code)
    log_event("cli", "command_finished", {"command": args.command, "exit_code": code})
    return code


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
