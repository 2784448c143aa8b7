"""CSV and JSON artifacts plus rich console rendering.

CSV files may start with one `# generated <UTC time>` line; everything after
it is deterministic given the inputs, so re-runs with timestamp=False are
byte-identical.
"""
import csv
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from rich.console import Console
from rich.table import Table

from cornerwaves.core.errors import ConfigError, DimensionError
from cornerwaves.evolution.integrator import TRAJECTORY_COLUMNS, Trajectory
from cornerwaves.evolution.state import WaveState
from cornerwaves.meshing.mesh import Mesh
from cornerwaves.verify.contracts import SuiteReport

SPECTRUM_COLUMNS = ["index", "lambda", "analytic_lambda", "rel_error"]
FIELD_COLUMNS = ["vertex", "x", "z", "value"]
SNAPSHOT_COLUMNS = ["node", "component", "x", "zeta", "psi"]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return "" if np.isnan(value) else f"{float(value):.17g}"
    return str(value)


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[Any]],
              timestamp: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        if timestamp:
            fh.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def read_csv(path: str | Path) -> List[Dict[str, str]]:
    """Rows of a CSV written by write_csv, skipping the timestamp line."""
    with Path(path).open(encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


def write_json(path: str | Path, data: BaseModel | Dict[str, Any] | List[Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, BaseModel):
        text = data.model_dump_json(indent=2)
    else:
        text = json.dumps(data, indent=2, default=float)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def export_field_csv(mesh: Mesh, values: np.ndarray, path: str | Path, timestamp: bool = True) -> Path:
    """One row per mesh vertex: index, coordinates, nodal value."""
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != mesh.n_vertices:
        raise DimensionError(f"field has {values.shape[0]} values, mesh has {mesh.n_vertices} vertices")
    rows = ((i, x, z, v) for i, ((x, z), v) in enumerate(zip(mesh.vertices, values)))
    return write_csv(path, FIELD_COLUMNS, rows, timestamp)


def write_spectrum_csv(rows: List[dict], path: str | Path, timestamp: bool = True) -> Path:
    return write_csv(path, SPECTRUM_COLUMNS,
                     ([r["index"], r["lambda"], r["analytic_lambda"], r["rel_error"]] for r in rows), timestamp)


def write_trajectory_csv(traj: Trajectory, path: str | Path, timestamp: bool = True) -> Path:
    return write_csv(path, TRAJECTORY_COLUMNS,
                     ([row[c] for c in TRAJECTORY_COLUMNS] for row in traj.rows), timestamp)


def write_snapshot_csv(U: WaveState, path: str | Path, timestamp: bool = True) -> Path:
    """Trace state aligned with the mesh: global node id, component, abscissa, zeta, psi."""
    grid = U.grid
    components = np.concatenate([np.full(c.size, c.index) for c in grid.components])
    rows = zip(grid.node_ids, components, grid.x, U.zeta.values, U.psi.values)
    return write_csv(path, SNAPSHOT_COLUMNS, rows, timestamp)


def read_report(path: str | Path) -> SuiteReport:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"report file '{path}' does not exist")
    try:
        return SuiteReport.model_validate_json(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ConfigError(f"{path}: not a suite report: {exc}") from exc


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4g}"


def render_report(report: SuiteReport, console: Optional[Console] = None) -> None:
    console = console or Console()
    table = Table(title=f"{report.suite} on {report.geometry} (seed {report.seed})")
    table.add_column("check")
    table.add_column("value", justify="right")
    table.add_column("bound", justify="right")
    table.add_column("status")
    table.add_column("detail", overflow="fold")
    for check in report.checks:
        status = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
        table.add_row(check.name, _fmt(check.value), _fmt(check.bound), status, check.detail or "")
    console.print(table)
    failed = len(report.failures)
    summary = f"{len(report.checks) - failed}/{len(report.checks)} checks passed"
    console.print(f"[red]{summary}[/red]" if failed else f"[green]{summary}[/green]")


def render_rows(title: str, rows: List[dict], console: Optional[Console] = None) -> None:
    """Generic table for spectra and semi-norm reports."""
    console = console or Console()
    table = Table(title=title)
    if not rows:
        console.print(table)
        return
    for key in rows[0]:
        table.add_column(str(key), justify="right")
    for row in rows:
        table.add_row(*(_fmt(v) if isinstance(v, float) or v is None else str(v) for v in row.values()))
    console.print(table)
