import json

import numpy as np
import pytest
from rich.console import Console

from cornerwaves.core.errors import ConfigError, DimensionError
from cornerwaves.evolution.integrator import TRAJECTORY_COLUMNS, Trajectory
from cornerwaves.evolution.state import WaveState
from cornerwaves.outputs.writers import (
    SNAPSHOT_COLUMNS,
    export_field_csv,
    read_csv,
    read_report,
    render_report,
    render_rows,
    write_csv,
    write_json,
    write_snapshot_csv,
    write_spectrum_csv,
    write_trajectory_csv,
)
from cornerwaves.traces.fields import TraceField
from cornerwaves.verify.contracts import CheckRecord, SuiteReport


def test_timestamp_line_is_optional(tmp_path):
    stamped = write_csv(tmp_path / "a.csv", ["x"], [[1.0]])
    plain = write_csv(tmp_path / "b.csv", ["x"], [[1.0]], timestamp=False)
    assert stamped.read_text().startswith("# generated ")
    assert plain.read_text() == "x\n1\n"
    assert read_csv(stamped) == read_csv(plain) == [{"x": "1"}]


def test_floats_keep_full_precision(tmp_path):
    value = 0.1 + 0.2
    path = write_csv(tmp_path / "p.csv", ["v", "missing"], [[value, None]], timestamp=False)
    row = read_csv(path)[0]
    assert float(row["v"]) == value
    assert row["missing"] == ""


def test_reruns_are_byte_identical(tmp_path):
    rows = [{"index": 0, "lambda": 0.0, "analytic_lambda": 0.0, "rel_error": None},
            {"index": 1, "lambda": 0.7615941559557649, "analytic_lambda": 0.7615941559557649, "rel_error": 0.0}]
    a = write_spectrum_csv(rows, tmp_path / "a.csv", timestamp=False)
    b = write_spectrum_csv(rows, tmp_path / "b.csv", timestamp=False)
    assert a.read_bytes() == b.read_bytes()


def test_field_export_checks_size(rectangle_problem, tmp_path):
    mesh = rectangle_problem.mesh
    with pytest.raises(DimensionError):
        export_field_csv(mesh, np.zeros(3), tmp_path / "f.csv")
    path = export_field_csv(mesh, mesh.vertices[:, 0], tmp_path / "f.csv")
    rows = read_csv(path)
    assert len(rows) == mesh.n_vertices
    assert float(rows[5]["value"]) == float(rows[5]["x"])


def test_snapshot_and_trajectory(unit_grid, tmp_path):
    U = WaveState(TraceField.from_function(unit_grid, np.sin), TraceField.constant(unit_grid, 2.0), t=0.5)
    rows = read_csv(write_snapshot_csv(U, tmp_path / "s.csv"))
    assert list(rows[0]) == SNAPSHOT_COLUMNS
    assert {r["component"] for r in rows} == {"1", "2"}
    traj = Trajectory(rows=[{c: float(k) for c in TRAJECTORY_COLUMNS} for k in range(3)])
    traj.rows[0]["N2"] = None
    out = read_csv(write_trajectory_csv(traj, tmp_path / "t.csv"))
    assert [r["step"] for r in out] == ["0", "1", "2"]
    assert out[0]["N2"] == ""


def test_report_json_round_trip(tmp_path):
    report = SuiteReport(suite="dno", geometry="rectangle", seed=4,
                         checks=[CheckRecord(name="dno.symmetry", value=1e-15, bound=1e-12, passed=True)])
    path = write_json(tmp_path / "r.json", report)
    assert read_report(path) == report
    write_json(tmp_path / "rows.json", [{"a": np.float64(1.5)}])
    assert json.loads((tmp_path / "rows.json").read_text()) == [{"a": 1.5}]


def test_read_report_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_report(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{}", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_report(bad)


def test_rendering_marks_failures():
    console = Console(record=True, width=120)
    report = SuiteReport(suite="traces", geometry="sector", seed=1, checks=[
        CheckRecord(name="traces.a", value=1.0, bound=2.0, passed=True),
        CheckRecord(name="traces.b", value=None, passed=False, detail="ValueError: nope"),
    ])
    render_report(report, console)
    render_rows("rows", [{"k": 1, "v": 0.5}], console)
    text = console.export_text()
    assert "FAIL" in text and "1/2 checks passed" in text
    assert "ValueError: nope" in text
