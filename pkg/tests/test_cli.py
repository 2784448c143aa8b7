import json

import pytest

from cornerwaves.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, load_run_config, main
from cornerwaves.outputs.writers import read_csv, write_json
from cornerwaves.verify.contracts import CheckRecord, SuiteReport

COARSE = ["--geometry", "rectangle", "--h0", "0.2", "--no-timestamp"]


def test_dn_writes_spectrum(tmp_path):
    code = main(["dn", *COARSE, "--modes", "3", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "spectrum.csv")
    assert [r["index"] for r in rows] == ["0", "1", "2", "3"]
    assert float(rows[1]["rel_error"]) < 0.05
    assert not (tmp_path / "spectrum.csv").read_text().startswith("#")


def test_evolve_writes_trajectory_and_snapshots(tmp_path):
    code = main(["evolve", *COARSE, "--dt", "0.05", "--steps", "20", "--snapshot-every", "10",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "trajectory.csv")
    t = [float(r["t"]) for r in rows]
    assert len(t) == 21 and all(b > a for a, b in zip(t, t[1:]))
    assert sorted(p.name for p in tmp_path.glob("snapshot_*.csv")) == [
        "snapshot_000000.csv", "snapshot_000010.csv", "snapshot_000020.csv"]
    assert (tmp_path / "potential_final.csv").is_file()


def test_mesh_command(tmp_path):
    assert main(["mesh", *COARSE, "--out", str(tmp_path)]) == EXIT_OK
    quality = json.loads((tmp_path / "mesh_quality.json").read_text())
    assert quality["geometry"] == "rectangle"
    assert (tmp_path / "mesh.txt").read_text().startswith("corner-waves-mesh v1")


@pytest.mark.slow
def test_verify_rellich_suite(tmp_path):
    code = main(["verify", *COARSE, "--suite", "rellich", "--seed", "1", "--out", str(tmp_path)])
    report = SuiteReport.model_validate_json((tmp_path / "report_rellich.json").read_text())
    assert report.seed == 1
    assert code == (EXIT_OK if report.passed else EXIT_FAILED)


def test_verify_requires_seed(tmp_path):
    assert main(["verify", *COARSE, "--suite", "rellich", "--out", str(tmp_path)]) == EXIT_USAGE


def test_usage_errors(capsys):
    assert main(["nonsense"]) == EXIT_USAGE
    assert "dirichlet_intervals" in capsys.readouterr().err
    assert main(["dn", "--param", "omega"]) == EXIT_USAGE


def test_bad_geometry_is_a_usage_error(tmp_path, capsys):
    code = main(["dn", "--geometry", "no-such-geometry", "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_report_renders_saved_report(tmp_path):
    report = SuiteReport(suite="dno", geometry="rectangle", seed=2,
                         checks=[CheckRecord(name="dno.symmetry", value=0.0, bound=1e-12, passed=True)])
    path = write_json(tmp_path / "report.json", report)
    assert main(["report", "--input", str(path)]) == EXIT_OK
    failing = report.model_copy(update={"checks": [CheckRecord(name="dno.x", passed=False)]})
    assert main(["report", "--input", str(write_json(tmp_path / "f.json", failing))]) == EXIT_FAILED


def test_report_field_seminorms(tmp_path):
    assert main(["report", *COARSE, "--field", "x", "--out", str(tmp_path)]) == EXIT_OK
    rows = json.loads((tmp_path / "seminorms_x.json").read_text())
    assert rows[0]["component"] == 1
    assert rows[0]["seminorm_half"] > 0


def test_config_file_is_overridden_by_flags(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"h0": 0.3, "geometry": "sector", "geometry_params": {"omega": 1.0}}))
    args = build_parser().parse_args(["dn", "--config", str(config), "--h0", "0.1", "--param", "radius=2"])
    cfg = load_run_config(args)
    assert cfg.h0 == 0.1
    assert cfg.geometry == "sector"
    assert cfg.geometry_params == {"omega": 1.0, "radius": 2.0}


def test_missing_config_file(tmp_path):
    assert main(["dn", "--config", str(tmp_path / "nope.json")]) == EXIT_USAGE


def test_value_error_is_a_failed_run(tmp_path, monkeypatch, capsys):
    def broken(cfg):
        raise ValueError("eps must be positive, got 0.0")

    monkeypatch.setattr("cornerwaves.main.cmd_dn", broken)
    assert main(["dn", *COARSE, "--out", str(tmp_path)]) == EXIT_FAILED
    assert "eps must be positive" in capsys.readouterr().err
