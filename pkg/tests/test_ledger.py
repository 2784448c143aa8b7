import pytest

from cornerwaves.config.settings import reset_settings
from cornerwaves.main import EXIT_OK, RunConfig, _end_run, _start_run, _store_checks, main
from cornerwaves.storage.db import dispose_engine, get_db_sync
from cornerwaves.storage.models import CheckResult, Event, Run
from cornerwaves.verify.contracts import CheckRecord, SuiteReport


@pytest.fixture
def ledger(monkeypatch, tmp_path):
    monkeypatch.setenv("CORNER_WAVES_ENABLE_DATABASE", "true")
    monkeypatch.setenv("CORNER_WAVES_DB_FILE", str(tmp_path / "ledger.db"))
    reset_settings()
    dispose_engine()
    yield tmp_path / "ledger.db"
    dispose_engine()


def test_runs_and_events_are_recorded(ledger, tmp_path):
    code = main(["dn", "--geometry", "rectangle", "--h0", "0.2", "--modes", "2", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert ledger.is_file()
    db = get_db_sync()
    try:
        runs = db.query(Run).all()
        assert [(r.command, r.exit_code) for r in runs] == [("dn", 0)]
        assert runs[0].ended_at is not None
        types = {e.type for e in db.query(Event).filter(Event.source == "cli")}
        assert {"command_started", "command_finished"} <= types
    finally:
        db.close()


def test_suite_checks_are_stored(ledger):
    run_id = _start_run("verify", RunConfig(seed=5))
    assert run_id is not None
    report = SuiteReport(suite="all", geometry="rectangle", seed=5, checks=[
        CheckRecord(name="dno.symmetry", value=1e-15, bound=1e-12, passed=True),
        CheckRecord(name="traces.constants", value=None, passed=False, detail="boom"),
    ])
    _store_checks(report, run_id)
    _end_run(run_id, 1)
    db = get_db_sync()
    try:
        rows = db.query(CheckResult).order_by(CheckResult.name).all()
        assert [(r.suite, r.passed) for r in rows] == [("dno", True), ("traces", False)]
        assert rows[0].bound == "1e-12" and rows[1].bound is None
        assert db.get(Run, run_id).exit_code == 1
    finally:
        db.close()


def test_disabled_ledger_records_nothing(tmp_path):
    assert _start_run("dn", RunConfig()) is None
    _end_run(None, 0)
