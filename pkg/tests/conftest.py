import hypothesis
import numpy as np
import pytest

from cornerwaves.config.settings import reset_settings
from cornerwaves.geometry.catalog import builtin_domain
from cornerwaves.meshing.grading import GradingParams
from cornerwaves.meshing.trace_grid import line_grid
from cornerwaves.problem import build_problem

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch, tmp_path):
    """Fresh settings per test, outputs under tmp_path, no ledger."""
    monkeypatch.setenv("CORNER_WAVES_OUT", str(tmp_path / "out"))
    monkeypatch.setenv("CORNER_WAVES_ENABLE_DATABASE", "false")
    monkeypatch.delenv("CORNER_WAVES_VERBOSE", raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture(scope="session")
def rectangle_problem():
    return build_problem(builtin_domain("rectangle"), GradingParams(h0=0.1))


@pytest.fixture(scope="session")
def one_object_problem():
    return build_problem(builtin_domain("one-object"), GradingParams(h0=0.15))


@pytest.fixture(scope="session")
def two_object_problem():
    return build_problem(builtin_domain("two-object"), GradingParams(h0=0.15))


@pytest.fixture(scope="session")
def sector_problem():
    return build_problem(builtin_domain("sector"), GradingParams(h0=0.1, rho0=0.25))


@pytest.fixture
def unit_grid():
    """Two line components on [0, 1] and [2, 3.5], uniform nodes."""
    return line_grid([np.linspace(0.0, 1.0, 21), np.linspace(2.0, 3.5, 31)])
