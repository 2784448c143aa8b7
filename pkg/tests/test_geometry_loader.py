import json
import math

import pytest

from cornerwaves.core.errors import GeometryError
from cornerwaves.geometry.catalog import builtin_domain
from cornerwaves.ingest.geometry_loader import GeometryDocument, domain_schema_help, load_domain

BASIN = {
    "name": "basin",
    "dirichlet_intervals": [[0.0, 1.0], {"a": 2.0, "b": 4.0}],
    "objects": [{"arc": [[1.0, 0.0], [1.2, -0.3], [1.8, -0.3], [2.0, 0.0]]}],
    "bottom": [[0.0, -1.0], [4.0, -1.0]],
}


def test_builtin_id_with_params():
    spec = load_domain("sector", omega=0.5 * math.pi)
    apex = next(c for c in spec.corners if abs(c.x) < 1e-12 and abs(c.z) < 1e-12)
    assert apex.angle == pytest.approx(0.5 * math.pi)


def test_params_rejected_for_documents():
    with pytest.raises(GeometryError, match="built-in"):
        load_domain(BASIN, omega=1.0)


def test_dict_document():
    spec = load_domain(BASIN)
    assert spec.name == "basin"
    assert [(iv.a, iv.b) for iv in spec.dirichlet_intervals] == [(0.0, 1.0), (2.0, 4.0)]
    assert len(spec.wetted_arcs) == 1


def test_inline_json_and_file_agree(tmp_path):
    path = tmp_path / "basin.json"
    path.write_text(json.dumps(BASIN), encoding="utf-8")
    from_file = load_domain(str(path))
    inline = load_domain(json.dumps(BASIN))
    assert from_file == inline


def test_window_for_truncated_component():
    doc = {
        "dirichlet_intervals": [{"a": -3.0, "b": 0.0, "average_window": [-1.0, 0.0]}],
        "bottom": [[-3.0, -1.0], [0.0, -1.0]],
        "truncation": {"left": True},
    }
    spec = load_domain(doc)
    iv = spec.dirichlet_intervals[0]
    assert iv.originally_unbounded
    assert iv.window == (-1.0, 0.0)


def test_unknown_keys_are_rejected():
    with pytest.raises(GeometryError, match="invalid geometry document"):
        load_domain({**BASIN, "colour": "blue"})


def test_inadmissible_document_is_rejected():
    bad = {**BASIN, "dirichlet_intervals": [[0.0, 2.5], [2.0, 4.0]]}
    with pytest.raises(GeometryError, match="not admissible"):
        load_domain(bad)


@pytest.mark.parametrize("source", ["no-such-geometry", "{not json"])
def test_unresolvable_sources(source):
    with pytest.raises(GeometryError):
        load_domain(source)


def test_domain_spec_passes_through():
    spec = builtin_domain("two-object")
    assert load_domain(spec) is spec


def test_schema_help_lists_builtins():
    text = domain_schema_help()
    for name in ("rectangle", "one-object", "two-object", "sector", "emerging-beach"):
        assert name in text
    assert "dirichlet_intervals" in text


def test_document_model_requires_bottom():
    with pytest.raises(ValueError):
        GeometryDocument.model_validate({"dirichlet_intervals": [[0.0, 1.0]]})
