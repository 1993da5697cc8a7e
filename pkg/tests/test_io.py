import json
import math

import numpy as np
import pytest

from rigidity_lab import io
from rigidity_lab.errors import ParseError


@pytest.mark.parametrize("value, expected", [
    (1.25, 1.25), (2, 2.0), ("90deg", math.pi / 2), (" 45 deg ", math.pi / 4), ("-1.5e1deg", -math.pi / 12),
])
def test_parse_angle(value, expected):
    assert io.parse_angle(value) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("value", ["90", "1.2rad", True, None, [1.0]])
def test_parse_angle_rejects(value):
    with pytest.raises(ParseError):
        io.parse_angle(value, "gamma_ref/0")


def test_parse_angles_names_the_index():
    with pytest.raises(ParseError, match="gamma_ref/1"):
        io.parse_angles([1.0, "oops"], "gamma_ref")


def test_parse_json_reports_position():
    with pytest.raises(ParseError, match="line 2 column"):
        io.parse_json('{"a": 1,\n  oops}', "in.json")


def test_validate_names_the_field():
    with pytest.raises(ParseError, match="normals/0"):
        io.validate({"normals": [[1, 0], [0, 1, 0], [0, 0, 1]]}, "cone.input")
    io.validate({"normals": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}, "cone.input")


def test_minimize_input_forms():
    io.validate({"b": [0, 0, 0], "b_bar": [0, 0, 0], "xi_bar": [1, 1, 1]}, "minimize.input")
    with pytest.raises(ParseError):
        io.validate({"b": [0, 0, 0], "xi_bar": [1, 1, 1]}, "minimize.input")


def test_load(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"normals": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}))
    assert io.load(str(p), "cone.input")["normals"][0] == [1, 0, 0]
    with pytest.raises(ParseError):
        io.load(str(tmp_path / "missing.json"), "cone.input")


def test_report_tags_and_validates():
    doc = io.report("mass.report", {"metric": "zero", "tau": np.float64(3.0), "rows": [
        {"scale": 2.0, "flux": 0.0, "face_term": 0.0, "edge_term": 0.0, "residual": 0.0, "quadrature_error": 0.0}]})
    assert doc["schema"] == "rigidity_lab/mass.report/v1"
    assert type(doc["tau"]) is float
    with pytest.raises(ParseError):
        io.report("mass.report", {"metric": "zero", "tau": 3.0, "rows": [], "extra": 1})


def test_dumps_is_canonical():
    a = io.dumps({"b": 0.1, "a": [1, 2]})
    assert a == io.dumps({"a": [1, 2], "b": 0.1})
    assert a.endswith("\n")
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})


def test_every_schema_loads():
    for name in ["cone.input", "pyramid.input", "minimize.input", "base_face.input", "polyhedron.input",
                 "cone.report", "energy.report", "minimizer.result", "quad_cx.report",
                 "trapping.certificate", "mass.report", "verify.report"]:
        assert io.load_schema(name)["$id"] == f"urn:rigidity_lab:{name}:v1"
