"""JSON input parsing and report serialization against the versioned schemas in ``schemas/``.

Angles are radians everywhere.  On input an angle may also be a string with an explicit ``deg``
suffix (``"90deg"``); bare strings are rejected so that degree values never slip in unmarked.
"""

from __future__ import annotations

import json
import math
import re
from functools import lru_cache
from importlib import resources

import numpy as np
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from rigidity_lab.errors import ParseError

SCHEMA_VERSION = "v1"
_DEG = re.compile(r"^\s*([-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?)\s*deg\s*$")


@lru_cache(maxsize=None)
def _registry() -> Registry:
    resources_ = []
    for entry in resources.files("rigidity_lab.schemas").iterdir():
        if entry.name.endswith(".json"):
            doc = json.loads(entry.read_text())
            resources_.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources_)


def schema_id(name: str) -> str:
    """Tag written into every report, e.g. ``rigidity_lab/cone.report/v1``."""
    return f"rigidity_lab/{name}/{SCHEMA_VERSION}"


def load_schema(name: str) -> dict:
    return _registry().contents(f"urn:rigidity_lab:{name}:{SCHEMA_VERSION}")


def _validator(name: str) -> Draft202012Validator:
    return Draft202012Validator(load_schema(name), registry=_registry())


def _field(path) -> str:
    return "/".join(str(p) for p in path) or "<root>"


def validate(doc, name: str) -> None:
    """Raise ``ParseError`` naming the first offending field when ``doc`` violates schema ``name``."""
    errors = sorted(_validator(name).iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        raise ParseError(f"{name}: field {_field(e.absolute_path)}: {e.message}")


def parse_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{source}: line {e.lineno} column {e.colno}: {e.msg}") from None


def load(path: str, schema: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror}") from None
    doc = parse_json(text, path)
    validate(doc, schema)
    return doc


def parse_angle(value, field: str = "angle") -> float:
    """Radians from a number, or from a string carrying the ``deg`` suffix."""
    if isinstance(value, bool):
        raise ParseError(f"field {field}: expected an angle, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _DEG.match(value)
        if m:
            return math.radians(float(m.group(1)))
        raise ParseError(f"field {field}: {value!r} is not a number or a value with a 'deg' suffix")
    raise ParseError(f"field {field}: expected an angle, got {type(value).__name__}")


def parse_angles(values, field: str) -> np.ndarray:
    return np.array([parse_angle(v, f"{field}/{i}") for i, v in enumerate(values)])


# ---------------------------------------------------------------- output


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def report(name: str, body: dict) -> dict:
    """Attach the schema tag, convert numpy values and validate the result."""
    doc = {"schema": schema_id(name), **_plain(body)}
    validate(doc, name)
    return doc


def dumps(doc) -> str:
    # repr-exact floats and sorted keys keep reports byte-identical across runs
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
