"""JSON input schemas and JSON/CSV writers."""

import csv
import json
from pathlib import Path

import jsonschema

from .errors import ShapeError

_vector = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_matrix = {"type": "array", "items": _vector, "minItems": 1}

SYSTEM_SCHEMA = {
    "type": "object",
    "required": ["masses"],
    "properties": {
        "masses": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2},
        "dim": {"type": "integer", "minimum": 1},
        "G": {"type": "number", "exclusiveMinimum": 0},
        "lift_axes": {"oneOf": [_vector, _matrix]},
    },
}

CONFIGURATION_SCHEMA = {
    "type": "object",
    "required": ["coords"],
    "properties": {"coords": _matrix},
}

CONE_SCHEMA = {
    "type": "object",
    "required": ["normals"],
    "properties": {"normals": _matrix},
}

ARRANGEMENT_SCHEMA = {
    "type": "object",
    "oneOf": [
        {"required": ["normals"], "properties": {"normals": _matrix}},
        {"required": ["complement_bases"],
         "properties": {"complement_bases": {"type": "array", "items": _matrix, "minItems": 1}}},
    ],
}

ESCAPE_DEMO_SCHEMA = {
    "type": "object",
    "required": ["system", "configuration"],
    "properties": {"system": SYSTEM_SCHEMA, "configuration": CONFIGURATION_SCHEMA},
}

CROSS_SECTION_SCHEMA = {
    "type": "object",
    "properties": {
        "a": {"type": "number", "exclusiveMinimum": 0},
        "b": {"type": "number", "exclusiveMinimum": 0},
        "z_min": {"type": "number"},
        "z_max": {"type": "number"},
        "n": {"type": "integer", "minimum": 2},
    },
}


class SchemaError(ValueError):
    """Input failed to parse or validate; the message names the location."""


def load_json(path, schema):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read input: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    validate(data, schema, source=str(path))
    return data


def validate(data, schema, source="input"):
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(data), key=lambda e: list(e.path))
    if errors:
        lines = []
        for err in errors:
            where = "/".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{source}: field {where}: {err.message}")
        raise SchemaError("\n".join(lines))


def configuration_from_dict(data, sys):
    coords = data["coords"]
    if len(coords) != sys.n_bodies or any(len(row) != sys.dim for row in coords):
        raise ShapeError(f"configuration must have {sys.n_bodies} rows of length {sys.dim}")
    return coords


def dumps(report):
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(report, path=None):
    text = dumps(report)
    if path is None:
        print(text, end="")
    else:
        Path(path).write_text(text)
    return text


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])
