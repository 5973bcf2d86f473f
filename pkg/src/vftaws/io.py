"""Versioned JSON instances, spanners and reports, plus DOT/CSV export."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import jsonschema

from .metric import InvalidArgument, Spanner, WeightedPoint

SCHEMA_VERSION = 1
SETTINGS = ("euclidean", "polygon", "domain", "terrain")

_xy = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_ring = {"type": "array", "items": _xy, "minItems": 3}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "setting", "points"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "setting": {"enum": list(SETTINGS)},
        "seed": {"type": "integer"},
        "points": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "coords", "weight"],
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "coords": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "weight": {"type": "number", "minimum": 0},
                },
            },
        },
        "polygon": _ring,
        "domain": {
            "type": "object",
            "required": ["outer", "holes"],
            "properties": {"outer": _ring, "holes": {"type": "array", "items": _ring}},
        },
        "terrain": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "required": ["vertices", "triangles"],
                    "properties": {
                        "vertices": {"type": "array", "items": {
                            "type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}},
                        "triangles": {"type": "array", "items": {
                            "type": "array", "items": {"type": "integer", "minimum": 0},
                            "minItems": 3, "maxItems": 3}},
                    },
                },
            ]
        },
    },
    "allOf": [
        {"if": {"properties": {"setting": {"const": "polygon"}}}, "then": {"required": ["polygon"]}},
        {"if": {"properties": {"setting": {"const": "domain"}}}, "then": {"required": ["domain"]}},
        {"if": {"properties": {"setting": {"const": "terrain"}}}, "then": {"required": ["terrain"]}},
    ],
}

SPANNER_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "edges", "meta"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "edges": {"type": "array", "items": {
            "type": "array", "minItems": 4, "maxItems": 4,
            "prefixItems": [{"type": "integer", "minimum": 0}, {"type": "integer", "minimum": 0},
                            {"type": "number", "minimum": 0}, {"type": "string"}]}},
        "meta": {
            "type": "object",
            "required": ["setting", "k", "epsilon", "bound", "n"],
            "properties": {
                "setting": {"enum": list(SETTINGS)},
                "k": {"type": "integer", "minimum": 1},
                "epsilon": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "bound": {"type": "number"},
                "n": {"type": "integer", "minimum": 0},
            },
        },
    },
}


class SchemaError(InvalidArgument):
    pass


def validate(doc, schema, what="document") -> None:
    v = jsonschema.Draft202012Validator(schema)
    errors = sorted(v.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors[:10]:
            pointer = "/" + "/".join(str(p) for p in e.absolute_path)
            lines.append(f"{pointer}: {e.message}")
        raise SchemaError(f"invalid {what}:\n  " + "\n  ".join(lines))


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write_json(path, doc) -> None:
    Path(path).write_text(dumps(doc))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON ({e})") from None


def points_to_json(points) -> list:
    return [{"id": p.id, "coords": [float(c) for c in p.coords], "weight": float(p.weight)} for p in points]


def points_from_json(items) -> list:
    pts = [WeightedPoint(int(d["id"]), tuple(float(c) for c in d["coords"]), float(d["weight"])) for d in items]
    pts.sort(key=lambda p: p.id)
    if [p.id for p in pts] != list(range(len(pts))):
        raise SchemaError("point ids must be 0..n-1")
    return pts


def load_instance(path) -> dict:
    doc = read_json(path)
    validate(doc, INSTANCE_SCHEMA, "instance")
    if doc["setting"] == "terrain" and isinstance(doc["terrain"], str):
        off = Path(path).parent / doc["terrain"]
        doc = dict(doc, terrain_off=off.read_text())
    return doc


def spanner_to_json(spanner: Spanner, meta: dict) -> dict:
    edges = [[i, j, float(length), prov] for (i, j), (length, prov) in sorted(spanner.edges.items())]
    return {"schema_version": SCHEMA_VERSION, "edges": edges, "meta": meta}


def spanner_from_json(doc) -> tuple[Spanner, dict]:
    validate(doc, SPANNER_SCHEMA, "spanner")
    meta = doc["meta"]
    sp = Spanner(int(meta["n"]))
    for i, j, length, prov in doc["edges"]:
        if not (0 <= i < sp.n and 0 <= j < sp.n) or i == j:
            raise SchemaError(f"edge ({i}, {j}) is not between two distinct point ids")
        sp.add_edge(int(i), int(j), float(length), prov)
    return sp, meta


def to_dot(spanner: Spanner, name="spanner") -> str:
    lines = [f"graph {name} {{"]
    for v in range(spanner.n):
        lines.append(f"  {v};")
    for (i, j), (length, prov) in sorted(spanner.edges.items()):
        lines.append(f'  {i} -- {j} [label="{length:.6g}", provenance="{prov}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: r.get(c, "") for c in columns})
    return buf.getvalue()


def spanner_csv(spanner: Spanner) -> str:
    rows = [{"u": i, "v": j, "length": repr(float(length)), "provenance": prov}
            for (i, j), (length, prov) in sorted(spanner.edges.items())]
    return to_csv(rows, ["u", "v", "length", "provenance"])
