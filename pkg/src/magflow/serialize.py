"""JSON emission with fixed number formatting, and the schemas of every document."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = "1.0"


def _num(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def _scalar(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(float(v))
    if isinstance(v, Fraction):
        return _string(str(v))
    if isinstance(v, str):
        return _string(v)
    raise TypeError("cannot serialize %r" % type(v))


def _string(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _emit(v, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = ["%s%s: %s" % (pad, _string(str(k)), _emit(x, indent, level + 1)) for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in v):
            return "[" + ", ".join(_scalar(x) for x in v) + "]"
        items = [pad + _emit(x, indent, level + 1) for x in v]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar(v)


def emit_json(doc: dict, kind: str, indent: int = 2) -> str:
    """Serialize with schemaVersion and kind first; floats use 17 significant digits."""
    body = {"schemaVersion": SCHEMA_VERSION, "kind": kind}
    body.update(doc)
    return _emit(body, indent, 0) + "\n"


# ---------------------------------------------------------------------------
# schemas (JSON Schema draft 2020-12)

_num_t = {"type": ["number", "null"]}
_num_list = {"type": "array", "items": _num_t}

_header = {
    "schemaVersion": {"const": SCHEMA_VERSION},
    "kind": {"type": "string"},
}


def _doc(kind, props, required):
    p = dict(_header)
    p.update(props)
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "properties": dict(p, kind={"const": kind}),
        "required": ["schemaVersion", "kind"] + list(required),
    }


_verdict = {
    "type": "object",
    "properties": {"condition": {"type": "integer"}, "name": {"type": "string"},
                   "passed": {"type": "boolean"}, "witness": _num_t, "detail": {"type": "string"}},
    "required": ["condition", "passed"],
}

_atom = {
    "type": "object",
    "properties": {"id": {"type": "integer"}, "kind": {"enum": ["A", "V"]}, "label": {"type": "string"},
                   "k": {"type": "number"}, "circleParams": _num_list,
                   "signs": {"type": "array", "items": {"enum": [1, -1]}},
                   "sourceRows": {"type": "array", "items": {"enum": [1, 2, 3, 4]}}},
    "required": ["id", "kind", "k", "circleParams", "signs"],
}

_edge = {
    "type": "object",
    "properties": {"id": {"type": "integer"}, "lower": {"type": "integer"}, "upper": {"type": "integer"},
                   "kInterval": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                   "kDCount": {"type": "integer", "minimum": 0, "maximum": 2},
                   "kSCount": {"type": "integer", "minimum": 0, "maximum": 1},
                   "gluingMatrix": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                   "r": {"enum": ["0", "1/2", "inf"]}, "eps": {"enum": [1, -1]}},
    "required": ["lower", "upper", "kInterval", "kDCount", "kSCount", "gluingMatrix", "r", "eps"],
}

_molecule_body = {
    "type": "object",
    "properties": {"h": {"type": "number"}, "manifold": {"const": "RP3"},
                   "atoms": {"type": "array", "items": _atom},
                   "edges": {"type": "array", "items": _edge},
                   "families": {"type": "array", "items": {
                       "type": "object", "properties": {"n": {"type": "integer"},
                                                        "atoms": {"type": "array"}},
                       "required": ["n"]}}},
    "required": ["h", "manifold", "atoms", "edges", "families"],
}

_point = {"type": "object", "properties": {"h": {"type": "number"}, "k": {"type": "number"}},
          "required": ["h", "k"]}

SCHEMAS = {
    "validation": _doc("validation", {"ok": {"type": "boolean"},
                                      "conditions": {"type": "array", "items": _verdict}},
                       ["ok", "conditions"]),
    "classification": _doc("classification", {
        "criticalSets": {"type": "object", "properties": {"rI": _num_list, "rStar": _num_list, "rCirc": _num_list},
                         "required": ["rI", "rStar", "rCirc"]},
        "rank0": {"type": "array"},
        "circleTypes": {"type": "array", "items": {
            "type": "object", "properties": {"rRange": _num_list, "type": {"type": "string"}}}},
        "equilibria": {"type": "array"},
    }, ["criticalSets", "rank0", "circleTypes"]),
    "diagram": _doc("diagram", {
        "gamma1": {"type": "array", "items": {"type": "object", "properties": {
            "rRange": _num_list, "type": {"type": "string"}, "h": _num_list, "k": _num_list},
            "required": ["rRange", "type", "h", "k"]}},
        "gamma2": {"type": "object"},
        "rank0": {"type": "array"},
        "cusps": {"type": "array", "items": _point},
        "tangencies": {"type": "array", "items": _point},
        "selfIntersections": {"type": "array"},
        "asymptoteParabolas": {"type": "array"},
    }, ["gamma1", "gamma2", "rank0", "cusps", "tangencies"]),
    "molecule": _doc("molecule", {"molecule": _molecule_body}, ["molecule"]),
    "complex": _doc("complex", {"hMax": {"type": "number"}, "faceCount": {"type": "integer"},
                                "rightAdjacencyOk": {"type": "boolean"},
                                "faces": {"type": "array"}, "cells": {"type": "array"},
                                "events": _num_list, "slices": _num_list,
                                "molecules": {"type": "array", "items": _molecule_body}},
                    ["hMax", "faceCount", "faces", "rightAdjacencyOk"]),
    "dual": _doc("dual", {"L": {"type": "number"}, "poles": {"type": "array"},
                          "cusps": _num_list, "arcs": {"type": "array"}},
                 ["L", "poles", "cusps", "arcs"]),
    "realizability": _doc("realizability", {
        "ok": {"type": "boolean"},
        "verdicts": {"type": "array", "items": {"type": "object", "properties": {
            "name": {"enum": ["i*", "ii*", "iii*", "iv*"]}, "passed": {"type": "boolean"}}}},
        "profile": {"type": ["object", "null"]},
    }, ["ok", "verdicts"]),
    "trajectory": _doc("trajectory", {"maxDeltaH": {"type": "number"}, "maxDeltaK": {"type": "number"},
                                      "termination": {"type": "string"}, "samples": {"type": "integer"},
                                      "final": {"type": "object"}},
                       ["maxDeltaH", "maxDeltaK", "termination"]),
}
