"""Deterministic JSON and CSV rendering of CLI results."""
from __future__ import annotations

import json
import math

import numpy as np

SCHEMA = "rkhs-geometry/1"


def _num(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    return format(v, ".17g")


def render_value(v) -> str:
    """Compact JSON with floats at 17 significant digits and ``None`` as null."""
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _num(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return '{"re":%s,"im":%s}' % (_num(v.real), _num(v.imag))
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        return "{" + ",".join(json.dumps(str(k), ensure_ascii=False) + ":" + render_value(x) for k, x in v.items()) + "}"
    if isinstance(v, np.ndarray):
        return render_value(v.tolist())
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(render_value(x) for x in v) + "]"
    raise TypeError(f"cannot render {type(v).__name__}")


def render_report(results) -> bytes:
    doc = {"schema": SCHEMA, "results": list(results)}
    return render_value(doc).encode("utf-8")


def render_csv(matrix) -> bytes:
    """``i,j,value`` rows; undefined cells are written as ``NA``."""
    lines = ["i,j,value"]
    for i, row in enumerate(matrix):
        for j, v in enumerate(row):
            lines.append(f"{i},{j},{'NA' if v is None else _num(float(v))}")
    return ("\n".join(lines) + "\n").encode("utf-8")
