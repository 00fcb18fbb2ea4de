"""Byte-stable JSON and CSV output plus polyline (de)serialisation."""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ValidationError
from .geometry import TOPOLOGIES, Polyline, manifold_from_json, mesh_size


def _number(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent=2):
    """JSON with sorted keys and every float written with 17 significant digits."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(o[k], level + 1)}" for k in sorted(o)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple, np.ndarray)):
            seq = list(o)
            if not seq:
                return "[]"
            if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
                return "[" + ", ".join(enc(v, level + 1) for v in seq) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in seq) + "\n" + end + "]"
        if o is None or isinstance(o, (bool, np.bool_)):
            return json.dumps(None if o is None else bool(o))
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _number(o)
        if isinstance(o, complex):
            return enc({"re": o.real, "im": o.imag}, level)
        if isinstance(o, str):
            return json.dumps(o)
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return enc(obj, 0) + "\n"


def write_csv(path, header, rows):
    """Comma-separated file with a header row and LF line endings."""
    lines = [",".join(header)]
    lines += [",".join(_number(v) for v in row) for row in rows]
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def polyline_to_json(p, with_delta=True):
    out = {
        "manifold": p.kind.to_json(),
        "topology": p.topology,
        "points": p.points.tolist(),
    }
    if with_delta:
        out["delta"] = mesh_size(p)
    return out


def polyline_from_json(obj):
    """Parse ``{"manifold": {...}, "topology": ..., "points": [...]}``."""
    if not isinstance(obj, dict):
        raise ValidationError("polyline JSON must be an object")
    try:
        kind = manifold_from_json(obj["manifold"])
        points = obj["points"]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"polyline JSON missing field {exc}") from None
    topology = obj.get("topology", "periodic")
    if topology not in TOPOLOGIES:
        raise ValidationError(f"topology must be one of {TOPOLOGIES}, got {topology!r}")
    try:
        arr = np.asarray(points, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError("points must be a rectangular array of numbers") from None
    if arr.ndim == 2 and kind.point_ndim == 2 and arr.shape[1] == int(np.prod(kind.point_shape)):
        # matrices may be given row-major flattened
        arr = arr.reshape((len(arr),) + kind.point_shape)
    return Polyline(kind, arr, topology)
