"""Deterministic JSON/CSV emission: sorted keys, 17-significant-digit floats."""

from __future__ import annotations

import math
from typing import Any


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def point_jsonable(p) -> Any:
    """Coordinates for lp/half-plane points, field dicts for tree/cone points."""
    if isinstance(p, tuple):
        return list(p)
    if hasattr(p, "u") and hasattr(p, "v"):
        return {"edge": [p.u, p.v], "offset": p.t}
    if hasattr(p, "r") and hasattr(p, "label"):
        return {"radius": p.r, "label": p.label}
    if isinstance(p, (int, float, str)) or p is None:
        return p
    return str(p)


def point_label(p) -> str:
    """Compact single-cell rendering of a point for CSV rows."""
    if isinstance(p, tuple):
        return "(" + " ".join(fmt_float(float(c)) for c in p) + ")"
    if hasattr(p, "u") and hasattr(p, "v"):
        if p.u == p.v:
            return p.u
        return f"{p.u}--{p.v}@{fmt_float(p.t)}"
    if hasattr(p, "r") and hasattr(p, "label"):
        if p.label is None:
            return "apex"
        return f"{fmt_float(p.r)}*{p.label}"
    return str(p)


def canonical_dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline; bytes are
    reproducible for equal inputs."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out) + "\n"


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(_quote(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append('"' + fmt_float(obj) + '"' if math.isnan(obj) or math.isinf(obj) else fmt_float(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            out.append(_quote(key))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _quote(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """Plain CSV with one documented header row and 17-digit floats."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(fmt_float(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
