"""Deterministic CSV/JSON writers with an embedded metadata block.

Floats are written with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import __version__, constants


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def _plain(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with 17-digit floats; non-finite floats become null."""
    obj = _plain(obj)
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None or isinstance(obj, (bool, int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if not len(obj):
            return "[]"
        items = [f"{inner}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def metadata(command: str, params: dict) -> dict:
    return {"tool": "disclab", "tool_version": __version__,
            "constants_version": constants.get("version"), "command": command, "params": params}


def json_document(meta: dict, result) -> str:
    return dumps({"meta": meta, "result": result}) + "\n"


def _cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    s = str(v)
    return f'"{s}"' if ("," in s or '"' in s) else s


def csv_document(meta: dict, columns, rows) -> str:
    lines = [f"# {line}" for line in dumps(meta, indent=0).replace("\n", "").splitlines()]
    lines.append(",".join(columns))
    lines.extend(",".join(_cell(r[c]) for c in columns) for r in rows)
    return "\n".join(lines) + "\n"
