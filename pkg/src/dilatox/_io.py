"""Deterministic text serialization shared by result types and the CLI.

All floating-point output uses 17 significant digits so that float64
values round-trip losslessly and byte-identical re-runs are possible.
"""
from __future__ import annotations

import json
import math

import numpy as np


def fmt_float(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value in output: {v!r}")
    return f"{v:.17g}"


def _jval(v, indent: int) -> str:
    pad = " " * indent
    if v is None:
        return "null"
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return '{"im": %s, "re": %s}' % (fmt_float(v.imag), fmt_float(v.real))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {_jval(v[k], indent + 2)}'
                 for k in sorted(v, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        items = [f"{pad}  {_jval(e, indent + 2)}" for e in v]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(v)!r}")


def json_dumps(obj) -> str:
    """JSON with sorted keys and 17-significant-digit floats."""
    return _jval(obj, 0) + "\n"


def write_csv(path, comments, colnames, columns) -> None:
    """CSV with '#' comment lines, a header row, and 17g numeric cells."""
    cols = [np.asarray(c) for c in columns]
    n = cols[0].shape[0]
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(colnames))
    for i in range(n):
        row = []
        for c in cols:
            v = c[i]
            if isinstance(v, (np.integer, int)):
                row.append(str(int(v)))
            else:
                row.append(fmt_float(v))
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
