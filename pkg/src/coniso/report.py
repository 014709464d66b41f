"""Deterministic report serialization.

Reports must be byte-identical across repeated runs with the same config
and seed, so floats are formatted at a fixed 12 significant digits (below
quadrature noise, above platform jitter), keys keep insertion order, and
nothing time- or host-dependent is ever written.
"""

from __future__ import annotations

import math

import numpy as np


def fmt_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    out = f"{x:.12g}"
    # normalize the one ambiguous case: negative zero
    return "0" if out == "-0" else out


def _encode(value, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if value is None:
        return "null"
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    if isinstance(value, str):
        escaped = (
            value.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\t", "\\t")
        )
        return f'"{escaped}"'
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [_encode(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(pad_in + it for it in items) + "\n" + pad + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f'{pad_in}"{k}": ' + _encode(v, indent, level + 1) for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(data, indent=2):
    """Serialize dict -> JSON text with fixed float format and key order."""
    return _encode(data, indent, 0) + "\n"


def write_json(path, data):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_json(data))


def csv_row(values):
    parts = []
    for v in values:
        if isinstance(v, (float, np.floating)):
            parts.append(fmt_float(v))
        else:
            parts.append(str(v))
    return ",".join(parts) + "\n"


def write_csv(path, header, rows, append=False):
    """Write CSV with the documented column order; header once per file."""
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8", newline="\n") as fh:
        if not append or fh.tell() == 0:
            fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(csv_row(row))
