"""Byte-stable CSV/JSON emission shared by regions, experiments and the CLI.

Dialect: comma-separated, '.' decimal, UTF-8, LF newlines, floats at 17
significant digits (round-trip exact), JSON with sorted keys.
"""

from __future__ import annotations

import hashlib
import io
import json

import numpy as np

__all__ = ["format_value", "rows_to_csv_bytes", "write_csv", "json_bytes", "content_hash"]


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def rows_to_csv_bytes(fieldnames, rows) -> bytes:
    buf = io.StringIO()
    buf.write(",".join(fieldnames) + "\n")
    for row in rows:
        buf.write(",".join(format_value(row[name]) for name in fieldnames) + "\n")
    return buf.getvalue().encode("utf-8")


def write_csv(path, fieldnames, rows) -> bytes:
    data = rows_to_csv_bytes(fieldnames, rows)
    with open(path, "wb") as fh:
        fh.write(data)
    return data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def json_bytes(payload: dict) -> bytes:
    return (
        json.dumps(_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=True) + "\n"
    ).encode("utf-8")


def content_hash(data: bytes) -> str:
    """Content hash of an output blob (git object style)."""
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()
