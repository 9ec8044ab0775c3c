"""JSON-lines record I/O.

Records are plain dicts with a fixed key order; floats serialize with
repr (shortest round trip), so identical runs produce byte-identical
files.  Timestamps never enter record files, only the run manifest.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def _clean(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def dumps_record(record: dict) -> str:
    return json.dumps(_clean(record), separators=(",", ":"), allow_nan=True)


def write_records(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        for rec in records:
            fh.write(dumps_record(rec))
            fh.write("\n")
    tmp.replace(path)


def read_records(path) -> list[dict]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def append_records(records, fh) -> None:
    for rec in records:
        fh.write(dumps_record(rec))
        fh.write("\n")


def write_csv(rows, path, header) -> None:
    """Small deterministic CSV writer for analysis tables."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(_clean(v)) if isinstance(v, float) else str(_clean(v)) for v in row) + "\n")
