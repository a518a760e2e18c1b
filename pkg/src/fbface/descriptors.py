"""Descriptor files: flat little-endian float64 binary, or CSV with a config header.

The CSV form starts with one ``# fbface-descriptors`` line carrying the
feature settings as JSON, then ``id,v0,v1,...`` rows.  The binary form is
the bare row-major matrix; its shape comes from the caller or a sidecar.
"""

from __future__ import annotations

import csv
import json

import numpy as np

CSV_MAGIC = "# fbface-descriptors "


def write_binary(path, rows) -> None:
    np.ascontiguousarray(rows, dtype="<f8").tofile(path)


def read_binary(path, width: int) -> np.ndarray:
    data = np.fromfile(path, dtype="<f8")
    if width < 1 or data.size % width:
        raise ValueError(f"{path}: {data.size} values do not form rows of {width}")
    return data.reshape(-1, width).astype(float)


def write_csv(path, ids, rows, settings: dict) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if len(ids) != rows.shape[0]:
        raise ValueError("one id is needed per descriptor row")
    with open(path, "w", newline="") as fh:
        fh.write(CSV_MAGIC + json.dumps(settings, sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"v{i}" for i in range(rows.shape[1])])
        for ident, row in zip(ids, rows):
            w.writerow([ident] + [repr(float(v)) for v in row])


def read_csv(path) -> tuple[list, np.ndarray, dict]:
    """Return ``(ids, rows, settings)``."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith(CSV_MAGIC):
            raise ValueError(f"{path}:1: expected a '{CSV_MAGIC.strip()}' header")
        settings = json.loads(first[len(CSV_MAGIC):])
        reader = csv.reader(fh)
        next(reader, None)
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=3):
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            ids.append(row[0])
    return ids, np.array(rows, dtype=float), settings
