"""Dissimilarity-space embedding: objects represented by distances to the training set."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DissimilarityMatrix:
    entries: np.ndarray
    object_ids: tuple

    def __post_init__(self):
        n = len(self.object_ids)
        if self.entries.shape != (n, n):
            raise ValueError(f"entries shape {self.entries.shape} does not match {n} object ids")


def _stack(descriptors) -> np.ndarray:
    try:
        arr = np.asarray(descriptors, dtype=float)
    except ValueError as exc:
        raise ValueError("descriptors have mismatched lengths") from exc
    if arr.ndim != 2:
        raise ValueError("descriptors have mismatched lengths")
    return arr


def _distances(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # direct differences; the |x|^2 - 2xy + |y|^2 shortcut loses the exact zeros
    return np.sqrt(np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=-1))


def build_matrix(train_descriptors, object_ids=None) -> DissimilarityMatrix:
    """Pairwise Euclidean distances; the upper triangle is mirrored so the result is exactly symmetric."""
    t = _stack(train_descriptors)
    n = t.shape[0]
    if n < 2:
        raise ValueError("need at least two training descriptors")
    ids = tuple(range(n)) if object_ids is None else tuple(object_ids)
    d = np.vstack([embed_probe(t[i], t) for i in range(n)])
    upper = np.triu(d, 1)
    d = upper + upper.T
    return DissimilarityMatrix(entries=d, object_ids=ids)


def embed_probe(probe_descriptor, train_descriptors) -> np.ndarray:
    """Distances from one probe descriptor to every training descriptor."""
    t = _stack(train_descriptors)
    p = np.asarray(probe_descriptor, dtype=float).ravel()
    if p.size != t.shape[1]:
        raise ValueError(f"probe has {p.size} features, training descriptors have {t.shape[1]}")
    return _distances(p[None, :], t)[0]


def embed_many(probes, train_descriptors) -> np.ndarray:
    return np.vstack([embed_probe(p, train_descriptors) for p in _stack(probes)])


def write_matrix_csv(matrix: DissimilarityMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([""] + [str(i) for i in matrix.object_ids])
        for oid, row in zip(matrix.object_ids, matrix.entries):
            w.writerow([str(oid)] + [repr(float(v)) for v in row])


def read_matrix_csv(path) -> DissimilarityMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    ids = tuple(rows[0][1:])
    entries = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return DissimilarityMatrix(entries=entries, object_ids=ids)
