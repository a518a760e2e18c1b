"""Pseudo-Fisher (minimum-square-error) discriminant in dissimilarity space.

For each subject a two-class problem "this subject vs. everyone else" is
solved as the minimum-norm least-squares fit of targets +1 / -1 on the
augmented, column-centred training rows ``(D(t, t) - mean, 1)``.  A probe
is scored against subject ``s`` by the inverse distance between its vector
of discriminant responses and the indicator pattern of ``s``.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dissimilarity import DissimilarityMatrix

EPS = 1e-12
RCOND = 1e-10
MODEL_FORMAT = "fbface-pfld"
MODEL_VERSION = 1


class ConfigMismatchError(ValueError):
    pass


def pseudo_inverse(m: np.ndarray, rcond: float = RCOND) -> np.ndarray:
    """Moore-Penrose inverse by SVD; singular values below ``rcond * s_max`` are dropped."""
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    keep = s > rcond * (s[0] if s.size else 0.0)
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (vt.T * inv_s) @ u.T


def augment(rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(rows)
    return np.hstack([rows, np.ones((rows.shape[0], 1))])


def target_matrix(labels, subject_ids) -> np.ndarray:
    """``+1`` where an object belongs to the subject column, ``-1`` elsewhere."""
    labels = list(labels)
    return np.where(np.array(labels)[:, None] == np.array(subject_ids, dtype=object)[None, :], 1.0, -1.0)


@dataclass(frozen=True)
class DiscriminantModel:
    """One augmented weight row per subject over the ``N`` training objects."""

    weights: np.ndarray
    center: np.ndarray
    subject_ids: tuple
    object_ids: tuple
    fingerprint: str = ""

    def responses(self, dissimilarities) -> np.ndarray:
        """Discriminant values ``g_s`` for one probe (length L) or many (rows)."""
        d = np.asarray(dissimilarities, dtype=float)
        single = d.ndim == 1
        d = np.atleast_2d(d)
        if d.shape[1] != len(self.object_ids):
            raise ValueError(f"probe has {d.shape[1]} dissimilarities, model expects {len(self.object_ids)}")
        g = augment(d - self.center) @ self.weights.T
        return g[0] if single else g

    def check_fingerprint(self, fingerprint: str) -> None:
        if self.fingerprint and fingerprint != self.fingerprint:
            raise ConfigMismatchError(
                f"model was trained with config {self.fingerprint}, probe uses {fingerprint}"
            )


def train_pfld(matrix: DissimilarityMatrix, labels, subject_ids=None, fingerprint: str = "") -> DiscriminantModel:
    """One-vs-rest pseudo-Fisher discriminants.

    Parameters
    ----------
    matrix : DissimilarityMatrix
        Training dissimilarities ``D(t, t)``.
    labels : sequence
        Subject of each training object, aligned with ``matrix.object_ids``.
    subject_ids : sequence, optional
        Subjects to model (default: sorted unique labels).  Each must have at
        least one training object.
    """
    labels = list(labels)
    n = len(matrix.object_ids)
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} training objects")
    if n < 2:
        raise ValueError("need at least two training objects")
    subjects = tuple(sorted(set(labels), key=str)) if subject_ids is None else tuple(subject_ids)
    if len(subjects) < 2:
        raise ValueError("need at least two subjects")
    missing = [s for s in subjects if s not in set(labels)]
    if missing:
        raise ValueError(f"subjects without training objects: {missing}")
    d = matrix.entries
    center = d.mean(axis=0)
    m = augment(d - center)
    weights = (pseudo_inverse(m) @ target_matrix(labels, subjects)).T
    return DiscriminantModel(
        weights=weights,
        center=center,
        subject_ids=subjects,
        object_ids=tuple(matrix.object_ids),
        fingerprint=fingerprint,
    )


def posterior_scores(responses) -> np.ndarray:
    """``1 / (eps + ||g - t_s||)`` for each subject indicator pattern ``t_s``."""
    g = np.atleast_2d(np.asarray(responses, dtype=float))
    n_sub = g.shape[1]
    targets = 2.0 * np.eye(n_sub) - 1.0
    dist = np.sqrt(np.sum((g[:, None, :] - targets[None, :, :]) ** 2, axis=-1))
    scores = 1.0 / (EPS + dist)
    return scores[0] if np.ndim(responses) == 1 else scores


def score_probe(model: DiscriminantModel, probe) -> np.ndarray:
    """Posterior-like scores (larger = more similar), aligned with ``model.subject_ids``."""
    return posterior_scores(model.responses(probe))


def save_model(model: DiscriminantModel, path, train_descriptors=None) -> None:
    """Versioned ``.npz`` container; training descriptors are stored when given."""
    meta = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "subject_ids": [str(s) for s in model.subject_ids],
        "object_ids": [str(o) for o in model.object_ids],
        "fingerprint": model.fingerprint,
    }
    arrays = {"weights": model.weights, "center": model.center}
    if train_descriptors is not None:
        arrays["train_descriptors"] = np.asarray(train_descriptors, dtype=float)
    buf = io.BytesIO()
    np.savez(buf, meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8), **arrays)
    Path(path).write_bytes(buf.getvalue())


def load_model(path) -> tuple[DiscriminantModel, np.ndarray | None]:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: not a pseudo-Fisher model container")
        if meta.get("version") != MODEL_VERSION:
            raise ValueError(f"{path}: unsupported model version {meta.get('version')}")
        model = DiscriminantModel(
            weights=data["weights"].copy(),
            center=data["center"].copy(),
            subject_ids=tuple(meta["subject_ids"]),
            object_ids=tuple(meta["object_ids"]),
            fingerprint=meta["fingerprint"],
        )
        train = data["train_descriptors"].copy() if "train_descriptors" in data.files else None
    return model, train
