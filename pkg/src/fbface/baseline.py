"""Eigenfaces baseline: snapshot PCA with the leading components discarded."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .discriminant import EPS

DEFAULT_SAMPLE_SIZE = 700
DEFAULT_DROP_LEADING = 3
DEFAULT_SEED = 1998


@dataclass(frozen=True)
class PcaModel:
    mean_face: np.ndarray
    components: np.ndarray  # rows, descending eigenvalue, excluded ones included
    eigenvalues: np.ndarray
    drop_leading: int
    sample_indices: np.ndarray

    @property
    def retained(self) -> np.ndarray:
        return self.components[self.drop_leading :]

    @property
    def projection_dim(self) -> int:
        return self.retained.shape[0]

    def project(self, images) -> np.ndarray:
        x = np.atleast_2d(np.asarray(images, dtype=float))
        return (x - self.mean_face) @ self.retained.T


def train_pca(
    train_images,
    sample_size: int | None = None,
    drop_leading: int = DEFAULT_DROP_LEADING,
    seed: int = DEFAULT_SEED,
) -> PcaModel:
    """Eigenfaces from a random sample via the ``n x n`` inner-product (snapshot) matrix.

    Components with eigenvalues below ``1e-10`` of the largest are discarded
    as numerically null.
    """
    x = np.asarray(train_images, dtype=float)
    if x.ndim != 2:
        raise ValueError("train_images must be a 2-D array of flattened faces")
    available = x.shape[0]
    if sample_size is None:
        sample_size = min(DEFAULT_SAMPLE_SIZE, available)
    if sample_size < 2:
        raise ValueError("sample_size must be at least 2")
    if sample_size > available:
        raise ValueError(f"sample_size {sample_size} exceeds the {available} available images")
    if drop_leading < 0:
        raise ValueError("drop_leading must be >= 0")
    idx = np.sort(np.random.default_rng(seed).choice(available, size=sample_size, replace=False))
    sample = x[idx]
    mean = sample.mean(axis=0)
    centered = sample - mean
    gram = centered @ centered.T
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    keep = evals > 1e-10 * max(evals[0], 0.0)
    evals, evecs = evals[keep], evecs[:, keep]
    components = (centered.T @ evecs) / np.sqrt(evals)
    # one Gram-Schmidt pass removes the drift left by the snapshot mapping
    components, _ = np.linalg.qr(components)
    signs = np.sign(np.sum(components * (centered.T @ evecs), axis=0))
    components = components * np.where(signs == 0, 1.0, signs)
    if drop_leading >= components.shape[1]:
        raise ValueError(f"cannot drop {drop_leading} of {components.shape[1]} components")
    return PcaModel(
        mean_face=mean,
        components=components.T,
        eigenvalues=evals / (sample_size - 1),
        drop_leading=drop_leading,
        sample_indices=idx,
    )


def pca_match_scores(model: PcaModel, gallery, probes) -> np.ndarray:
    """``1 / (eps + d)`` between projected probes (rows) and projected gallery images (columns)."""
    g = model.project(gallery)
    p = model.project(probes)
    d = np.sqrt(np.sum((p[:, None, :] - g[None, :, :]) ** 2, axis=-1))
    return 1.0 / (EPS + d)


PCA_FORMAT = "fbface-pca"
PCA_VERSION = 1


def save_pca(model: PcaModel, path, gallery=None, labels=(), fingerprint: str = "") -> None:
    """Versioned ``.npz`` container for a PCA model and, optionally, its labelled gallery images."""
    meta = {
        "format": PCA_FORMAT,
        "version": PCA_VERSION,
        "drop_leading": model.drop_leading,
        "labels": [str(v) for v in labels],
        "fingerprint": fingerprint,
    }
    arrays = {
        "mean_face": model.mean_face,
        "components": model.components,
        "eigenvalues": model.eigenvalues,
        "sample_indices": model.sample_indices,
    }
    if gallery is not None:
        arrays["gallery"] = np.asarray(gallery, dtype=float)
    buf = io.BytesIO()
    np.savez(buf, meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8), **arrays)
    Path(path).write_bytes(buf.getvalue())


def load_pca(path) -> tuple[PcaModel, np.ndarray | None, dict]:
    """Return ``(model, gallery, meta)``; ``meta`` holds ``labels`` and ``fingerprint``."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("format") != PCA_FORMAT:
            raise ValueError(f"{path}: not a PCA model container")
        if meta.get("version") != PCA_VERSION:
            raise ValueError(f"{path}: unsupported model version {meta.get('version')}")
        model = PcaModel(
            mean_face=data["mean_face"].copy(),
            components=data["components"].copy(),
            eigenvalues=data["eigenvalues"].copy(),
            drop_leading=int(meta["drop_leading"]),
            sample_indices=data["sample_indices"].copy(),
        )
        gallery = data["gallery"].copy() if "gallery" in data.files else None
    return model, gallery, meta
