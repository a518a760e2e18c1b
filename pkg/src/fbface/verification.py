"""Verification protocol: claims, thresholds and ROC curves.

Scores handed to this module are distance-like: a claim is confirmed when
its score is at or below the threshold.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

N_THRESHOLDS = 100
ROC_HEADER = ("threshold", "p_false_alarm", "p_verification")


@dataclass
class VerificationRun:
    """Scores of every probe against every claimed gallery subject.

    ``scores[p, s]`` is the distance-like score of probe ``probe_ids[p]``
    claiming to be ``gallery_ids[s]``; ``ground_truth[p]`` is its true
    subject.
    """

    gallery_ids: list
    probe_ids: list
    ground_truth: list
    scores: np.ndarray
    excluded: list = field(default_factory=list)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if self.scores.shape != (len(self.probe_ids), len(self.gallery_ids)):
            raise ValueError("score table does not match probe and gallery ids")
        missing = [t for t in self.ground_truth if t not in self.gallery_ids]
        if missing:
            raise ValueError(f"ground truth subjects absent from the gallery: {sorted(set(map(str, missing)))}")
        if len(self.ground_truth) != len(self.probe_ids):
            raise ValueError("one ground-truth subject is needed per probe")

    def truth_mask(self) -> np.ndarray:
        g = list(self.gallery_ids)
        mask = np.zeros(self.scores.shape, bool)
        for p, t in enumerate(self.ground_truth):
            mask[p, g.index(t)] = True
        return mask

    def claim_scores(self) -> tuple[np.ndarray, np.ndarray]:
        """Scores of true claims and of false claims."""
        mask = self.truth_mask()
        return self.scores[mask], self.scores[~mask]


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    p_false_alarm: np.ndarray
    p_verification: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.p_false_alarm.tolist(), self.p_verification.tolist()))

    def pv_at_pf(self, pf: float) -> float:
        """Best verification rate among grid points whose false-alarm rate is at most ``pf``."""
        ok = self.p_false_alarm <= pf + 1e-12
        return float(self.p_verification[ok].max()) if np.any(ok) else 0.0

    def eer(self) -> float:
        """Smallest ``max(P_F, 1 - P_V)`` on the grid."""
        return float(np.min(np.maximum(self.p_false_alarm, 1.0 - self.p_verification)))


def confirm_claim(score: float, threshold: float) -> bool:
    return score <= threshold


def roc_from_claims(true_scores, false_scores, n_thresholds: int = N_THRESHOLDS) -> RocCurve:
    true_scores = np.asarray(true_scores, dtype=float)
    false_scores = np.asarray(false_scores, dtype=float)
    if true_scores.size == 0:
        raise ValueError("no true claims")
    if false_scores.size == 0:
        raise ValueError("no false claims")
    allscores = np.concatenate([true_scores, false_scores])
    thresholds = np.linspace(allscores.min(), allscores.max(), n_thresholds)
    thresholds[-1] = allscores.max()
    ts = np.sort(true_scores)
    fs = np.sort(false_scores)
    pv = np.searchsorted(ts, thresholds, side="right") / ts.size
    pf = np.searchsorted(fs, thresholds, side="right") / fs.size
    return RocCurve(thresholds=thresholds, p_false_alarm=pf, p_verification=pv)


def build_roc(run: VerificationRun) -> RocCurve:
    """ROC over 100 equally spaced thresholds spanning the observed scores."""
    true_scores, false_scores = run.claim_scores()
    return roc_from_claims(true_scores, false_scores)


def roc_csv(roc: RocCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROC_HEADER)
    for t, pf, pv in zip(roc.thresholds, roc.p_false_alarm, roc.p_verification):
        w.writerow([repr(float(t)), repr(float(pf)), repr(float(pv))])
    return buf.getvalue()


def write_roc_csv(roc: RocCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(roc_csv(roc))


def read_roc_csv(path) -> RocCurve:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != ROC_HEADER:
        raise ValueError(f"{path}: expected header {','.join(ROC_HEADER)}")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return RocCurve(thresholds=data[:, 0], p_false_alarm=data[:, 1], p_verification=data[:, 2])
