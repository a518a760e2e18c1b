"""End-to-end verification experiments over a dataset manifest."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baseline import PcaModel, pca_match_scores, train_pca
from .config import ExperimentConfig
from .dataset import DatasetManifest, Entry
from .discriminant import DiscriminantModel, score_probe, train_pfld
from .dissimilarity import build_matrix, embed_many
from .face import (
    NormalizedFace,
    RegistrationError,
    clamp_eyes,
    extract_descriptor,
    mean_eyes,
    occlude,
    perturb_eyes,
    register,
)
from .pgm import read_pgm
from .verification import VerificationRun

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sample:
    image_id: str
    subject_id: str
    face: NormalizedFace


@dataclass
class Preprocessed:
    gallery: list
    probes: list
    excluded: list = field(default_factory=list)


def _map(fn, items, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def eye_noise_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([base, index]).generate_state(1)[0])


def preprocess(manifest: DatasetManifest, config: ExperimentConfig) -> Preprocessed:
    """Register every entry, optionally with perturbed eyes.

    Faces that fail registration are retried with the mean eye coordinates
    of the faces that registered.
    """
    entries = manifest.entries

    def eyes_for(i_entry):
        i, entry = i_entry
        eyes = entry.eyes
        if config.eye_noise is not None:
            n = config.eye_noise
            eyes = perturb_eyes(eyes, (n.mean, n.sd), eye_noise_seed(n.seed, i), n.shared)
        return eyes

    def attempt(i_entry):
        i, entry = i_entry
        image = read_pgm(entry.path)
        eyes = clamp_eyes(eyes_for(i_entry), image.shape[1], image.shape[0])
        try:
            return register(image, eyes), eyes
        except (RegistrationError, ValueError) as exc:
            log.warning("registration failed for %s: %s", entry.image_id, exc)
            return None, None

    results = _map(attempt, list(enumerate(entries)), config.workers)
    located = [eyes for face, eyes in results if face is not None]
    excluded = []
    faces = {}
    for entry, (face, _) in zip(entries, results):
        if face is None:
            try:
                face = register(read_pgm(entry.path), mean_eyes(located))
                excluded.append((entry.image_id, "registration failed; used mean eye coordinates"))
            except (RegistrationError, ValueError) as exc:
                excluded.append((entry.image_id, f"registration failed: {exc}"))
                continue
        faces[entry.image_id] = face

    def samples(group: list[Entry]):
        return [Sample(e.image_id, e.subject_id, faces[e.image_id]) for e in group if e.image_id in faces]

    return Preprocessed(gallery=samples(manifest.gallery), probes=samples(manifest.probes), excluded=excluded)


def features(samples, config: ExperimentConfig, occluded: bool = False) -> np.ndarray:
    """Feature rows for ``samples``; occlusion, when configured and requested, is applied first."""

    def one(sample: Sample):
        face = sample.face
        if occluded and config.occlusion is not None:
            face = occlude(face, config.occlusion)
        if config.classifier == "pca_baseline":
            return face.image[face.mask]
        return extract_descriptor(face, config.mode, config.fbt, config.flatten_variant)

    return np.vstack(_map(one, samples, config.workers))


def subjects_of(gallery) -> list:
    seen = []
    for s in gallery:
        if s.subject_id not in seen:
            seen.append(s.subject_id)
    return seen


@dataclass
class TrainedPipeline:
    config: ExperimentConfig
    subjects: list
    gallery_features: np.ndarray
    gallery_labels: list
    model: DiscriminantModel | PcaModel

    def distance_scores(self, probe_features: np.ndarray) -> np.ndarray:
        """Distance-like scores (small = match), probes x subjects."""
        if isinstance(self.model, DiscriminantModel):
            self.model.check_fingerprint(self.config.fingerprint())
            d = embed_many(probe_features, self.gallery_features)
            post = np.vstack([score_probe(self.model, row) for row in d])
            order = [list(self.model.subject_ids).index(s) for s in self.subjects]
            return 1.0 / post[:, order]
        sim = pca_match_scores(self.model, self.gallery_features, probe_features)
        labels = np.array(self.gallery_labels, dtype=object)
        best = np.column_stack([sim[:, labels == s].max(axis=1) for s in self.subjects])
        return 1.0 / best


def train(gallery, config: ExperimentConfig, gallery_features: np.ndarray | None = None) -> TrainedPipeline:
    if gallery_features is None:
        gallery_features = features(gallery, config)
    labels = [s.subject_id for s in gallery]
    subjects = subjects_of(gallery)
    if config.classifier == "pca_baseline":
        model = train_pca(
            gallery_features,
            sample_size=config.pca_sample_size,
            drop_leading=config.pca_drop_leading,
            seed=config.pca_seed,
        )
    else:
        matrix = build_matrix(gallery_features, [s.image_id for s in gallery])
        model = train_pfld(matrix, labels, subjects, fingerprint=config.fingerprint())
    return TrainedPipeline(config, subjects, gallery_features, labels, model)


def verify(pipeline: TrainedPipeline, probes, probe_features: np.ndarray | None = None) -> VerificationRun:
    subjects = set(pipeline.subjects)
    kept = [p for p in probes if p.subject_id in subjects]
    excluded = [(p.image_id, f"subject {p.subject_id} absent from gallery") for p in probes if p.subject_id not in subjects]
    if probe_features is None:
        probe_features = features(kept, pipeline.config, occluded=True)
    else:
        probe_features = probe_features[[i for i, p in enumerate(probes) if p.subject_id in subjects]]
    scores = pipeline.distance_scores(probe_features) if kept else np.zeros((0, len(pipeline.subjects)))
    return VerificationRun(
        gallery_ids=list(pipeline.subjects),
        probe_ids=[p.image_id for p in kept],
        ground_truth=[p.subject_id for p in kept],
        scores=scores,
        excluded=excluded,
    )


def run_experiment(gallery, probes, config: ExperimentConfig) -> VerificationRun:
    """Train on the gallery and score every probe against every gallery subject."""
    return verify(train(gallery, config), probes)
