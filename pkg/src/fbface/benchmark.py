"""Frozen synthetic benchmark for the occlusion and eye-localization comparisons.

Twenty subjects with five images each (one gallery image, four probes),
within-subject noise ``0.02`` of the blob amplitude scale, seed ``0``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .config import EyeNoise, ExperimentConfig
from .dataset import synth_dataset
from .experiment import preprocess, train, verify
from .synth import SynthOptions
from .verification import build_roc

SUBJECTS = 20
IMAGES_PER_SUBJECT = 5
NOISE_SD = 0.02
SEED = 0
OPTIONS = SynthOptions()
PF = 0.10
EYE_NOISE = EyeNoise(mean=3.6, sd=5.1, seed=SEED)


@dataclass(frozen=True)
class Outcome:
    mode: str
    occlusion: str | None
    eye_noise: bool
    pv: float
    eer: float


def build_dataset(root):
    return synth_dataset(Path(root), SUBJECTS, IMAGES_PER_SUBJECT, NOISE_SD, SEED, OPTIONS)


def evaluate(
    manifest, modes=("global", "local"), occlusions=(None,), eye_noise=(False,), noise: EyeNoise = EYE_NOISE, workers: int = 1
) -> list:
    """P_V at ``PF`` and EER for every combination; registration is shared across modes."""
    out = []
    for noisy in eye_noise:
        pre = preprocess(manifest, ExperimentConfig(eye_noise=noise if noisy else None, workers=workers))
        for mode in modes:
            base = ExperimentConfig(mode=mode, eye_noise=noise if noisy else None, workers=workers)
            pipeline = train(pre.gallery, base)
            for occ in occlusions:
                config = ExperimentConfig(mode=mode, occlusion=occ, eye_noise=base.eye_noise, workers=workers)
                roc = build_roc(verify(replace(pipeline, config=config), pre.probes))
                out.append(Outcome(mode, occ, noisy, roc.pv_at_pf(PF), roc.eer()))
    return out


def lookup(outcomes, mode, occlusion=None, eye_noise=False) -> Outcome:
    for o in outcomes:
        if (o.mode, o.occlusion, o.eye_noise) == (mode, occlusion, eye_noise):
            return o
    raise KeyError((mode, occlusion, eye_noise))
