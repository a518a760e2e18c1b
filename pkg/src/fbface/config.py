from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .baseline import DEFAULT_DROP_LEADING, DEFAULT_SEED
from .fbt import FbtConfig

MODES = ("global", "local")
CLASSIFIERS = ("pfld", "pca_baseline")
DESCRIPTOR_VARIANTS = {"raw_372": "raw", "magnitude_186": "magnitude"}
OCCLUSION_VARIANTS = ("eye_mouth", "mouth_nose")


@dataclass(frozen=True)
class EyeNoise:
    mean: float = 3.6
    sd: float = 5.1
    seed: int = 0
    shared: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "global"
    fbt: FbtConfig = field(default_factory=FbtConfig)
    occlusion: str | None = None
    eye_noise: EyeNoise | None = None
    classifier: str = "pfld"
    descriptor_variant: str = "raw_372"
    output_dir: str = "fbface-out"
    pca_sample_size: int | None = None
    pca_drop_leading: int = DEFAULT_DROP_LEADING
    pca_seed: int = DEFAULT_SEED
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"classifier must be one of {CLASSIFIERS}")
        if self.descriptor_variant not in DESCRIPTOR_VARIANTS:
            raise ValueError(f"descriptor_variant must be one of {tuple(DESCRIPTOR_VARIANTS)}")
        if self.occlusion is not None and self.occlusion not in OCCLUSION_VARIANTS:
            raise ValueError(f"occlusion must be one of {OCCLUSION_VARIANTS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def flatten_variant(self) -> str:
        return DESCRIPTOR_VARIANTS[self.descriptor_variant]

    def feature_settings(self) -> dict:
        """Settings that determine the feature vectors a model is trained on."""
        if self.classifier == "pca_baseline":
            return {
                "classifier": "pca_baseline",
                "fbt": "ignored",
                "mode": "ignored",
                "descriptor_variant": "ignored",
                "pca_sample_size": self.pca_sample_size,
                "pca_drop_leading": self.pca_drop_leading,
                "pca_seed": self.pca_seed,
            }
        return {
            "classifier": self.classifier,
            "mode": self.mode,
            "fbt": self.fbt.as_dict(),
            "descriptor_variant": self.descriptor_variant,
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.feature_settings(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def as_dict(self) -> dict:
        out = self.feature_settings()
        out.update(
            occlusion=self.occlusion,
            eye_noise=None
            if self.eye_noise is None
            else {
                "mean": self.eye_noise.mean,
                "sd": self.eye_noise.sd,
                "seed": self.eye_noise.seed,
                "shared": self.eye_noise.shared,
            },
            output_dir=self.output_dir,
            workers=self.workers,
            fingerprint=self.fingerprint(),
        )
        return out
