"""Deterministic synthetic face-like datasets.

Each subject is a smooth field of Gaussian blobs laid out in a face frame
whose origin is the eye midpoint and whose unit is the interocular
distance.  Images are rendered analytically under a random similarity pose,
so eye coordinates are exact.  Every source of within-subject variation
(pose, blob jitter, pixel noise) scales with ``noise_sd``; at
``noise_sd = 0`` all images of a subject are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .face import EyeCoordinates

IMAGE_WIDTH = 256
IMAGE_HEIGHT = 384
BASE_EYE_MID = (128.0, 170.0)
BASE_INTEROCULAR = 56.0


@dataclass(frozen=True)
class SynthOptions:
    """Within-subject variation per unit of ``noise_sd``.

    ``pose_shift`` and ``pose_scale`` are in face units, ``pose_rotation``
    in degrees, ``blob_jitter`` is relative amplitude jitter and
    ``blob_shift`` is positional jitter in face units.  Jitter of blobs
    below the nose is multiplied by ``expression`` (mouth and cheeks move
    with expression, the eye region does not).  ``eye_detail`` fine blobs
    per eye give each subject periocular texture.
    """

    pose_shift: float = 1.0
    pose_rotation: float = 100.0
    pose_scale: float = 2.0
    blob_jitter: float = 10.0
    blob_shift: float = 1.5
    expression: float = 5.0
    subject_blobs: int = 16
    eye_detail: int = 4


@dataclass(frozen=True)
class Blob:
    x: float
    y: float
    sx: float
    sy: float
    amp: float


def _face_blobs(rng: np.random.Generator, n_random: int, n_detail: int = 0) -> list[Blob]:
    def v(scale):
        return 1.0 + scale * rng.normal()

    blobs = [
        Blob(0.0, 0.45, 1.15 * v(0.05), 1.55 * v(0.05), 0.35 * v(0.1)),
        Blob(-0.5, 0.0, 0.13 * v(0.15), 0.08 * v(0.15), -0.45 * v(0.15)),
        Blob(0.5, 0.0, 0.13 * v(0.15), 0.08 * v(0.15), -0.45 * v(0.15)),
        Blob(-0.5 + 0.05 * rng.normal(), -0.28 * v(0.2), 0.22 * v(0.15), 0.05 * v(0.2), -0.3 * v(0.2)),
        Blob(0.5 + 0.05 * rng.normal(), -0.28 * v(0.2), 0.22 * v(0.15), 0.05 * v(0.2), -0.3 * v(0.2)),
        Blob(0.0, 0.55 * v(0.08), 0.09 * v(0.2), 0.22 * v(0.2), 0.12 * v(0.3)),
        Blob(0.0, 0.98 * v(0.06), 0.32 * v(0.15), 0.07 * v(0.2), -0.3 * v(0.2)),
    ]
    for _ in range(n_random):
        blobs.append(
            Blob(
                rng.uniform(-0.9, 0.9),
                rng.uniform(-0.5, 1.4),
                rng.uniform(0.07, 0.22),
                rng.uniform(0.07, 0.22),
                0.2 * rng.normal(),
            )
        )
    # fine periocular texture, resolved by small regions only
    for side in (-0.5, 0.5):
        for _ in range(n_detail):
            blobs.append(
                Blob(
                    side + rng.uniform(-0.3, 0.3),
                    rng.uniform(-0.3, 0.25),
                    rng.uniform(0.035, 0.07),
                    rng.uniform(0.035, 0.07),
                    0.25 * rng.normal(),
                )
            )
    return blobs


def subject_blobs(seed: int, subject: int, options: SynthOptions = SynthOptions()) -> list[Blob]:
    return _face_blobs(np.random.default_rng([seed, subject, 0]), options.subject_blobs, options.eye_detail)


def _render(blobs, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    out = np.full(fx.shape, 0.25)
    for b in blobs:
        out += b.amp * np.exp(-0.5 * (((fx - b.x) / b.sx) ** 2 + ((fy - b.y) / b.sy) ** 2))
    return out


def render_image(
    blobs,
    noise_sd: float,
    rng: np.random.Generator,
    options: SynthOptions = SynthOptions(),
) -> tuple[np.ndarray, EyeCoordinates]:
    """Render one image of a subject and its exact eye coordinates (0..255 scale)."""
    jittered = []
    for b in blobs:
        gain = 1.0 + (options.expression - 1.0) / (1.0 + np.exp(-(b.y - 0.5) / 0.1))
        jittered.append(
            Blob(
                b.x + gain * options.blob_shift * noise_sd * rng.normal(),
                b.y + gain * options.blob_shift * noise_sd * rng.normal(),
                b.sx,
                b.sy,
                b.amp * (1.0 + gain * options.blob_jitter * noise_sd * rng.normal()),
            )
        )
    angle = np.deg2rad(options.pose_rotation * noise_sd * rng.normal())
    scale = BASE_INTEROCULAR * (1.0 + options.pose_scale * noise_sd * rng.normal())
    shift = BASE_INTEROCULAR * options.pose_shift * noise_sd * rng.normal(size=2)
    mid = complex(BASE_EYE_MID[0] + shift[0], BASE_EYE_MID[1] + shift[1])
    rot = scale * np.exp(1j * angle)

    y, x = np.mgrid[0:IMAGE_HEIGHT, 0:IMAGE_WIDTH].astype(float)
    face = ((x + 1j * y) - mid) / rot
    image = _render(jittered, face.real, face.imag)
    image += noise_sd * rng.normal(size=image.shape)
    image = np.clip(image, 0.0, 1.0) * 255.0

    right = mid + rot * complex(-0.5, 0.0)
    left = mid + rot * complex(0.5, 0.0)
    eyes = EyeCoordinates(left=(left.real, left.imag), right=(right.real, right.imag))
    return image, eyes


def generate(subjects: int, images_per_subject: int, noise_sd: float, seed: int, options=SynthOptions()):
    """Yield ``(subject, index, image, eyes)`` for every synthetic image."""
    if subjects < 2:
        raise ValueError("need at least 2 subjects")
    if images_per_subject < 1:
        raise ValueError("need at least 1 image per subject")
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    for s in range(subjects):
        blobs = subject_blobs(seed, s, options)
        for k in range(images_per_subject):
            rng = np.random.default_rng([seed, s, k + 1])
            image, eyes = render_image(blobs, noise_sd, rng, options)
            yield s, k, image, eyes
