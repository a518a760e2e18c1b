"""Face registration, normalisation, region descriptors and degradations.

All geometry is in pixels with the origin at the top-left, ``x`` to the
right and ``y`` downward.  "Right eye" means the subject's right eye, which
appears on the image's left.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .fbt import FbtConfig, fbt_forward, flatten
from .imaging import as_raster, bilinear

FRAME_WIDTH = 130
FRAME_HEIGHT = 150
RIGHT_EYE_TARGET = (43.0, 60.0)
LEFT_EYE_TARGET = (87.0, 60.0)
MIN_EYE_DISTANCE = 8.0

MASK_CENTER = (65.0, 80.0)
MASK_AXES = (58.0, 70.0)
HIST_BINS = 256

# (x0, x1, y0, y1), half-open pixel ranges in the normalised frame
RIGHT_EYE_BOX = (0, 65, 28, 92)
MOUTH_BOX = (15, 115, 98, 150)
NOSE_BOX = (35, 95, 52, 98)
OCCLUSIONS = {
    "eye_mouth": (RIGHT_EYE_BOX, MOUTH_BOX),
    "mouth_nose": (MOUTH_BOX, NOSE_BOX),
}
MIN_OCCLUDED_FRACTION = 0.5


class RegistrationError(ValueError):
    pass


@dataclass(frozen=True)
class EyeCoordinates:
    left: tuple[float, float]
    right: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "left", (float(self.left[0]), float(self.left[1])))
        object.__setattr__(self, "right", (float(self.right[0]), float(self.right[1])))
        if self.left == self.right:
            raise ValueError("left and right eye coincide")

    @property
    def distance(self) -> float:
        return float(np.hypot(self.left[0] - self.right[0], self.left[1] - self.right[1]))

    def inside(self, width: int, height: int) -> bool:
        return all(0 <= x <= width - 1 and 0 <= y <= height - 1 for x, y in (self.left, self.right))


@dataclass(frozen=True)
class RegionSpec:
    name: str
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        cx, cy = self.center
        r = self.radius
        if cx - r < -0.5 or cx + r > FRAME_WIDTH - 0.5 or cy - r < -0.5 or cy + r > FRAME_HEIGHT - 0.5:
            raise ValueError(f"region {self.name!r} does not fit the {FRAME_WIDTH}x{FRAME_HEIGHT} frame")

    def disk(self) -> np.ndarray:
        v, u = np.mgrid[0:FRAME_HEIGHT, 0:FRAME_WIDTH]
        return (u - self.center[0]) ** 2 + (v - self.center[1]) ** 2 <= (self.radius + 1.0) ** 2


LOCAL_RADIUS = 28.0
WHOLE_FACE = RegionSpec("whole", ((FRAME_WIDTH - 1) / 2, (FRAME_HEIGHT - 1) / 2), FRAME_WIDTH / 2)
LOCAL_REGIONS = (
    RegionSpec("right_eye", RIGHT_EYE_TARGET, LOCAL_RADIUS),
    RegionSpec(
        "between_eyes",
        ((RIGHT_EYE_TARGET[0] + LEFT_EYE_TARGET[0]) / 2, (RIGHT_EYE_TARGET[1] + LEFT_EYE_TARGET[1]) / 2),
        LOCAL_RADIUS,
    ),
    RegionSpec("left_eye", LEFT_EYE_TARGET, LOCAL_RADIUS),
)


def face_mask() -> np.ndarray:
    v, u = np.mgrid[0:FRAME_HEIGHT, 0:FRAME_WIDTH]
    return ((u - MASK_CENTER[0]) / MASK_AXES[0]) ** 2 + ((v - MASK_CENTER[1]) / MASK_AXES[1]) ** 2 <= 1.0


@dataclass(frozen=True)
class NormalizedFace:
    """A registered ``150 x 130`` (rows x cols) face.

    ``mask`` marks retained pixels; ``occluded`` marks pixels blanked by an
    occlusion variant.  ``level_sd`` converts unit standard deviations back
    into 8-bit equalised intensity levels.
    """

    image: np.ndarray
    mask: np.ndarray
    eye_targets: tuple = (RIGHT_EYE_TARGET, LEFT_EYE_TARGET)
    occluded: np.ndarray = field(default_factory=lambda: np.zeros((FRAME_HEIGHT, FRAME_WIDTH), bool))
    level_sd: float = 1.0

    def __post_init__(self):
        if self.image.shape != (FRAME_HEIGHT, FRAME_WIDTH):
            raise ValueError(f"normalised faces are {FRAME_WIDTH}x{FRAME_HEIGHT}, got {self.image.shape[::-1]}")


def similarity_to_frame(eyes: EyeCoordinates, targets=(RIGHT_EYE_TARGET, LEFT_EYE_TARGET)):
    """Complex ``(scale, shift)`` with ``source = scale * frame + shift`` taking targets onto the eyes."""
    src_r = complex(*eyes.right)
    src_l = complex(*eyes.left)
    dst_r = complex(*targets[0])
    dst_l = complex(*targets[1])
    scale = (src_l - src_r) / (dst_l - dst_r)
    return scale, src_r - scale * dst_r


def warp_to_frame(image, eyes: EyeCoordinates) -> np.ndarray:
    """Resample ``image`` into the normalised frame, eyes landing on the targets."""
    image = as_raster(image)
    h, w = image.shape
    if not eyes.inside(w, h):
        raise RegistrationError("eye coordinates fall outside the image")
    if eyes.distance < MIN_EYE_DISTANCE:
        raise RegistrationError(f"eyes are {eyes.distance:.2f} px apart, need >= {MIN_EYE_DISTANCE}")
    scale, shift = similarity_to_frame(eyes)
    v, u = np.mgrid[0:FRAME_HEIGHT, 0:FRAME_WIDTH].astype(float)
    z = scale * (u + 1j * v) + shift
    return bilinear(image, z.real, z.imag)


def equalize(values: np.ndarray, bins: int = HIST_BINS) -> np.ndarray:
    """Histogram-equalise a 1-D sample to ``[0, 1]``; the map is non-decreasing."""
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return np.zeros_like(values)
    idx = np.minimum(((values - lo) / (hi - lo) * bins).astype(int), bins - 1)
    cdf = np.cumsum(np.bincount(idx, minlength=bins)).astype(float)
    cdf_min = cdf[cdf > 0][0]
    if cdf[-1] == cdf_min:
        return np.zeros_like(values)
    return (cdf[idx] - cdf_min) / (cdf[-1] - cdf_min)


def normalize(crop: np.ndarray, mask: np.ndarray | None = None) -> NormalizedFace:
    mask = face_mask() if mask is None else mask
    levels = equalize(crop[mask]) * (HIST_BINS - 1)
    sd = levels.std()
    if sd == 0.0:
        raise RegistrationError("face region has no intensity variation")
    out = np.zeros((FRAME_HEIGHT, FRAME_WIDTH))
    z = (levels - levels.mean()) / sd
    # second pass removes rounding residue from the first
    z = (z - z.mean()) / z.std()
    out[mask] = z
    return NormalizedFace(image=out, mask=mask, level_sd=float(sd))


def register(image, eyes: EyeCoordinates) -> NormalizedFace:
    """Align, crop, mask, equalise and standardise a face.

    Raises
    ------
    RegistrationError
        If the eyes are outside the image, closer than 8 px, or the face
        region is flat.
    """
    return normalize(warp_to_frame(image, eyes))


def extract_descriptor(
    face: NormalizedFace,
    mode: str = "global",
    config: FbtConfig | None = None,
    variant: str = "raw",
    regions=LOCAL_REGIONS,
) -> np.ndarray:
    """Whole-face descriptor or the concatenated right_eye/between_eyes/left_eye descriptors."""
    config = config or FbtConfig()
    if mode == "global":
        chosen = (WHOLE_FACE,)
    elif mode == "local":
        chosen = tuple(regions)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    parts = [
        flatten(fbt_forward(face.image, region.center, config.with_radius(region.radius)), variant)
        for region in chosen
    ]
    return np.concatenate(parts)


def occlusion_mask(variant: str) -> np.ndarray:
    try:
        boxes = OCCLUSIONS[variant]
    except KeyError:
        raise ValueError(f"unknown occlusion variant {variant!r}") from None
    v, u = np.mgrid[0:FRAME_HEIGHT, 0:FRAME_WIDTH]
    out = np.zeros((FRAME_HEIGHT, FRAME_WIDTH), bool)
    for x0, x1, y0, y1 in boxes:
        out |= (u >= x0) & (u < x1) & (v >= y0) & (v < y1)
    return out


def occluded_fraction(variant: str, mask: np.ndarray | None = None) -> float:
    mask = face_mask() if mask is None else mask
    return float(np.sum(occlusion_mask(variant) & mask) / np.sum(mask))


def apply_occlusion(face: NormalizedFace, blocked: np.ndarray) -> NormalizedFace:
    image = face.image.copy()
    image[blocked] = 0.0
    return replace(face, image=image, occluded=face.occluded | blocked)


def occlude(face: NormalizedFace, variant: str) -> NormalizedFace:
    """Grey out the eye+mouth or mouth+nose boxes (value 0, the normalised mean)."""
    frac = occluded_fraction(variant, face.mask)
    if not frac > MIN_OCCLUDED_FRACTION:
        raise AssertionError(f"{variant} occludes only {frac:.3f} of the face")
    return apply_occlusion(face, occlusion_mask(variant))


def gamma_moments(mean: float, sd: float) -> tuple[float, float]:
    """Gamma ``(shape, scale)`` matching the given mean and standard deviation."""
    return (mean / sd) ** 2, sd**2 / mean


def perturb_eyes(
    eyes: EyeCoordinates, error_model=(3.6, 5.1), seed: int = 0, shared: float = 1.0
) -> EyeCoordinates:
    """Displace each eye by a random vector with Gamma-distributed length and uniform direction.

    With probability ``shared`` both eyes receive the same displacement (a
    misplaced eye region); otherwise they are displaced independently.
    Either way each eye's displacement has the requested mean and standard
    deviation.  With ``sd == 0`` the length is fixed at ``mean``.
    """
    mean, sd = (float(v) for v in error_model)
    if mean < 0 or sd < 0:
        raise ValueError("error model needs mean >= 0 and sd >= 0")
    if mean == 0 and sd > 0:
        raise ValueError("a non-negative displacement with zero mean cannot have positive spread")
    if not 0.0 <= shared <= 1.0:
        raise ValueError("shared must be a probability")
    if mean == 0:
        return eyes
    rng = np.random.default_rng(seed)
    lengths = rng.gamma(*gamma_moments(mean, sd), size=2) if sd > 0 else np.full(2, mean)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=2)
    shift = lengths * np.exp(1j * angles)
    if rng.uniform() < shared:
        shift[1] = shift[0]
    return EyeCoordinates(
        left=(eyes.left[0] + shift[0].real, eyes.left[1] + shift[0].imag),
        right=(eyes.right[0] + shift[1].real, eyes.right[1] + shift[1].imag),
    )


def clamp_eyes(eyes: EyeCoordinates, width: int, height: int) -> EyeCoordinates:
    def clip(p):
        return (min(max(p[0], 0.0), width - 1.0), min(max(p[1], 0.0), height - 1.0))

    return EyeCoordinates(left=clip(eyes.left), right=clip(eyes.right))


def mean_eyes(located) -> EyeCoordinates:
    """Average of located eye pairs, used for faces whose eyes were not found."""
    pts = np.array([[e.left[0], e.left[1], e.right[0], e.right[1]] for e in located], dtype=float)
    if pts.size == 0:
        raise ValueError("no located faces to average")
    m = pts.mean(axis=0)
    return EyeCoordinates(left=(m[0], m[1]), right=(m[2], m[3]))
