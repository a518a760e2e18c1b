import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbface.face import (
    FRAME_HEIGHT,
    FRAME_WIDTH,
    LEFT_EYE_TARGET,
    LOCAL_REGIONS,
    OCCLUSIONS,
    RIGHT_EYE_TARGET,
    EyeCoordinates,
    NormalizedFace,
    RegistrationError,
    equalize,
    extract_descriptor,
    face_mask,
    mean_eyes,
    normalize,
    occlude,
    occluded_fraction,
    occlusion_mask,
    perturb_eyes,
    register,
    warp_to_frame,
)
from fbface.synth import render_image, subject_blobs

TARGET_EYES = EyeCoordinates(left=LEFT_EYE_TARGET, right=RIGHT_EYE_TARGET)


def smooth_field(rng, h, w):
    y, x = np.mgrid[0:h, 0:w].astype(float)
    out = np.zeros((h, w))
    for _ in range(6):
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        s = rng.uniform(15, 40)
        out += rng.normal() * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * s * s))
    return out


@pytest.fixture(scope="module")
def synthetic_face():
    img, eyes = render_image(subject_blobs(3, 1), 0.0, np.random.default_rng(0))
    return img, eyes


def test_identity_registration_reproduces_source_window():
    rng = np.random.default_rng(1)
    src = smooth_field(rng, FRAME_HEIGHT, FRAME_WIDTH)
    crop = warp_to_frame(src, TARGET_EYES)
    assert crop.shape == (FRAME_HEIGHT, FRAME_WIDTH)
    assert np.max(np.abs(crop - src)) <= 1e-6


def rotate_about(image, center, angle_deg):
    """Rotate a raster about ``center`` with the library's own bilinear sampler."""
    from fbface.imaging import bilinear

    h, w = image.shape
    v, u = np.mgrid[0:h, 0:w].astype(float)
    z = (u + 1j * v) - complex(*center)
    src = z * np.exp(-1j * np.deg2rad(angle_deg)) + complex(*center)
    return bilinear(image, src.real, src.imag)


def test_rotated_input_registers_to_same_face(synthetic_face):
    img, eyes = synthetic_face
    mid = ((eyes.left[0] + eyes.right[0]) / 2, (eyes.left[1] + eyes.right[1]) / 2)
    rotated = rotate_about(img, mid, 10.0)
    rot = np.exp(1j * np.deg2rad(10.0))

    def turn(p):
        z = (complex(*p) - complex(*mid)) * rot + complex(*mid)
        return (z.real, z.imag)

    eyes_rot = EyeCoordinates(left=turn(eyes.left), right=turn(eyes.right))
    a = register(img, eyes)
    b = register(rotated, eyes_rot)
    levels = np.abs(a.image - b.image)[a.mask] * a.level_sd
    assert levels.mean() <= 2.0


def test_normalized_face_statistics(synthetic_face):
    face = register(*synthetic_face)
    vals = face.image[face.mask]
    assert face.image.shape == (150, 130)
    assert abs(vals.mean()) <= 1e-6
    assert abs(vals.std() - 1.0) <= 1e-6
    assert np.all(face.image[~face.mask] == 0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_normalization_contract_random_inputs(seed):
    rng = np.random.default_rng(seed)
    face = normalize(rng.uniform(0, 255, (FRAME_HEIGHT, FRAME_WIDTH)))
    vals = face.image[face.mask]
    assert abs(vals.mean()) <= 1e-6
    assert abs(vals.std() - 1.0) <= 1e-6


def test_equalization_is_monotone():
    rng = np.random.default_rng(2)
    x = rng.gamma(2.0, 10.0, 5000)
    y = equalize(x)
    order = np.argsort(x)
    assert np.all(np.diff(y[order]) >= 0)
    assert y.min() == 0.0 and y.max() == 1.0


def test_flat_face_is_rejected():
    with pytest.raises(RegistrationError):
        normalize(np.full((FRAME_HEIGHT, FRAME_WIDTH), 7.0))


@pytest.mark.parametrize(
    "eyes",
    [
        EyeCoordinates(left=(104.0, 100.0), right=(100.0, 100.0)),
        EyeCoordinates(left=(400.0, 100.0), right=(100.0, 100.0)),
    ],
)
def test_bad_eyes_are_rejected(eyes):
    with pytest.raises(RegistrationError):
        register(np.random.default_rng(0).uniform(0, 255, (200, 200)), eyes)


def test_descriptor_lengths_and_zero_face():
    zero = NormalizedFace(image=np.zeros((FRAME_HEIGHT, FRAME_WIDTH)), mask=face_mask())
    g = extract_descriptor(zero, "global")
    loc = extract_descriptor(zero, "local")
    assert g.shape == (372,) and loc.shape == (1116,)
    assert not g.any() and not loc.any()


def test_local_descriptor_concatenates_regions_in_order(synthetic_face):
    from fbface.fbt import FbtConfig, fbt_forward, flatten

    face = register(*synthetic_face)
    loc = extract_descriptor(face, "local")
    assert [r.name for r in LOCAL_REGIONS] == ["right_eye", "between_eyes", "left_eye"]
    for k, region in enumerate(LOCAL_REGIONS):
        part = flatten(fbt_forward(face.image, region.center, FbtConfig(radius=region.radius)))
        np.testing.assert_array_equal(loc[372 * k : 372 * (k + 1)], part)


@pytest.mark.parametrize("variant", sorted(OCCLUSIONS))
def test_occlusion_covers_more_than_half(variant):
    assert occluded_fraction(variant) > 0.5


@pytest.mark.parametrize("variant", sorted(OCCLUSIONS))
def test_occlusion_idempotent_and_local(variant, synthetic_face):
    face = register(*synthetic_face)
    once = occlude(face, variant)
    twice = occlude(once, variant)
    np.testing.assert_array_equal(once.image, twice.image)
    blocked = occlusion_mask(variant)
    assert np.all(once.image[blocked] == 0.0)
    np.testing.assert_array_equal(once.image[~blocked], face.image[~blocked])
    assert np.array_equal(once.occluded, blocked)


def test_occluding_zero_face_changes_nothing():
    zero = NormalizedFace(image=np.zeros((FRAME_HEIGHT, FRAME_WIDTH)), mask=face_mask())
    np.testing.assert_array_equal(occlude(zero, "eye_mouth").image, zero.image)


def test_eye_mouth_blocks_right_eye_region_only():
    m = occlusion_mask("eye_mouth")
    assert m[int(RIGHT_EYE_TARGET[1]), int(RIGHT_EYE_TARGET[0])]
    assert not m[int(LEFT_EYE_TARGET[1]), int(LEFT_EYE_TARGET[0])]


def test_zero_perturbation_is_identity():
    assert perturb_eyes(TARGET_EYES, (0.0, 0.0), seed=4) == TARGET_EYES


def test_perturbation_deterministic():
    assert perturb_eyes(TARGET_EYES, seed=11) == perturb_eyes(TARGET_EYES, seed=11)
    assert perturb_eyes(TARGET_EYES, seed=11) != perturb_eyes(TARGET_EYES, seed=12)


@pytest.mark.parametrize("shared", [0.0, 0.5, 1.0])
def test_perturbation_magnitude_statistics(shared):
    mags = []
    for seed in range(10_000):
        e = perturb_eyes(TARGET_EYES, (3.6, 5.1), seed=seed, shared=shared)
        mags.append(np.hypot(e.left[0] - TARGET_EYES.left[0], e.left[1] - TARGET_EYES.left[1]))
        mags.append(np.hypot(e.right[0] - TARGET_EYES.right[0], e.right[1] - TARGET_EYES.right[1]))
    mags = np.array(mags)
    assert abs(mags.mean() - 3.6) <= 0.36
    assert abs(mags.std() - 5.1) <= 0.51


def test_shared_perturbation_moves_both_eyes_together():
    e = perturb_eyes(TARGET_EYES, seed=5, shared=1.0)
    dl = np.subtract(e.left, TARGET_EYES.left)
    dr = np.subtract(e.right, TARGET_EYES.right)
    np.testing.assert_allclose(dl, dr, atol=1e-12)


def test_mean_eyes_fills_from_located():
    rng = np.random.default_rng(7)
    located = [
        EyeCoordinates(left=tuple(rng.uniform(60, 70, 2)), right=tuple(rng.uniform(20, 30, 2))) for _ in range(10)
    ]
    m = mean_eyes(located)
    np.testing.assert_allclose(m.left, np.mean([e.left for e in located], axis=0))
    np.testing.assert_allclose(m.right, np.mean([e.right for e in located], axis=0))

