import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbface.baseline import DEFAULT_DROP_LEADING, EPS, load_pca, pca_match_scores, save_pca, train_pca


def low_rank(seed, n=40, dim=300, rank=12):
    rng = np.random.default_rng(seed)
    scales = np.geomspace(50.0, 1.0, rank)
    return 10.0 + (rng.normal(size=(n, rank)) * scales) @ np.linalg.qr(rng.normal(size=(dim, rank)))[0].T


@pytest.fixture(scope="module")
def model():
    return train_pca(low_rank(0))


def test_drops_three_leading_components_by_default(model):
    assert DEFAULT_DROP_LEADING == 3
    assert model.drop_leading == 3
    assert model.projection_dim == model.components.shape[0] - 3
    np.testing.assert_array_equal(model.retained, model.components[3:])


def test_components_orthonormal(model):
    c = model.components
    assert np.max(np.abs(c @ c.T - np.eye(len(c)))) <= 1e-8


def test_eigenvalues_descending_and_match_svd(model):
    x = low_rank(0)
    s = np.linalg.svd(x - x.mean(axis=0), compute_uv=False)
    expected = s[: len(model.eigenvalues)] ** 2 / (len(x) - 1)
    assert np.all(np.diff(model.eigenvalues) <= 0)
    np.testing.assert_allclose(model.eigenvalues, expected, rtol=1e-9)


def test_mean_face_projects_to_zero(model):
    assert np.max(np.abs(model.project(model.mean_face))) <= 1e-9


def test_low_rank_reconstruction():
    x = low_rank(1)
    m = train_pca(x, drop_leading=0)
    coeffs = m.project(x)
    recon = m.mean_face + coeffs @ m.retained
    rel = np.sqrt(np.mean((recon - x) ** 2)) / np.sqrt(np.mean(x**2))
    assert rel <= 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0, 1, 2]), st.floats(-1e3, 1e3))
def test_excluded_components_do_not_affect_scores(seed, which, amount):
    x = low_rank(2)
    m = train_pca(x)
    rng = np.random.default_rng(seed)
    probes = x[:5] + rng.normal(size=(5, x.shape[1]))
    base = pca_match_scores(m, x, probes)
    moved = pca_match_scores(m, x, probes + amount * m.components[which])
    assert np.max(np.abs(moved - base)) <= 1e-8


def test_probe_equal_to_gallery_image_scores_highest(model):
    x = low_rank(0)
    s = pca_match_scores(model, x, x[:10])
    assert np.array_equal(np.argmax(s, axis=1), np.arange(10))


def test_hand_computed_pair(model):
    x = low_rank(0)
    g, p = x[0], x[1]
    d = np.linalg.norm(model.retained @ (p - model.mean_face) - model.retained @ (g - model.mean_face))
    assert pca_match_scores(model, g, p)[0, 0] == pytest.approx(1.0 / (EPS + d), rel=1e-12)


def test_sampling_is_seeded():
    x = low_rank(3, n=60)
    a = train_pca(x, sample_size=30, seed=1998)
    b = train_pca(x, sample_size=30, seed=1998)
    c = train_pca(x, sample_size=30, seed=7)
    np.testing.assert_array_equal(a.sample_indices, b.sample_indices)
    assert not np.array_equal(a.sample_indices, c.sample_indices)


@pytest.mark.parametrize("kwargs", [{"sample_size": 1}, {"sample_size": 41}, {"drop_leading": -1}, {"drop_leading": 40}])
def test_invalid_arguments(kwargs):
    with pytest.raises(ValueError):
        train_pca(low_rank(0), **kwargs)


def test_container_round_trip(tmp_path, model):
    x = low_rank(0)
    save_pca(model, tmp_path / "p.npz", x, labels=[f"s{i}" for i in range(len(x))], fingerprint="fp")
    back, gallery, meta = load_pca(tmp_path / "p.npz")
    np.testing.assert_array_equal(back.components, model.components)
    np.testing.assert_array_equal(gallery, x)
    assert meta["fingerprint"] == "fp" and meta["labels"][3] == "s3"
