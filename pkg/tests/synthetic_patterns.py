"""Analytic Fourier-Bessel test patterns, built with scipy's Bessel routines."""

import numpy as np
import scipy.special as sp

from fbface.fbt import polar_nodes


def _terms(rng, count, max_order=30, max_root=6):
    out = []
    for _ in range(count):
        n = int(rng.integers(0, max_order + 1))
        i = int(rng.integers(0, max_root))
        a, b = rng.normal(size=2)
        out.append((n, i, a, 0.0 if n == 0 else b))
    return out


def _evaluate(terms, r, theta, radius):
    out = np.zeros(np.broadcast(r, theta).shape)
    inside = r <= radius
    for n, i, a, b in terms:
        alpha = sp.jn_zeros(n, i + 1)[i]
        radial = np.where(inside, sp.jv(n, alpha * np.minimum(r, radius) / radius), 0.0)
        out += radial * (a * np.cos(n * theta) + b * np.sin(n * theta))
    return out


def _raster_coords(size):
    c = (size - 1) / 2
    y, x = np.mgrid[0:size, 0:size].astype(float)
    return np.hypot(x - c, y - c), np.arctan2(y - c, x - c)


def basis_image(n, i, radius, size, a=1.0, b=0.0):
    r, t = _raster_coords(size)
    return _evaluate([(n, i, a, b)], r, t, radius)


def band_limited(rng, radius, size, config, count=5, max_root=6):
    """Raster of ``count`` random basis terms and its exact values on the polar grid."""
    terms = _terms(rng, count, max_root=max_root)
    r, t = _raster_coords(size)
    radii, thetas = polar_nodes(config, radius)
    exact = _evaluate(terms, radii[:, None], thetas[None, :], radius)
    return _evaluate(terms, r, t, radius), exact


def rotated_band_limited(rng, radius, size, phi, count=5):
    terms = _terms(rng, count)
    r, t = _raster_coords(size)
    return _evaluate(terms, r, t, radius), _evaluate(terms, r, t - phi, radius)
