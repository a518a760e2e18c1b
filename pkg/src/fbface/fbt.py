"""Discrete Fourier-Bessel transform of a disk-shaped image region.

A region of radius ``R`` is resampled onto a regular polar grid and
projected onto the basis ``J_n(alpha_ni * r / R) * {cos, sin}(n * theta)``.
The integrals are evaluated with a Riemann sum on radial nodes
``r_k = k * R / K`` (``k = 1..K``) and angles ``theta_j = j * dtheta``.  The
outermost node sits on the rim where the boundary condition forces the
sample to zero, so the sum coincides with the composite trapezoid rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .bessel import jv_array, root_table
from .imaging import as_raster, bilinear


@dataclass(frozen=True)
class FbtConfig:
    """Truncation and sampling parameters of the transform.

    ``radius`` may be left as ``None`` and filled per region by the caller;
    ``radial_samples`` defaults to ``ceil(radius)``.
    """

    max_order: int = 30
    max_root: int = 6
    angular_step: float = 3.0
    radial_samples: int | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.max_order < 0:
            raise ValueError("max_order must be >= 0")
        if self.max_root < 1:
            raise ValueError("max_root must be >= 1")
        steps = 360.0 / self.angular_step
        if self.angular_step <= 0 or abs(steps - round(steps)) > 1e-9:
            raise ValueError(f"360 is not divisible by angular_step={self.angular_step}")
        if self.radial_samples is not None and self.radial_samples < 8:
            raise ValueError("radial_samples must be >= 8")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def angular_samples(self) -> int:
        return int(round(360.0 / self.angular_step))

    def resolved_radial_samples(self, radius: float | None = None) -> int:
        if self.radial_samples is not None:
            return self.radial_samples
        return max(8, math.ceil(self._radius(radius)))

    def _radius(self, radius: float | None = None) -> float:
        r = self.radius if radius is None else radius
        if r is None:
            raise ValueError("FbtConfig.radius is unset")
        return float(r)

    def with_radius(self, radius: float) -> "FbtConfig":
        return replace(self, radius=float(radius))

    @property
    def n_coeffs(self) -> int:
        return 2 * (self.max_order + 1) * self.max_root

    def as_dict(self) -> dict:
        return {
            "max_order": self.max_order,
            "max_root": self.max_root,
            "angular_step": self.angular_step,
            "radial_samples": self.radial_samples,
            "radius": self.radius,
        }


@dataclass(frozen=True)
class PolarGrid:
    """Samples ``values[k, j]`` at radius ``radii[k]`` and angle ``thetas[j]``."""

    radii: np.ndarray
    thetas: np.ndarray
    values: np.ndarray
    radius: float


@dataclass(frozen=True)
class FbtDescriptor:
    a_coeffs: np.ndarray
    b_coeffs: np.ndarray
    config: FbtConfig = field(default_factory=FbtConfig)

    def __post_init__(self):
        shape = (self.config.max_order + 1, self.config.max_root)
        if self.a_coeffs.shape != shape or self.b_coeffs.shape != shape:
            raise ValueError(f"coefficient blocks must have shape {shape}")


def polar_nodes(config: FbtConfig, radius: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    big_r = config._radius(radius)
    k = config.resolved_radial_samples(big_r)
    radii = big_r * np.arange(1, k + 1) / k
    thetas = 2.0 * np.pi * np.arange(config.angular_samples) / config.angular_samples
    return radii, thetas


def to_polar(image, center, config: FbtConfig) -> PolarGrid:
    """Resample the disk of radius ``config.radius`` about ``center = (x, y)``.

    Raises
    ------
    ValueError
        If the disk leaves the raster.
    """
    image = as_raster(image)
    big_r = config._radius()
    cx, cy = float(center[0]), float(center[1])
    h, w = image.shape
    if not (0.0 <= cx <= w - 1 and 0.0 <= cy <= h - 1):
        raise ValueError(f"center {center} lies outside the {w}x{h} raster")
    slack = 1e-9
    if (
        cx - big_r < -0.5 - slack
        or cx + big_r > w - 0.5 + slack
        or cy - big_r < -0.5 - slack
        or cy + big_r > h - 0.5 + slack
    ):
        raise ValueError(f"radius {big_r} around {center} exceeds the {w}x{h} raster")
    radii, thetas = polar_nodes(config)
    xs = cx + radii[:, None] * np.cos(thetas)[None, :]
    ys = cy + radii[:, None] * np.sin(thetas)[None, :]
    values = bilinear(image, xs, ys)
    values[-1, :] = 0.0
    return PolarGrid(radii=radii, thetas=thetas, values=values, radius=big_r)


@lru_cache(maxsize=64)
def _basis(max_order: int, max_root: int, radius: float, n_radial: int, n_angular: int):
    """Radial table ``J_n(alpha_ni r_k / R)`` with shape ``(n, i, k)``, trig tables and norms."""
    alpha = root_table(max_order, max_root)
    radii = radius * np.arange(1, n_radial + 1) / n_radial
    thetas = 2.0 * np.pi * np.arange(n_angular) / n_angular
    radial = np.empty((max_order + 1, max_root, n_radial))
    norms = np.empty((max_order + 1, max_root))
    for n in range(max_order + 1):
        for i in range(max_root):
            radial[n, i] = jv_array(n, alpha[n, i] * radii / radius)
        edge = jv_array(n + 1, alpha[n])
        norms[n] = (1.0 if n == 0 else 2.0) / (np.pi * radius**2 * edge**2)
    orders = np.arange(max_order + 1)
    cos = np.cos(np.outer(orders, thetas))
    sin = np.sin(np.outer(orders, thetas))
    for arr in (radial, norms, cos, sin):
        arr.setflags(write=False)
    return radial, norms, cos, sin


def _tables(config: FbtConfig, radius: float):
    return _basis(
        config.max_order,
        config.max_root,
        float(radius),
        config.resolved_radial_samples(radius),
        config.angular_samples,
    )


def fbt_from_polar(grid: PolarGrid, config: FbtConfig) -> FbtDescriptor:
    radial, norms, cos, sin = _tables(config, grid.radius)
    d_r = grid.radius / grid.radii.size
    d_theta = 2.0 * np.pi / grid.thetas.size
    weighted = grid.values * (grid.radii * d_r * d_theta)[:, None]
    proj_cos = weighted @ cos.T
    proj_sin = weighted @ sin.T
    a = norms * np.einsum("nik,kn->ni", radial, proj_cos)
    b = norms * np.einsum("nik,kn->ni", radial, proj_sin)
    b[0, :] = 0.0
    return FbtDescriptor(a_coeffs=a, b_coeffs=b, config=config.with_radius(grid.radius))


def fbt_forward(image, center, config: FbtConfig) -> FbtDescriptor:
    """Fourier-Bessel coefficients of the disk about ``center``."""
    return fbt_from_polar(to_polar(image, center, config), config)


def fbt_inverse(descriptor: FbtDescriptor) -> PolarGrid:
    """Evaluate the truncated series on the descriptor's polar grid."""
    config = descriptor.config
    big_r = config._radius()
    radial, _, cos, sin = _tables(config, big_r)
    radii, thetas = polar_nodes(config)
    values = np.einsum("ni,nik,nj->kj", descriptor.a_coeffs, radial, cos)
    values += np.einsum("ni,nik,nj->kj", descriptor.b_coeffs, radial, sin)
    return PolarGrid(radii=radii, thetas=thetas, values=values, radius=big_r)


def flatten(descriptor: FbtDescriptor, variant: str = "raw") -> np.ndarray:
    """Feature vector: A block then B block, each ``n``-major.

    ``variant="magnitude"`` returns ``sqrt(A**2 + B**2)`` per ``(n, i)`` instead.
    """
    if variant == "raw":
        return np.concatenate([descriptor.a_coeffs.ravel(), descriptor.b_coeffs.ravel()])
    if variant == "magnitude":
        return np.hypot(descriptor.a_coeffs, descriptor.b_coeffs).ravel()
    raise ValueError(f"unknown descriptor variant {variant!r}")


def unflatten(vector, config: FbtConfig) -> FbtDescriptor:
    vector = np.asarray(vector, dtype=float)
    if vector.size != config.n_coeffs:
        raise ValueError(f"expected {config.n_coeffs} values, got {vector.size}")
    half = vector.size // 2
    shape = (config.max_order + 1, config.max_root)
    return FbtDescriptor(vector[:half].reshape(shape).copy(), vector[half:].reshape(shape).copy(), config)
