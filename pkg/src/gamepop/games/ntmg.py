"""Continuous mixture game over seven Gaussian humps in the plane.

A policy is a point x with one value per hump: the Gaussian density of x
around centers evenly spaced on a circle. The payoff couples the two
players' density vectors through a fixed skew-symmetric 7x7 matrix and adds
half the difference of total densities (a transitive term rewarding
proximity to the humps); the whole payoff is antisymmetric.

``ntmg_weights`` additionally exposes the densities normalized to a
probability vector over humps, e.g. for reporting which hump a point
occupies. The payoff itself uses raw densities: normalizing them makes the
transitive term vanish identically and flattens the landscape so badly that
gradient ascent cannot travel between humps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

S_MATRIX = np.array([
    [0, 1, 1, 1, -1, -1, -1],
    [-1, 0, 1, 1, 1, -1, -1],
    [-1, -1, 0, 1, 1, 1, -1],
    [-1, -1, -1, 0, 1, 1, 1],
    [1, -1, -1, -1, 0, 1, 1],
    [1, 1, -1, -1, -1, 0, 1],
    [1, 1, 1, -1, -1, -1, 0],
], dtype=float)


@dataclass(frozen=True)
class NtmgConfig:
    num_humps: int = 7
    center_radius: float = 5.0
    # Neighboring centers sit ~2.9 sigma apart at this default: humps stay
    # distinct but the terrain between them keeps usable gradients.
    gaussian_sigma: float = 1.5
    plane_bound: float = 10.0

    def __post_init__(self):
        if self.num_humps != 7:
            raise ValueError("num_humps must be 7 to match the cyclic matrix")
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be positive")

    def centers(self) -> np.ndarray:
        angles = 2.0 * np.pi * np.arange(self.num_humps) / self.num_humps
        return self.center_radius * np.stack(
            [np.cos(angles), np.sin(angles)], axis=1)


def ntmg_densities(x, cfg: NtmgConfig) -> np.ndarray:
    """Per-hump Gaussian density of point x: exp(-|x - mu_k|^2 / 2 sigma^2)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("point coordinates must be finite")
    d2 = np.sum((cfg.centers() - x) ** 2, axis=1)
    return np.exp(-d2 / (2.0 * cfg.gaussian_sigma ** 2))


def ntmg_weights(x, cfg: NtmgConfig) -> np.ndarray:
    """Hump weights of point x normalized to a 7-simplex."""
    w = ntmg_densities(x, cfg)
    return w / w.sum()


def ntmg_payoff(x_i, x_neg, cfg: NtmgConfig) -> float:
    """Antisymmetric payoff d_i' S d_-i + (sum d_i - sum d_-i) / 2 over the
    players' raw hump densities."""
    d_i = ntmg_densities(x_i, cfg)
    d_n = ntmg_densities(x_neg, cfg)
    return float(d_i @ S_MATRIX @ d_n + 0.5 * (d_i.sum() - d_n.sum()))


def ntmg_densities_jacobian(x, cfg: NtmgConfig) -> np.ndarray:
    """d densities / d x, shape (7, 2)."""
    x = np.asarray(x, dtype=float)
    d = ntmg_densities(x, cfg)
    return d[:, None] * (cfg.centers() - x) / cfg.gaussian_sigma ** 2


def ntmg_payoff_grad(x_i, x_neg, cfg: NtmgConfig) -> np.ndarray:
    """Analytic gradient of ntmg_payoff with respect to x_i."""
    d_n = ntmg_densities(x_neg, cfg)
    coeff = S_MATRIX @ d_n + 0.5  # d payoff / d densities_i
    return ntmg_densities_jacobian(x_i, cfg).T @ coeff
