"""Exact sampling from beta-Gaussians through the elliptical stochastic
representation t = mu + r A u: a uniform direction on the sphere and a
Beta-distributed squared radius.

Every operation takes an explicit RngState; there is no hidden global
generator, so determinism is entirely the caller's seed choice.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .densities import BetaGaussianParams

__all__ = ["RngState", "sample_unit_sphere", "sample_beta", "sample_beta_gaussian", "write_samples_csv"]


@dataclass
class RngState:
    """Deterministic pseudo-random stream keyed by an explicit 64-bit seed."""

    seed: int
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def split(self, worker_index: int) -> "RngState":
        """Independent stream for a worker, derived as seed xor index."""
        return RngState((self.seed ^ (worker_index + 1)) & 0xFFFFFFFFFFFFFFFF)


def sample_unit_sphere(n_dim: int, rng: RngState, size: int = 1) -> np.ndarray:
    """Uniform directions on the unit sphere in R^n, via normalized normals."""
    if n_dim < 1:
        raise ValueError("dimension must be >= 1")
    z = rng.generator.standard_normal((size, n_dim))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    # a zero vector has probability zero; regenerate defensively if it occurs
    while np.any(norms == 0.0):
        bad = norms[:, 0] == 0.0
        z[bad] = rng.generator.standard_normal((int(bad.sum()), n_dim))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
    return z / norms


def sample_beta(a: float, b: float, rng: RngState, size: int = 1) -> np.ndarray:
    """Beta(a, b) variates, generated from two Gamma draws."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    x = rng.generator.standard_gamma(a, size)
    y = rng.generator.standard_gamma(b, size)
    return x / (x + y)


def sample_beta_gaussian(params: BetaGaussianParams, n: int, rng: RngState) -> np.ndarray:
    """n i.i.d. draws, shape (n, N); for alpha > 1 every draw lies strictly
    inside the support ellipsoid."""
    dim = params.dim
    if params.alpha == 1.0:
        z = rng.generator.standard_normal((n, dim))
        return params.mu + z @ params.sigma.sqrt.T
    alpha = params.alpha
    u = sample_unit_sphere(dim, rng, n)
    z = sample_beta(0.5 * dim, alpha / (alpha - 1.0), rng, n)
    r = params.radius * np.sqrt(z)
    scale = params.sigma_tilde.sqrt
    return params.mu + (r[:, None] * u) @ scale.T


def write_samples_csv(path, samples: np.ndarray) -> None:
    """One row per sample, header t_1..t_N."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"t_{i + 1}" for i in range(samples.shape[1])])
        for row in samples:
            writer.writerow([repr(float(x)) for x in row])
