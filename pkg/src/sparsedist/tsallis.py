"""Tsallis negentropies, escort distributions, finite entmax/sparsemax, the
normalizing constant of deformed exponential families, and the generalized
beta-covariance.

Finite distributions are plain 1-d numpy arrays on the probability simplex;
densities enter through quadrature samples (weights, density values).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_distribution",
    "tsallis_negentropy_finite",
    "escort",
    "entmax_finite",
    "softmax",
    "sparsemax",
    "sparsemax_threshold",
    "normalizer_A_alpha",
    "generalized_covariance",
]

_ENTMAX_TAU_TOL = 1e-12


def check_distribution(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("expected a nonempty probability vector")
    if np.any(p < 0.0):
        raise ValueError("probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {p.sum()}, not 1")
    return p


def tsallis_negentropy_finite(p, alpha: float) -> float:
    """Tsallis negentropy (1/(alpha(alpha-1))) (sum p^alpha - 1).

    The alpha=1 branch is the Shannon negentropy sum p log p with the
    0 log 0 = 0 convention.
    """
    p = check_distribution(p)
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    if abs(alpha - 1.0) < 1e-12:
        pos = p[p > 0.0]
        return float(np.sum(pos * np.log(pos)))
    return float((np.sum(p**alpha) - 1.0) / (alpha * (alpha - 1.0)))


def escort(p, beta: float) -> np.ndarray:
    """Escort transform p^beta / sum p^beta; beta=0 is uniform on the support."""
    p = check_distribution(p)
    if beta < 0.0:
        raise ValueError("beta must be nonnegative")
    if beta == 0.0:
        ind = (p > 0.0).astype(float)
        total = ind.sum()
        if total == 0.0:
            raise ValueError("empty support")
        return ind / total
    q = np.zeros_like(p)
    pos = p > 0.0
    q[pos] = p[pos] ** beta
    return q / q.sum()


def softmax(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    z = np.exp(f - f.max())
    return z / z.sum()


def sparsemax_threshold(f, total: float = 1.0) -> float:
    """Threshold tau with sum [f - tau]_+ = total, by the exact sort rule."""
    f = np.asarray(f, dtype=float)
    srt = np.sort(f)[::-1]
    cssv = np.cumsum(srt) - total
    ks = np.arange(1, f.size + 1)
    support = srt - cssv / ks > 0.0
    rho = int(ks[support][-1])
    return float(cssv[rho - 1] / rho)


def sparsemax(f, total: float = 1.0) -> np.ndarray:
    """Euclidean projection of f onto the simplex scaled to sum ``total``."""
    f = np.asarray(f, dtype=float)
    return np.maximum(f - sparsemax_threshold(f, total), 0.0)


def entmax_finite(f, alpha: float) -> np.ndarray:
    """The distribution maximizing p.f - Omega_alpha(p) over the simplex.

    alpha=1 is softmax, alpha=2 the exact sort-threshold sparsemax, and
    intermediate alpha solves for the threshold by bisection.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("expected a nonempty score vector")
    if alpha < 1.0 or alpha > 2.0:
        raise ValueError(f"alpha must lie in [1, 2], got {alpha}")
    if abs(alpha - 1.0) < 1e-12:
        return softmax(f)
    if alpha == 2.0:
        return sparsemax(f)
    # p_i = exp_{2-alpha}(f_i - A) = [(alpha-1)(f_i - tau)]_+^{1/(alpha-1)}
    # with tau = A - 1/(alpha-1); the sum is strictly decreasing in tau.
    k = f.size
    am1 = alpha - 1.0
    hi = float(f.max())
    lo = hi - k**am1 / am1

    def mass(tau):
        return np.sum(np.maximum(am1 * (f - tau), 0.0) ** (1.0 / am1))

    assert mass(lo) >= 1.0
    while hi - lo > _ENTMAX_TAU_TOL:
        mid = 0.5 * (lo + hi)
        if mass(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    p = np.maximum(am1 * (f - tau), 0.0) ** (1.0 / am1)
    return p / p.sum()


def normalizer_A_alpha(weights, p_values, f_values, alpha: float) -> float:
    """Normalizing constant A_alpha(f) from quadrature samples of p and f.

    weights are the quadrature weights on supp(p); p_values and f_values the
    density and score evaluated at the nodes.  The cached threshold of the
    density should satisfy tau = A_alpha(f) - 1/(alpha-1).
    """
    if abs(alpha - 1.0) < 1e-12:
        raise ValueError("A_alpha formula requires alpha != 1")
    w = np.asarray(weights, dtype=float)
    p = np.asarray(p_values, dtype=float)
    f = np.asarray(f_values, dtype=float)
    if not (w.shape == p.shape == f.shape):
        raise ValueError("weights, p_values, f_values must share a shape")
    beta = 2.0 - alpha
    pb = np.zeros_like(p)
    pos = p > 0.0
    pb[pos] = p[pos] ** beta  # beta=0 means the indicator, not 0**0 = 1
    mass = float(np.sum(w * pb))
    if mass <= 0.0:
        raise ValueError("zero escort mass")
    c = 1.0 / (1.0 - alpha)
    return (c + float(np.sum(w * pb * f))) / mass - c


def generalized_covariance(weights, p_values, beta: float, phi_values, psi_values) -> np.ndarray:
    """Generalized beta-covariance ||p||_beta^beta (E[phi psi^T] - E[phi] E[psi]^T)
    under the beta-escort of p, from quadrature samples.

    phi_values has shape (n, M) and psi_values (n, K); the result is (M, K).
    beta=1 recovers the ordinary covariance, beta=0 the covariance under a
    uniform density on supp(p) scaled by |supp(p)|.
    """
    if beta < 0.0:
        raise ValueError("beta must be nonnegative")
    w = np.asarray(weights, dtype=float)
    p = np.asarray(p_values, dtype=float)
    phi = np.atleast_2d(np.asarray(phi_values, dtype=float))
    psi = np.atleast_2d(np.asarray(psi_values, dtype=float))
    if phi.shape[0] != w.size:
        phi = phi.T
    if psi.shape[0] != w.size:
        psi = psi.T
    if w.shape != p.shape or phi.shape[0] != w.size or psi.shape[0] != w.size:
        raise ValueError("inconsistent sample lengths")
    if beta == 0.0:
        pb = (p > 0.0).astype(float)
    else:
        pb = np.zeros_like(p)
        pos = p > 0.0
        pb[pos] = p[pos] ** beta
    norm = float(np.sum(w * pb))
    if norm <= 0.0:
        raise ValueError("zero escort mass")
    we = w * pb / norm
    e_phi = phi.T @ we
    e_psi = psi.T @ we
    e_outer = (phi * we[:, None]).T @ psi
    return norm * (e_outer - np.outer(e_phi, e_psi))
