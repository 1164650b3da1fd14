"""Fenchel-Young and cross-Omega losses for quadratic-score families, their
analytic gradients and quadrature Hessians, moment-matching estimation, and
the heteroscedastic regression objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .densities import (
    BetaGaussianParams,
    beta_gaussian_radius,
    make_beta_gaussian,
    mean_variance,
    support_quadrature_1d,
    support_quadrature_2d,
    tsallis_negentropy,
)
from .numerics import Interval, SpdMatrix, find_root, spd_decompose
from .tsallis import generalized_covariance

__all__ = [
    "FyEvaluation",
    "HeteroscedasticFit",
    "fy_loss_beta_gaussian",
    "gaussian_kl",
    "cross_omega_loss",
    "omega_star_quadratic",
    "theta_from_moments",
    "moments_from_theta",
    "fy_gradient_hessian",
    "params_from_moments",
    "fit_moment_matching",
    "heteroscedastic_loss",
    "heteroscedastic_fit",
]


@dataclass(frozen=True)
class FyEvaluation:
    loss: float
    gradient: np.ndarray
    hessian: Optional[np.ndarray] = None


@dataclass(frozen=True)
class HeteroscedasticFit:
    w_mu: float
    b_mu: float
    w_sigma: float
    b_sigma: float
    alpha: float
    train_loss: float
    steps_taken: int


def _as_spd(sigma) -> SpdMatrix:
    if isinstance(sigma, SpdMatrix):
        return sigma
    return spd_decompose(np.atleast_2d(sigma))


def _det_power(sigma: SpdMatrix, n: int, alpha: float) -> float:
    return math.exp(-sigma.log_det / (n + 2.0 / (alpha - 1.0)))


def fy_loss_beta_gaussian(mu_f, sigma_f, p: BetaGaussianParams) -> float:
    """Closed-form Fenchel-Young loss between a quadratic score (mu_f, Sigma_f)
    and a beta-Gaussian target with matching alpha in (1, 2]."""
    alpha = p.alpha
    if not (1.0 < alpha <= 2.0):
        raise ValueError("alpha must lie in (1, 2]; the alpha=1 limit is gaussian_kl")
    sigma_f = _as_spd(sigma_f)
    mu_f = np.atleast_1d(np.asarray(mu_f, dtype=float))
    n = p.dim
    if sigma_f.dim != n or mu_f.size != n:
        raise ValueError("dimension mismatch between score and target")
    aa1 = alpha - 1.0
    r_sq = beta_gaussian_radius(n, alpha) ** 2
    d = p.mu - mu_f
    mahal = 0.5 * sigma_f.quad_form(d)
    tr = float(np.trace(sigma_f.inv @ p.sigma.entries))
    s_p = p.det_power
    s_f = _det_power(sigma_f, n, alpha)
    bracket = s_p * (1.0 + 0.5 * aa1 * tr) - s_f * (1.0 + 0.5 * n * aa1)
    return mahal + r_sq / (2.0 * alpha + n * aa1) * bracket


def gaussian_kl(mu_f, sigma_f, p: BetaGaussianParams) -> float:
    """KL divergence between the Gaussian target p and the Gaussian induced by
    (mu_f, Sigma_f): the alpha=1 limit of the Fenchel-Young loss."""
    sigma_f = _as_spd(sigma_f)
    mu_f = np.atleast_1d(np.asarray(mu_f, dtype=float))
    n = p.dim
    d = p.mu - mu_f
    tr = float(np.trace(sigma_f.inv @ p.sigma.entries))
    return 0.5 * sigma_f.quad_form(d) + 0.5 * (tr - n + sigma_f.log_det - p.sigma.log_det)


def cross_omega_loss(mu_f: float, sigma_f_sq: float, y: float, alpha: float) -> float:
    """Univariate cross-Omega loss against a point target; finite even when y
    falls outside the support of the induced density.

    Equals Omega*(f) - f(y); the sigma_f regularizer carries the coefficient
    (alpha+1)/(2(3 alpha - 1)), which the direct Dirac limit of the
    closed-form loss yields.
    """
    if alpha <= 1.0:
        raise ValueError("cross-Omega loss needs alpha > 1; use the Gaussian NLL at alpha = 1")
    if sigma_f_sq <= 0.0:
        raise ValueError("sigma_f_sq must be positive")
    r_sq = beta_gaussian_radius(1, alpha) ** 2
    k = (alpha - 1.0) / (alpha + 1.0)
    coef = (alpha + 1.0) / (2.0 * (3.0 * alpha - 1.0))
    return (
        (mu_f - y) ** 2 / (2.0 * sigma_f_sq)
        + 1.0 / (alpha * (alpha - 1.0))
        - r_sq * coef * sigma_f_sq ** (-k)
    )


def omega_star_quadratic(mu_f, sigma_f, alpha: float) -> float:
    """Convex conjugate Omega*(f_theta) for the linearly parametrized quadratic
    score theta = [Sigma_f^-1 mu_f, vec(-Sigma_f^-1 / 2)]."""
    sigma_f = _as_spd(sigma_f)
    mu_f = np.atleast_1d(np.asarray(mu_f, dtype=float))
    n = mu_f.size
    p_theta = make_beta_gaussian(alpha, mu_f, sigma_f)
    const = 0.5 * float(mu_f @ sigma_f.inv @ mu_f)
    if alpha == 1.0:
        # log-partition of the Gaussian
        return 0.5 * (n * math.log(2.0 * math.pi) + sigma_f.log_det) + const
    aa1 = alpha - 1.0
    a_alpha = p_theta.tau + 1.0 / aa1 + const
    return aa1 * tsallis_negentropy(p_theta) + a_alpha


# ---------------------------------------------------------------------------
# canonical-parameter plumbing

def theta_from_moments(mu, sigma: SpdMatrix) -> np.ndarray:
    """theta = [Sigma^-1 mu, vec(-Sigma^-1/2)]; exact both ways."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    inv = sigma.inv
    return np.concatenate([inv @ mu, (-0.5 * inv).reshape(-1)])


def moments_from_theta(theta: np.ndarray, n_dim: int):
    theta = np.asarray(theta, dtype=float)
    if theta.size != n_dim + n_dim * n_dim:
        raise ValueError("theta length does not match dimension")
    lin = theta[:n_dim]
    quad = theta[n_dim:].reshape(n_dim, n_dim)
    prec = -2.0 * 0.5 * (quad + quad.T)
    try:
        prec_spd = spd_decompose(prec)
    except ValueError as exc:
        raise ValueError(f"theta does not define a valid scale: {exc}") from exc
    sigma = spd_decompose(prec_spd.inv)
    return sigma.entries @ lin, sigma


def statistics_vector(mu, second_moment) -> np.ndarray:
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    second = np.atleast_2d(np.asarray(second_moment, dtype=float))
    return np.concatenate([mu, second.reshape(-1)])


def _expected_statistics(p: BetaGaussianParams) -> np.ndarray:
    m, v = mean_variance(p)
    return statistics_vector(m, v + np.outer(m, m))


def _phi_matrix(ts: np.ndarray, n_dim: int) -> np.ndarray:
    ts = np.atleast_2d(ts.reshape(-1, n_dim))
    outer = ts[:, :, None] * ts[:, None, :]
    return np.concatenate([ts, outer.reshape(ts.shape[0], -1)], axis=1)


def fy_hessian_quadrature(p_theta: BetaGaussianParams, n_nodes: int = 200) -> np.ndarray:
    """Hessian of the FY loss: the generalized (2-alpha)-covariance of
    phi(t) = [t, vec(t t^T)], by quadrature over the support."""
    alpha = p_theta.alpha
    if not (1.0 < alpha <= 2.0):
        raise ValueError("quadrature Hessian implemented for alpha in (1, 2]")
    if p_theta.dim == 1:
        ts, ws = support_quadrature_1d(p_theta, n_nodes)
        pts = ts.reshape(-1, 1)
    elif p_theta.dim == 2:
        pts, ws = support_quadrature_2d(p_theta, n_radial=48, n_angular=128)
    else:
        raise ValueError("Hessian quadrature supports N in {1, 2}")
    pvals = np.array([p_theta.pdf_one(t) for t in pts])
    phi = _phi_matrix(pts, p_theta.dim)
    return generalized_covariance(ws, pvals, 2.0 - alpha, phi, phi)


def fy_gradient_hessian(theta, v, alpha: float, want_hessian: bool = True) -> FyEvaluation:
    """Loss, gradient, and optional Hessian of the Fenchel-Young loss at the
    canonical parameters theta against observed expected statistics v.

    The loss is taken against the moment-matched family member carrying the
    statistics v; the gradient mu(theta) - v is the same for any target
    with those statistics.
    """
    v = np.asarray(v, dtype=float)
    n_dim = int((math.isqrt(4 * v.size + 1) - 1) // 2)
    if n_dim + n_dim * n_dim != v.size:
        raise ValueError("statistics vector length is not N + N^2")
    mu_f, sigma_f = moments_from_theta(np.asarray(theta, dtype=float), n_dim)
    p_theta = make_beta_gaussian(alpha, mu_f, sigma_f)
    gradient = _expected_statistics(p_theta) - v

    m = v[:n_dim]
    second = v[n_dim:].reshape(n_dim, n_dim)
    var = 0.5 * (second + second.T) - np.outer(m, m)
    target = params_from_moments(alpha, m, var)
    if alpha == 1.0:
        loss = gaussian_kl(mu_f, sigma_f, target)
    else:
        loss = fy_loss_beta_gaussian(mu_f, sigma_f, target)
    hessian = None
    if want_hessian and alpha > 1.0:
        hessian = fy_hessian_quadrature(p_theta)
    return FyEvaluation(loss=loss, gradient=gradient, hessian=hessian)


# ---------------------------------------------------------------------------
# moment matching

def params_from_moments(alpha: float, mean, variance) -> BetaGaussianParams:
    """Invert the variance formula Var = R^2/(N + 2 alpha/(alpha-1)) Sigma~ to
    recover Sigma from an observed covariance matrix."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    var = spd_decompose(np.atleast_2d(variance))
    if alpha == 1.0:
        return make_beta_gaussian(1.0, mean, var)
    n = mean.size
    aa1 = alpha - 1.0
    c0 = beta_gaussian_radius(n, alpha) ** 2 / (n + 2.0 * alpha / aa1)
    log_det_v = var.log_det
    denom = n + 2.0 / aa1

    # scalar determinant equation in L = log |Sigma|, monotone on the bracket
    def resid(log_d):
        return log_d - log_det_v + n * (math.log(c0) - log_d / denom)

    log_d = find_root(resid, Interval(math.log(1e-12), math.log(1e12)), tol=1e-13)
    k = c0 * math.exp(-log_d / denom)
    return make_beta_gaussian(alpha, mean, var.entries / k)


def fit_moment_matching(samples, alpha: float) -> BetaGaussianParams:
    """Optimal Fenchel-Young fit of a beta-Gaussian to samples: match the
    sample mean and covariance."""
    pts = np.asarray(samples, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    n_dim = pts.shape[1]
    if pts.shape[0] < n_dim + 2:
        raise ValueError(f"need at least {n_dim + 2} samples")
    mean = pts.mean(axis=0)
    centered = pts - mean
    cov = centered.T @ centered / pts.shape[0]
    return params_from_moments(alpha, mean, cov)


# ---------------------------------------------------------------------------
# heteroscedastic regression

def _pointwise_loss(alpha, resid, sig_sq):
    if alpha == 1.0:
        return 0.5 * resid * resid / sig_sq + 0.5 * np.log(2.0 * math.pi * sig_sq)
    r_sq = beta_gaussian_radius(1, alpha) ** 2
    k = (alpha - 1.0) / (alpha + 1.0)
    coef = (alpha + 1.0) / (2.0 * (3.0 * alpha - 1.0))
    return (0.5 * resid * resid / sig_sq
            + 1.0 / (alpha * (alpha - 1.0))
            - r_sq * coef * sig_sq ** (-k))


def heteroscedastic_loss(coeffs, xs, ys, alpha: float) -> float:
    """Mean per-point loss of the linear-mean, linear-std model; infinite if
    any modeled variance is nonpositive."""
    w_mu, b_mu, w_sigma, b_sigma = coeffs
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    sig_sq = (w_sigma * xs + b_sigma) ** 2
    if np.any(sig_sq <= 0.0):
        return float("inf")
    return float(np.mean(_pointwise_loss(alpha, w_mu * xs + b_mu - ys, sig_sq)))


def _loss_and_grad(coeffs, xs, ys, alpha):
    w_mu, b_mu, w_sigma, b_sigma = coeffs
    grad = np.zeros(4)
    s = w_sigma * xs + b_sigma
    sig_sq = s * s
    if np.any(sig_sq <= 0.0):
        return float("inf"), grad
    resid = w_mu * xs + b_mu - ys
    loss = float(np.mean(_pointwise_loss(alpha, resid, sig_sq)))
    dmu = resid / sig_sq
    if alpha == 1.0:
        dsig = -0.5 * resid * resid / sig_sq**2 + 0.5 / sig_sq
    else:
        r_sq = beta_gaussian_radius(1, alpha) ** 2
        k = (alpha - 1.0) / (alpha + 1.0)
        coef = (alpha + 1.0) / (2.0 * (3.0 * alpha - 1.0))
        dsig = -0.5 * resid * resid / sig_sq**2 + r_sq * coef * k * sig_sq ** (-k - 1.0)
    grad[0] = np.mean(dmu * xs)
    grad[1] = np.mean(dmu)
    grad[2] = np.mean(dsig * 2.0 * s * xs)
    grad[3] = np.mean(dsig * 2.0 * s)
    return loss, grad


def heteroscedastic_fit(xs, ys, alpha: float, init=(0.0, 0.0, 0.0, 1.0),
                        steps: int = 500, step_size: float = 0.05) -> HeteroscedasticFit:
    """Gradient descent with backtracking on the mean cross-Omega loss
    (Gaussian NLL at alpha=1); deterministic given the initial point.

    A step that drives any modeled variance to zero is rejected and the step
    size halved.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 4:
        raise ValueError("need at least 4 (x, y) pairs")
    if alpha != 1.0 and not (1.0 < alpha <= 2.0):
        raise ValueError("alpha must be 1 or in (1, 2]")
    coeffs = np.asarray(init, dtype=float)
    loss, grad = _loss_and_grad(coeffs, xs, ys, alpha)
    if not math.isfinite(loss):
        raise ValueError("initial coefficients give nonpositive variance on the data")
    step = float(step_size)
    taken = 0
    for _ in range(steps):
        proposal = coeffs - step * grad
        new_loss, new_grad = _loss_and_grad(proposal, xs, ys, alpha)
        while not (math.isfinite(new_loss) and new_loss <= loss):
            step *= 0.5
            if step < 1e-18:
                return HeteroscedasticFit(*coeffs, alpha, loss, taken)
            proposal = coeffs - step * grad
            new_loss, new_grad = _loss_and_grad(proposal, xs, ys, alpha)
        coeffs, loss, grad = proposal, new_loss, new_grad
        step = min(step * 1.3, step_size)
        taken += 1
        if float(np.max(np.abs(grad))) < 1e-10:
            break
    return HeteroscedasticFit(*coeffs, alpha, loss, taken)
