"""Continuous attention with Gaussian RBF value bases: closed-form forward
and backward kernels in 1-d (alpha in {1, 4/3, 3/2, 2}) and 2-d (alpha in
{1, 2}), the discrete softmax/sparsemax baselines, and ridge fitting of the
value-coefficient matrix.

The sparse kernels never fall back to generic quadrature: 1-d reduces to
polynomial-times-Gaussian partial moments, and 2-d sparsemax reduces to
closed-form radial integrals combined by a fixed periodic trapezoid rule in
the angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import linalg as _sla

from .densities import BetaGaussianParams, gaussian_pdf_nd, make_beta_gaussian
from .numerics import Interval, SpdMatrix, gauss_moment, spd_decompose
from .tsallis import entmax_finite

__all__ = [
    "QuadraticScore",
    "AttentionBasis",
    "poly_gauss_integral",
    "attention_forward_1d",
    "attention_backward_1d",
    "attention_forward_2d",
    "attention_backward_2d",
    "attention_forward_softmax",
    "attention_backward_softmax",
    "fit_value_function",
    "discrete_attention",
    "context",
]

_ANGULAR_NODES = 256
_BASIS_CAP = 4096
_SUPPORTED_1D = (1.0, 4.0 / 3.0, 1.5, 2.0)


@dataclass(frozen=True)
class QuadraticScore:
    """Score f(t) = -0.5 (t - mu)^T Sigma^-1 (t - mu) with its entmax alpha."""

    mu: np.ndarray
    sigma: SpdMatrix
    alpha: float

    @property
    def dim(self) -> int:
        return self.mu.size

    @classmethod
    def from_moments(cls, mu, sigma, alpha: float) -> "QuadraticScore":
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        if not isinstance(sigma, SpdMatrix):
            sigma = spd_decompose(np.atleast_2d(sigma))
        return cls(mu, sigma, float(alpha))

    @classmethod
    def from_theta(cls, theta, alpha: float) -> "QuadraticScore":
        theta = np.asarray(theta, dtype=float)
        n = int((math.isqrt(4 * theta.size + 1) - 1) // 2)
        if n + n * n != theta.size:
            raise ValueError("theta length is not N + N^2")
        quad = theta[n:].reshape(n, n)
        prec = -(quad + quad.T)  # = Sigma^-1 from -0.5 Sigma^-1 stored twice symmetrized
        prec_spd = spd_decompose(prec)
        sigma = spd_decompose(prec_spd.inv)
        return cls(sigma.entries @ theta[:n], sigma, float(alpha))

    def to_theta(self) -> np.ndarray:
        inv = self.sigma.inv
        return np.concatenate([inv @ self.mu, (-0.5 * inv).reshape(-1)])

    def density(self) -> BetaGaussianParams:
        return make_beta_gaussian(self.alpha, self.mu, self.sigma)


@dataclass(frozen=True)
class AttentionBasis:
    """Gaussian RBF components psi_j(t) = N(t; mu_j, Sigma_j), plus the fitted
    value-coefficient matrix B when available."""

    mus: np.ndarray  # (Nbasis, N)
    sigmas: tuple  # of SpdMatrix
    b_matrix: Optional[np.ndarray] = None

    @classmethod
    def from_components(cls, components: Sequence, b_matrix=None) -> "AttentionBasis":
        mus = []
        sigmas = []
        for mu_j, sig_j in components:
            mu_j = np.atleast_1d(np.asarray(mu_j, dtype=float))
            if not isinstance(sig_j, SpdMatrix):
                sig_j = spd_decompose(np.atleast_2d(sig_j))
            mus.append(mu_j)
            sigmas.append(sig_j)
        if not mus:
            raise ValueError("basis needs at least one component")
        if len(mus) > _BASIS_CAP:
            raise ValueError(f"basis size exceeds cap {_BASIS_CAP}")
        return cls(np.array(mus), tuple(sigmas),
                   None if b_matrix is None else np.asarray(b_matrix, dtype=float))

    @property
    def size(self) -> int:
        return self.mus.shape[0]

    @property
    def dim(self) -> int:
        return self.mus.shape[1]

    def evaluate(self, t) -> np.ndarray:
        """psi(t), the vector of component densities at one point."""
        return np.array([
            gaussian_pdf_nd(t, self.mus[j], self.sigmas[j]) for j in range(self.size)
        ])


def _entmax_order(alpha: float) -> int:
    """n with alpha = (n+1)/n; the 1-d density is then a degree-2n polynomial."""
    n = round(1.0 / (alpha - 1.0))
    if n < 1 or abs(alpha - (n + 1.0) / n) > 1e-9:
        raise ValueError(f"unsupported alpha {alpha}: needs the form (n+1)/n")
    return int(n)


def poly_gauss_integral(poly: Polynomial, mu_j: float, sd_j: float, lo: float, hi: float) -> float:
    """Exact integral of poly(t) N(t; mu_j, sd_j^2) over [lo, hi] via standard
    normal partial moments."""
    shifted = poly(Polynomial([mu_j, sd_j]))  # coefficients in s = (t - mu_j)/sd_j
    interval = Interval((lo - mu_j) / sd_j, (hi - mu_j) / sd_j)
    return float(sum(c * gauss_moment(i, interval) for i, c in enumerate(shifted.coef)))


def _density_poly_1d(score: QuadraticScore) -> tuple:
    """(density polynomial on its support, support lo, support hi)."""
    params = score.density()
    n = _entmax_order(score.alpha)
    mu = float(score.mu[0])
    sig_sq = float(score.sigma.entries[0, 0])
    q = Polynomial([-params.tau - mu * mu / (2.0 * sig_sq), mu / sig_sq, -0.5 / sig_sq])
    sup = params.support
    return ((score.alpha - 1.0) * q) ** n, sup.lo, sup.hi


def _check_1d(score: QuadraticScore, basis: AttentionBasis):
    if score.dim != 1 or basis.dim != 1:
        raise ValueError("1-d kernel requires scalar score and basis")
    if not any(abs(score.alpha - a) < 1e-9 for a in _SUPPORTED_1D):
        raise ValueError(f"alpha {score.alpha} not in supported set {_SUPPORTED_1D}")


def _misses_support_1d(mu_j: float, sd_j: float, lo: float, hi: float) -> bool:
    # component contributes exactly 0 once its 8-sigma interval clears the
    # support; the true value there is below the erf path's own roundoff
    return mu_j + 8.0 * sd_j < lo or mu_j - 8.0 * sd_j > hi


def attention_forward_1d(score: QuadraticScore, basis: AttentionBasis) -> np.ndarray:
    """r_j = E_p[psi_j(t)] in closed form."""
    _check_1d(score, basis)
    if score.alpha == 1.0:
        return attention_forward_softmax(score, basis)
    poly, lo, hi = _density_poly_1d(score)
    out = np.empty(basis.size)
    for j in range(basis.size):
        mu_j = float(basis.mus[j, 0])
        sd_j = math.sqrt(float(basis.sigmas[j].entries[0, 0]))
        if _misses_support_1d(mu_j, sd_j, lo, hi):
            out[j] = 0.0
            continue
        # the integrand is nonnegative; clip extreme-tail cancellation noise
        out[j] = max(poly_gauss_integral(poly, mu_j, sd_j, lo, hi), 0.0)
    return out


def attention_backward_1d(score: QuadraticScore, basis: AttentionBasis) -> np.ndarray:
    """Jacobian d r / d theta, rows cov_(p, 2-alpha)([t, t^2], psi_j)."""
    _check_1d(score, basis)
    if score.alpha == 1.0:
        return attention_backward_softmax(score, basis)
    n = _entmax_order(score.alpha)
    _, lo, hi = _density_poly_1d(score)
    params = score.density()
    mu = float(score.mu[0])
    sig_sq = float(score.sigma.entries[0, 0])
    q = Polynomial([-params.tau - mu * mu / (2.0 * sig_sq), mu / sig_sq, -0.5 / sig_sq])
    # escort weight p^beta with beta = 2 - alpha is a degree-2(n-1) polynomial
    escort_poly = ((score.alpha - 1.0) * q) ** (n - 1)
    anti = escort_poly.integ()
    z_norm = float(anti(hi) - anti(lo))
    t_poly = Polynomial([0.0, 1.0])
    e_phi = np.empty(2)
    for m in (1, 2):
        anti_m = (escort_poly * t_poly**m).integ()
        e_phi[m - 1] = float(anti_m(hi) - anti_m(lo)) / z_norm
    jac = np.empty((basis.size, 2))
    for j in range(basis.size):
        mu_j = float(basis.mus[j, 0])
        sd_j = math.sqrt(float(basis.sigmas[j].entries[0, 0]))
        if _misses_support_1d(mu_j, sd_j, lo, hi):
            jac[j] = 0.0
            continue
        e_psi = poly_gauss_integral(escort_poly, mu_j, sd_j, lo, hi) / z_norm
        for m in (1, 2):
            e_cross = poly_gauss_integral(escort_poly * t_poly**m, mu_j, sd_j, lo, hi) / z_norm
            jac[j, m - 1] = z_norm * (e_cross - e_phi[m - 1] * e_psi)
    return jac


# ---------------------------------------------------------------------------
# softmax kernels (closed form in any dimension)

def attention_forward_softmax(score: QuadraticScore, basis: AttentionBasis) -> np.ndarray:
    out = np.empty(basis.size)
    for j in range(basis.size):
        conv = spd_decompose(score.sigma.entries + basis.sigmas[j].entries)
        out[j] = gaussian_pdf_nd(score.mu, basis.mus[j], conv)
    return out


def attention_backward_softmax(score: QuadraticScore, basis: AttentionBasis) -> np.ndarray:
    n = score.dim
    mu = score.mu
    sig = score.sigma.entries
    prec = score.sigma.inv
    jac = np.empty((basis.size, n + n * n))
    for j in range(basis.size):
        sig_j = basis.sigmas[j]
        conv = spd_decompose(sig + sig_j.entries)
        s_tilde = gaussian_pdf_nd(mu, basis.mus[j], conv)
        post_prec = prec + sig_j.inv
        post_cov = spd_decompose(post_prec).inv
        post_mu = post_cov @ (prec @ mu + sig_j.inv @ basis.mus[j])
        row_lin = s_tilde * (post_mu - mu)
        row_quad = s_tilde * (post_cov + np.outer(post_mu, post_mu) - sig - np.outer(mu, mu))
        jac[j] = np.concatenate([row_lin, row_quad.reshape(-1)])
    return jac


# ---------------------------------------------------------------------------
# 2-d sparsemax kernels: closed-form radial integrals, trapezoid in the angle

def _radial_moments(r0: float, sd: float, k_max: int) -> np.ndarray:
    """Integrals of r^k N(r; r0, sd^2) over [0, 1] for k = 0..k_max."""
    interval = Interval(-r0 / sd, (1.0 - r0) / sd)
    base = np.array([gauss_moment(i, interval) for i in range(k_max + 1)])
    out = np.empty(k_max + 1)
    for k in range(k_max + 1):
        acc = 0.0
        for i in range(k + 1):
            acc += math.comb(k, i) * r0 ** (k - i) * sd**i * base[i]
        out[k] = acc
    return out


def _polar_setup(score: QuadraticScore, sigma_j: SpdMatrix, mu_j: np.ndarray):
    params = score.density()
    tau = params.tau
    inv_sqrt = score.sigma.inv_sqrt
    scale = math.sqrt(-2.0 * tau)
    mu_t = (inv_sqrt @ (mu_j - score.mu)) / scale
    cov_t_raw = (inv_sqrt @ sigma_j.entries @ inv_sqrt.T) / (-2.0 * tau)
    cov_t = spd_decompose(cov_t_raw)
    rel = cov_t.eigenvalues[0] / cov_t.eigenvalues[-1]
    if rel <= 1e-10:
        raise ValueError("basis covariance too ill-conditioned after rescaling")
    return tau, mu_t, cov_t


def _angular_nodes(k: int):
    thetas = np.arange(k) * (2.0 * math.pi / k)
    return thetas, 2.0 * math.pi / k


def _per_angle(cov_t: SpdMatrix, mu_t: np.ndarray, theta: float):
    a = np.array([math.cos(theta), math.sin(theta)])
    inv = cov_t.inv
    inv_a = inv @ a
    sig_sq = 1.0 / float(a @ inv_a)
    r0 = sig_sq * float(inv_a @ mu_t)
    p_mat = inv - sig_sq * np.outer(inv_a, inv_a)
    p_mat = 0.5 * (p_mat + p_mat.T)  # symmetrize against roundoff
    expo = -0.5 * float(mu_t @ p_mat @ mu_t)
    sd = math.sqrt(sig_sq)
    s_tilde = sd / math.sqrt(2.0 * math.pi * cov_t.det) * math.exp(expo)
    return a, sd, r0, s_tilde


def _check_2d(score: QuadraticScore, basis: AttentionBasis):
    if score.dim != 2 or basis.dim != 2:
        raise ValueError("2-d kernel requires bivariate score and basis")
    if score.alpha not in (1.0, 2.0):
        raise ValueError("2-d kernels support alpha in {1, 2}")


def _misses_support_2d(params: BetaGaussianParams, mu_j: np.ndarray, sigma_j: SpdMatrix) -> bool:
    # sufficient far-miss test: Mahalanobis gap from mu_j to the support
    # ellipse exceeds 8 component sigmas in every direction
    gap = float(np.linalg.norm(mu_j - params.mu))
    reach = params.radius * math.sqrt(params.sigma_tilde.eigenvalues[-1])
    if gap <= reach:
        return False
    return (gap - reach) ** 2 / sigma_j.eigenvalues[-1] > 64.0


def attention_forward_2d(score: QuadraticScore, basis: AttentionBasis,
                         n_angular: int = _ANGULAR_NODES) -> np.ndarray:
    _check_2d(score, basis)
    if score.alpha == 1.0:
        return attention_forward_softmax(score, basis)
    thetas, w_theta = _angular_nodes(n_angular)
    params = score.density()
    out = np.empty(basis.size)
    for j in range(basis.size):
        if _misses_support_2d(params, basis.mus[j], basis.sigmas[j]):
            out[j] = 0.0
            continue
        tau, mu_t, cov_t = _polar_setup(score, basis.sigmas[j], basis.mus[j])
        acc = 0.0
        for th in thetas:
            _, sd, r0, s_tilde = _per_angle(cov_t, mu_t, th)
            m = _radial_moments(r0, sd, 3)
            acc += s_tilde * (m[1] - m[3])
        out[j] = max(-tau * w_theta * acc, 0.0)
    return out


def attention_backward_2d(score: QuadraticScore, basis: AttentionBasis,
                          n_angular: int = _ANGULAR_NODES) -> np.ndarray:
    _check_2d(score, basis)
    if score.alpha == 1.0:
        return attention_backward_softmax(score, basis)
    params = score.density()
    tau = params.tau
    mu = score.mu
    sig = score.sigma.entries
    sqrt_sig = score.sigma.sqrt
    area = math.pi * (-2.0 * tau) * math.sqrt(score.sigma.det)
    unif_second = np.outer(mu, mu) + sig / area
    scale = math.sqrt(-2.0 * tau)
    thetas, w_theta = _angular_nodes(n_angular)
    jac = np.empty((basis.size, 6))
    for j in range(basis.size):
        if _misses_support_2d(params, basis.mus[j], basis.sigmas[j]):
            jac[j] = 0.0
            continue
        _, mu_t, cov_t = _polar_setup(score, basis.sigmas[j], basis.mus[j])
        i_n = 0.0
        i_t = np.zeros(2)
        i_tt = np.zeros((2, 2))
        for th in thetas:
            a, sd, r0, s_tilde = _per_angle(cov_t, mu_t, th)
            m = _radial_moments(r0, sd, 3)
            w_vec = scale * (sqrt_sig @ a)
            i_n += s_tilde * m[1]
            i_t += s_tilde * (w_vec * m[2] + mu * m[1])
            i_tt += s_tilde * (
                np.outer(w_vec, w_vec) * m[3]
                + (np.outer(w_vec, mu) + np.outer(mu, w_vec)) * m[2]
                + np.outer(mu, mu) * m[1]
            )
        i_n *= w_theta
        i_t *= w_theta
        i_tt *= w_theta
        row_lin = i_t - mu * i_n
        row_quad = i_tt - unif_second * i_n
        jac[j] = np.concatenate([row_lin, row_quad.reshape(-1)])
    return jac


# ---------------------------------------------------------------------------
# value-function fitting, discrete baselines, context

def fit_value_function(h_matrix, locations, basis: AttentionBasis, lam: float) -> np.ndarray:
    """Ridge regression B = H F^T (F F^T + lam I)^-1 through an SPD solve."""
    if lam <= 0.0:
        raise ValueError("ridge penalty must be positive")
    h_matrix = np.atleast_2d(np.asarray(h_matrix, dtype=float))
    locations = np.asarray(locations, dtype=float)
    if locations.ndim == 1:
        locations = locations.reshape(-1, 1)
    if basis.size > _BASIS_CAP:
        raise ValueError(f"basis size exceeds cap {_BASIS_CAP}")
    n_loc = locations.shape[0]
    if h_matrix.shape[1] != n_loc:
        raise ValueError("H must have one column per location")
    feats = np.empty((basis.size, n_loc))
    for ell in range(n_loc):
        feats[:, ell] = basis.evaluate(locations[ell])
    gram = feats @ feats.T + lam * np.eye(basis.size)
    factor = _sla.cho_factor(gram)
    return _sla.cho_solve(factor, feats @ h_matrix.T).T


def discrete_attention(f, alpha: float):
    """(probabilities, Jacobian) of finite softmax/sparsemax attention."""
    if alpha not in (1.0, 2.0):
        raise ValueError("discrete attention supports alpha in {1, 2}")
    probs = entmax_finite(f, alpha)
    if alpha == 1.0:
        jac = np.diag(probs) - np.outer(probs, probs)
    else:
        s = (probs > 0.0).astype(float)
        jac = np.diag(s) - np.outer(s, s) / s.sum()
    return probs, jac


def context(b_matrix, r) -> np.ndarray:
    """Context vector c = B r."""
    b_matrix = np.atleast_2d(np.asarray(b_matrix, dtype=float))
    r = np.asarray(r, dtype=float)
    if b_matrix.shape[1] != r.size:
        raise ValueError(f"shape mismatch: B is {b_matrix.shape}, r has {r.size}")
    return b_matrix @ r
