"""Shared numerical kernels: deformed exp/log, Gaussian moments, small SPD
linear algebra, bracketed root finding, and adaptive quadrature.

Everything here is a pure function of its inputs; no global state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import optimize as _sci_optimize

__all__ = [
    "Interval",
    "SpdMatrix",
    "ConvergenceError",
    "beta_exp",
    "beta_log",
    "gauss_moment",
    "log_gamma",
    "find_root",
    "integrate",
    "spd_decompose",
    "norm_pdf",
    "norm_cdf",
    "expand_bracket",
]

# beta_exp/beta_log switch to the alpha=1 (ordinary exp/log) branch inside
# this window to avoid catastrophic cancellation in (u^eps - 1)/eps.
_BETA_ONE_TOL = 1e-8

_MAX_GAUSS_MOMENT = 12

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class ConvergenceError(RuntimeError):
    """Raised when an iterative numeric routine fails to meet its tolerance."""


@dataclass(frozen=True)
class Interval:
    """Closed interval of the extended real line; lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"empty interval: [{self.lo}, {self.hi}]")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def beta_exp(u: float, beta: float) -> float:
    """Deformed exponential [1 + (1-beta) u]_+^(1/(1-beta)); exp(u) at beta=1.

    Total on the reals: returns 0 on the truncated branch.
    """
    if abs(beta - 1.0) < _BETA_ONE_TOL:
        return math.exp(u)
    one_minus_beta = 1.0 - beta
    base = 1.0 + one_minus_beta * u
    if base <= 0.0:
        return 0.0
    return base ** (1.0 / one_minus_beta)


def beta_log(u: float, beta: float) -> float:
    """Deformed logarithm (u^(1-beta) - 1)/(1-beta); log(u) at beta=1.

    Inverse of ``beta_exp`` on its positive branch.  Requires u >= 0,
    and u > 0 when beta >= 1.
    """
    if u < 0.0:
        raise ValueError(f"beta_log requires u >= 0, got {u}")
    if abs(beta - 1.0) < _BETA_ONE_TOL:
        return math.log(u)
    one_minus_beta = 1.0 - beta
    if u == 0.0:
        if beta > 1.0:
            raise ValueError("beta_log(0) diverges for beta > 1")
        return -1.0 / one_minus_beta
    return math.expm1(one_minus_beta * math.log(u)) / one_minus_beta


def norm_pdf(t: float) -> float:
    """Standard normal density."""
    return _INV_SQRT_2PI * math.exp(-0.5 * t * t)


def norm_cdf(t: float) -> float:
    """Standard normal CDF via erf."""
    return 0.5 * (1.0 + math.erf(t / _SQRT2))


def _t_pow_pdf(t: float, k: int) -> float:
    # t^k * phi(t), with the correct 0 limit at +-inf.
    if math.isinf(t):
        return 0.0
    if k == 0:
        return norm_pdf(t)
    return t**k * norm_pdf(t)


def gauss_moment(n: int, interval: Interval) -> float:
    """Integral of t^n times the standard normal density over ``interval``.

    Uses the erf/partial-moment antiderivative recurrence
    I_n = u^(n-1) phi(u) - v^(n-1) phi(v) + (n-1) I_(n-2),
    never quadrature.  Supports n <= 12 and unbounded endpoints.
    """
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {n}")
    if n > _MAX_GAUSS_MOMENT:
        raise ValueError(f"moment order {n} exceeds supported maximum {_MAX_GAUSS_MOMENT}")
    u, v = interval.lo, interval.hi
    i_even = norm_cdf(v) - norm_cdf(u)  # I_0
    i_odd = norm_pdf(u) - norm_pdf(v)  # I_1
    if n == 0:
        return i_even
    if n == 1:
        return i_odd
    prev = i_even if n % 2 == 0 else i_odd
    k = 2 if n % 2 == 0 else 3
    while k <= n:
        prev = _t_pow_pdf(u, k - 1) - _t_pow_pdf(v, k - 1) + (k - 1) * prev
        k += 2
    return prev


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0."""
    if x <= 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def find_root(f, bracket: Interval, tol: float = 1e-12) -> float:
    """Root of a continuous scalar function on a sign-changing bracket.

    Deterministic bracketing solve; returns x with the bracket narrowed to
    ``tol`` or |f(x)| below machine-level residual.
    """
    lo, hi = bracket.lo, bracket.hi
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    return float(_sci_optimize.brentq(f, lo, hi, xtol=tol, rtol=8.9e-16, maxiter=200))


def expand_bracket(f, lo: float, step: float, factor: float = 2.0, max_iter: int = 200):
    """Grow [lo, lo+step] geometrically until f changes sign; returns Interval."""
    flo = f(lo)
    hi = lo + step
    for _ in range(max_iter):
        fhi = f(hi)
        if flo == 0.0 or flo * fhi <= 0.0:
            return Interval(lo, hi)
        hi = lo + (hi - lo) * factor
    raise ValueError(f"no sign change found expanding from {lo}")


def integrate(f, interval: Interval, tol: float = 1e-10, split_points=()) -> float:
    """Adaptive quadrature of a piecewise-smooth function over ``interval``.

    ``split_points`` flags kink locations (support boundaries of sparse
    densities are C0 but not C1); the integration is split there so the
    adaptive rule only ever sees smooth pieces.
    """
    u, v = interval.lo, interval.hi
    pts = sorted(p for p in split_points if u < p < v)
    edges = [u] + pts + [v]
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            # failure is reported through the accumulated error estimate
            warnings.simplefilter("ignore", _sci_integrate.IntegrationWarning)
            val, abserr = _sci_integrate.quad(f, a, b, epsabs=tol * 0.25, epsrel=1e-12, limit=200)
        total += val
        err += abserr
    if err > max(tol, 1e-13 * abs(total)):
        raise ConvergenceError(f"quadrature error estimate {err:.3e} exceeds tolerance {tol:.3e}")
    return total


@dataclass(frozen=True)
class SpdMatrix:
    """Small symmetric positive-definite matrix with cached factorizations.

    Carries the determinant, inverse, and principal square root computed once
    from a symmetric eigendecomposition.  Use :func:`spd_decompose` to build.
    """

    entries: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def det(self) -> float:
        return float(np.prod(self.eigenvalues))

    @property
    def log_det(self) -> float:
        return float(np.sum(np.log(self.eigenvalues)))

    @property
    def inv(self) -> np.ndarray:
        v = self.eigenvectors
        return (v / self.eigenvalues) @ v.T

    @property
    def sqrt(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * np.sqrt(self.eigenvalues)) @ v.T

    @property
    def inv_sqrt(self) -> np.ndarray:
        v = self.eigenvectors
        return (v / np.sqrt(self.eigenvalues)) @ v.T

    def quad_form(self, x: np.ndarray) -> float:
        """x^T M^{-1} x for a vector x."""
        y = self.eigenvectors.T @ np.asarray(x, dtype=float)
        return float(np.sum(y * y / self.eigenvalues))

    def scaled(self, c: float) -> "SpdMatrix":
        """SPD matrix c * M for c > 0, reusing the eigenbasis."""
        if c <= 0.0:
            raise ValueError("scale factor must be positive")
        return SpdMatrix(self.entries * c, self.eigenvalues * c, self.eigenvectors)


_SPD_MAX_DIM = 8


def spd_decompose(m) -> SpdMatrix:
    """Validate and factor a raw symmetric positive-definite matrix.

    Rejects asymmetry beyond 1e-10 and eigenvalues at or below
    1e-12 times the largest.  Dimension is capped at 8; the use cases
    here are N in {1, 2}.
    """
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n < 1 or n > _SPD_MAX_DIM:
        raise ValueError(f"dimension {n} outside supported range [1, {_SPD_MAX_DIM}]")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric within 1e-10")
    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    if w[0] <= 1e-12 * max(w[-1], 0.0):
        raise ValueError(f"matrix is not positive definite (eigenvalues {w})")
    return SpdMatrix(a, w, v)
