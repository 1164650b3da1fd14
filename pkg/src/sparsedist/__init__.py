"""Sparse continuous distributions, Fenchel-Young losses, exact samplers,
continuous attention kernels, and continuous fusedmax solvers."""

from .numerics import (
    ConvergenceError,
    Interval,
    SpdMatrix,
    beta_exp,
    beta_log,
    find_root,
    gauss_moment,
    integrate,
    log_gamma,
    spd_decompose,
)
from .tsallis import (
    entmax_finite,
    escort,
    generalized_covariance,
    normalizer_A_alpha,
    softmax,
    sparsemax,
    tsallis_negentropy_finite,
)
from .densities import (
    BetaGaussianParams,
    SupportDescriptor,
    beta_gaussian_radius,
    from_json,
    make_beta_gaussian,
    make_location_scale,
    make_sparse_integer_gaussian,
    make_sparse_poisson,
    make_triangular,
    make_truncated_gaussian,
    make_truncated_parabola,
    make_truncated_paraboloid,
    mean_variance,
    pdf,
    to_json,
    tsallis_negentropy,
    wasserstein2,
)
from .sampling import RngState, sample_beta, sample_beta_gaussian, sample_unit_sphere
from .losses import (
    FyEvaluation,
    cross_omega_loss,
    fit_moment_matching,
    fy_gradient_hessian,
    fy_loss_beta_gaussian,
    gaussian_kl,
    heteroscedastic_fit,
    heteroscedastic_loss,
)
from .attention import (
    AttentionBasis,
    QuadraticScore,
    attention_backward_1d,
    attention_backward_2d,
    attention_forward_1d,
    attention_forward_2d,
    context,
    discrete_attention,
    fit_value_function,
)
from .fusedmax import (
    PiecewiseDensity,
    SobolevDensity,
    abs_score,
    discrete_fusedmax,
    parabola_score,
    rof_fusedmax,
    sobolev_smooth,
    tv_denoise_1d,
)

__version__ = "0.1.0"
