"""roughheat: the 1-D stochastic heat equation driven by rough spatial noise.

Exact Gaussian samplers for the temporal laws of the linear equation, a
spectral exponential-Euler solver for the nonlinear equation on a periodic
domain, temporal-regularity statistics (quadratic and power variation,
iterated-logarithm ratios, scaling exponents), frequency-band second moments,
and drift/Hurst estimation, with a reproducible Monte Carlo harness.
"""

from .constants import (ModelParams, RegularityMeta, cov_fbm, cov_linear_she,
                        cov_T, gamma_fn, gaussian_abs_moment, heat_kernel,
                        kappa, kappa_tilde, rho_H, spectral_constant)
from .estimators import (DegenerateEstimateError, EstimateReport, estimate_H,
                         estimate_theta)
from .quadrature import QuadratureSpec
from .sampling import (CovKernel, FactorizationError, PathSample, SeedStream,
                       TimeGrid, cholesky_sample, decompose_check, fbm_kernel,
                       fgn_circulant, linear_she_kernel, sample_linear_she,
                       sample_T_process, t_process_kernel)
from .solver import (BlowUpError, FieldTrajectory, SigmaSpec, SolverConfig,
                     cross_validate_linear, load_solver_config, make_sigma,
                     save_solver_config, solve, synthesize_noise_step)
from .spectral import (SpectralBand, band_second_moment, tail_bound_check,
                       verify_green_finiteness, verify_kernel_scaling)
from .stats import (LILReport, QVarReport, chung_statistic, dyadic_restrict,
                    increment, khinchin_statistic, quadratic_variation,
                    qvar_target, qvar_variance_decay, scaling_exponent,
                    second_moment_slope_from_kernel, weighted_power_variation)

__version__ = "0.1.0"
