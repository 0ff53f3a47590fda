"""Parameter inference from discrete temporal observations at one spatial point.

The drift estimator inverts the quadratic-variation limit: with known H and
sigma, V_N converges to theta^(H-1) kappa^2 (1/N) sum sigma(u(t_i))^2, so

    theta_hat = [ V_N / (kappa^2 (1/N) sum sigma(u(t_i))^2) ]^(1/(H-1)).

The Hurst estimator is a change-of-frequency ratio on raw dyadic sums of
squared increments, S_N = sum (u(t_{i+1}) - u(t_i))^2 ~ N^(1-H):

    H_hat = 1 - log2(S_{2N} / S_N).
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import kappa
from .stats import dyadic_restrict, _check_unit_grid

__all__ = ["EstimateReport", "DegenerateEstimateError", "estimate_theta",
           "estimate_H", "HurstEstimate", "ensemble_report"]

# a fitted exponent this close to the smooth-path value 1 means the
# observations carry no resolvable roughness
_SMOOTH_CUTOFF = 0.8


class DegenerateEstimateError(RuntimeError):
    """The estimator is undefined on this input (e.g. sigma vanishes on the path)."""


@dataclass(frozen=True)
class EstimateReport:
    estimator: str
    mc_mean: float
    mc_stderr: float
    count: int
    true_value: float = None
    rel_error: float = None
    mode: str = ""


def estimate_theta(path, sigma, H):
    """Plug-in drift estimate from one path on the dyadic [0, 1] grid.

    Scale-consistent for sigma(u) = u (numerator and denominator share the
    path scale) and strictly decreasing in the realized quadratic variation
    since 1/(H-1) < 0.
    """
    N = _check_unit_grid(path)
    d = np.diff(path.values)
    V = N ** (H - 1.0) * float(d @ d)
    su = np.asarray(sigma(path.values[:-1]), dtype=float)
    denom = kappa(H) ** 2 * float(su @ su) / N
    if denom <= 0.0:
        raise DegenerateEstimateError("sigma vanishes along the whole path")
    if V <= 0.0:
        raise DegenerateEstimateError("zero quadratic variation")
    return (V / denom) ** (1.0 / (H - 1.0))


@dataclass(frozen=True)
class HurstEstimate:
    value: float
    S_N: float
    S_2N: float
    out_of_model: bool


def estimate_H(path, N=None):
    """Change-of-frequency Hurst estimate from a path resolvable at N and 2N.

    N defaults to half the path's own resolution.  A fitted value near 1
    (smooth path) is flagged out_of_model rather than trusted.
    """
    M = _check_unit_grid(path)
    if N is None:
        N = M // 2
    if N < 2 or M % (2 * N):
        raise ValueError(f"path with {M} steps is not resolvable at N={N} and 2N")
    dN = np.diff(dyadic_restrict(path, N).values)
    d2N = np.diff(dyadic_restrict(path, 2 * N).values)
    S_N = float(dN @ dN)
    S_2N = float(d2N @ d2N)
    if S_N <= 0.0 or S_2N <= 0.0:
        raise DegenerateEstimateError("degenerate (constant) path")
    h = 1.0 - math.log2(S_2N / S_N)
    return HurstEstimate(h, S_N, S_2N, h > _SMOOTH_CUTOFF)


def ensemble_report(name, values, true_value=None, mode=""):
    """Deterministic-order mean/stderr summary of per-path estimates."""
    vals = np.asarray(list(values), dtype=float)
    if vals.size == 0:
        raise ValueError("empty ensemble")
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    rel = None
    if true_value not in (None, 0.0):
        rel = abs(mean - true_value) / abs(true_value)
    return EstimateReport(name, mean, stderr, int(vals.size), true_value, rel, mode)
