"""Temporal statistics of a path at a fixed spatial point.

Covers dyadic increments, normalized quadratic variation, weighted power
variation, iterated-logarithm ratio statistics, and scaling-exponent
regression.  All operations are pure folds over path vectors; ensemble
reductions happen in deterministic order.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import gaussian_abs_moment, kappa
from .sampling import PathSample, TimeGrid

__all__ = [
    "QVarReport",
    "LILReport",
    "increment",
    "dyadic_restrict",
    "quadratic_variation",
    "qvar_target",
    "qvar_variance_decay",
    "DecayReport",
    "weighted_power_variation",
    "PvarReport",
    "WEIGHT_REGISTRY",
    "khinchin_statistic",
    "chung_statistic",
    "scaling_exponent",
    "SlopeReport",
    "second_moment_slope_from_kernel",
]


@dataclass(frozen=True)
class QVarReport:
    N: int
    V_N: float
    target: float
    rel_error: float
    mc_summary: object = None

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("quadratic variation needs N >= 2")
        if self.V_N < 0.0:
            raise ValueError("realized quadratic variation cannot be negative")


@dataclass(frozen=True)
class LILReport:
    eps_grid: tuple
    khinchin_stat: tuple
    chung_stat: float
    reference: float


def increment(path, eps_steps):
    """Forward increments values[i + eps_steps] - values[i]."""
    v = path.values if isinstance(path, PathSample) else np.asarray(path, float)
    if not (1 <= eps_steps <= v.size - 1):
        raise ValueError(f"eps_steps {eps_steps} out of range for length {v.size}")
    return v[eps_steps:] - v[:-eps_steps]


def _check_unit_grid(path):
    g = path.grid
    if abs(g.t0) > 1e-12 or abs(g.t_end - 1.0) > 1e-9:
        raise ValueError("path must cover [0, 1]")
    return g.n - 1


def dyadic_restrict(path, N):
    """Restrict a [0, 1] path to the grid t_i = i/N; fails if it cannot align."""
    M = _check_unit_grid(path)
    if M % N:
        raise ValueError(f"grid with {M} steps does not contain the dyadic {N}-grid")
    stride = M // N
    return PathSample(TimeGrid(0.0, N + 1, 1.0 / N), path.values[::stride],
                      dict(path.meta, restricted_from=M))


def quadratic_variation(path, H, target=None):
    """Normalized quadratic variation N^(H-1) * sum of squared unit-lag increments.

    The path must cover [0, 1] with exactly N+1 points.  When a comparison
    target is supplied the report carries the relative error against it.
    """
    N = _check_unit_grid(path)
    d = np.diff(path.values)
    V = N ** (H - 1.0) * float(d @ d)
    tgt = kappa(H) ** 2 if target is None else float(target)
    rel = abs(V - tgt) / abs(tgt) if tgt != 0.0 else math.inf if V else 0.0
    return QVarReport(N, V, tgt, rel)


def qvar_target(path, sigma, H, theta=1.0):
    """Plug-in limit for the quadratic variation of a diffusion-modulated path.

    theta^(H-1) * kappa^2 * (1/N) * sum_i sigma(u(t_i))^2 over the left grid
    points, the Riemann-sum surrogate of the limiting integral.
    """
    N = _check_unit_grid(path)
    su = np.asarray(sigma(path.values[:-1]), dtype=float)
    return theta ** (H - 1.0) * kappa(H) ** 2 * float(su @ su) / N


@dataclass(frozen=True)
class DecayReport:
    N_list: tuple
    mean_sq_err: tuple
    slope: float


def qvar_variance_decay(paths, N_list, H):
    """Regression slope of log E|V_N - kappa^2|^2 against log N.

    Every N must be a dyadic restriction of the paths' grid; the same paths
    feed every level, which only helps the slope estimate.
    """
    if len(N_list) < 2:
        raise ValueError("need at least two N levels for a slope")
    if not paths:
        raise ValueError("empty ensemble")
    k2 = kappa(H) ** 2
    mse = []
    for N in N_list:
        errs = [(quadratic_variation(dyadic_restrict(p, N), H).V_N - k2) ** 2
                for p in paths]
        mse.append(float(np.mean(errs)))
    slope = float(np.polyfit(np.log(np.asarray(N_list, float)), np.log(mse), 1)[0])
    return DecayReport(tuple(int(N) for N in N_list), tuple(mse), slope)


WEIGHT_REGISTRY = {
    "one": lambda u: np.ones_like(u),
    "identity": lambda u: u,
    "tanh": np.tanh,
}


@dataclass(frozen=True)
class PvarReport:
    n_dyadic: int
    value: float
    target: float


def weighted_power_variation(path, phi, sigma, H, theta=1.0):
    """Realized weighted 2/H-power variation and its plug-in target.

    sum_j phi(u(j/2^n)) |u((j+1)/2^n) - u(j/2^n)|^(2/H) versus
    c * (1/2^n) sum_j phi(u(t_j)) |sigma(u(t_j))|^(2/H) with
    c = (theta^(H-1) kappa^2)^(1/H) E|N|^(2/H).
    """
    N = _check_unit_grid(path)
    n = int(round(math.log2(N)))
    if 2 ** n != N:
        raise ValueError("power variation needs a dyadic grid 2^n + 1 points")
    if isinstance(phi, str):
        phi = WEIGHT_REGISTRY[phi]
    p = 2.0 / H
    u_left = path.values[:-1]
    w = np.asarray(phi(u_left), dtype=float)
    value = float(w @ np.abs(np.diff(path.values)) ** p)
    c = (theta ** (H - 1.0) * kappa(H) ** 2) ** (1.0 / H) * gaussian_abs_moment(p)
    target = c * float(w @ np.abs(np.asarray(sigma(u_left), float)) ** p) / N
    return PvarReport(n, value, target)


def _loglog_guard(r):
    return np.maximum(np.log(np.log(1.0 / r)), 1.0)


def _eps_to_steps(path, eps_levels):
    dt = path.grid.dt
    steps = []
    for eps in eps_levels:
        s = eps / dt
        if abs(s - round(s)) > 1e-9 or round(s) < 1:
            raise ValueError(f"epsilon {eps} not resolvable on grid spacing {dt}")
        steps.append(int(round(s)))
    return steps


def khinchin_statistic(path, t_index, eps_levels, H, reference=1.0):
    """Running sup of |u(t+r) - u(t)| / (r^(H/2) sqrt(2 loglog(1/r))) per level.

    The sup runs over grid offsets r <= eps for each level; loglog(1/r) is
    clipped at 1 so levels near r = 1/e^e stay finite.  `reference` is the
    normalization the caller will compare against (kappa_tilde at the origin,
    kappa |sigma(u(t))| at interior times); it is recorded, not applied.
    """
    v = path.values
    if not (0 <= t_index < v.size - 1):
        raise ValueError("t_index out of range")
    steps = _eps_to_steps(path, eps_levels)
    max_step = max(steps)
    if t_index + max_step >= v.size:
        raise ValueError("largest epsilon level exceeds the path horizon")
    offsets = np.arange(1, max_step + 1)
    r = offsets * path.grid.dt
    ratios = np.abs(v[t_index + offsets] - v[t_index]) / (
        r ** (H / 2.0) * np.sqrt(2.0 * _loglog_guard(r)))
    running = np.maximum.accumulate(ratios)
    stats = tuple(float(running[s - 1]) for s in steps)
    return LILReport(tuple(float(e) for e in eps_levels), stats,
                     float("nan"), reference)


def chung_statistic(path, eps_levels, H):
    """min over levels of sup_{r <= eps} |u(r)| / (eps / loglog(1/eps))^(H/2).

    Anchored at the start of the path (pass a re-anchored segment for
    interior times).  Homogeneous of degree one in the path amplitude.
    """
    v = path.values
    steps = _eps_to_steps(path, eps_levels)
    if max(steps) >= v.size:
        raise ValueError("largest epsilon level exceeds the path horizon")
    run_sup = np.maximum.accumulate(np.abs(v))
    out = math.inf
    for s, eps in zip(steps, eps_levels):
        den = (eps / max(math.log(math.log(1.0 / eps)), 1.0)) ** (H / 2.0)
        out = min(out, float(run_sup[s]) / den)
    return out


@dataclass(frozen=True)
class SlopeReport:
    eps: tuple
    second_moments: tuple
    slope: float
    stderr: float


def _slope_fit(eps, m2):
    x = np.log(np.asarray(eps, float))
    y = np.log(np.asarray(m2, float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    dof = max(x.size - 2, 1)
    s2 = (res[0] / dof if res.size else 0.0)
    xc = x - x.mean()
    se = math.sqrt(s2 / float(xc @ xc)) if float(xc @ xc) > 0 else 0.0
    return float(coef[0]), se


def scaling_exponent(paths, t_index, eps_steps_list, n_anchors=1):
    """Least-squares slope of log E|u(t+eps) - u(t)|^2 against log eps.

    Second moments are estimated over the ensemble at anchor t_index; with
    n_anchors > 1 they additionally pool earlier anchors spaced by the
    largest lag, trading a little increment stationarity for much lower
    Monte Carlo noise.  Expected slope: H for the rough model, 1/2 at the
    white-noise limit.
    """
    if len(eps_steps_list) < 4:
        raise ValueError("need at least four epsilon levels")
    if not paths:
        raise ValueError("empty ensemble")
    dt = paths[0].grid.dt
    max_step = max(eps_steps_list)
    anchors = [t_index - j * max_step for j in range(n_anchors)]
    if anchors[-1] < 0:
        raise ValueError("anchor block runs past the start of the path")
    V = np.stack([p.values for p in paths])
    if t_index + max_step >= V.shape[1]:
        raise ValueError("lag exceeds path horizon")
    eps, m2 = [], []
    for s in eps_steps_list:
        d = np.concatenate([V[:, a + s] - V[:, a] for a in anchors])
        eps.append(s * dt)
        m2.append(float(np.mean(d * d)))
    slope, se = _slope_fit(eps, m2)
    return SlopeReport(tuple(eps), tuple(m2), slope, se)


def second_moment_slope_from_kernel(kernel, t_anchor, eps_list):
    """Scaling slope computed exactly from a covariance kernel (no sampling)."""
    eps = np.asarray(eps_list, float)
    g = (kernel(t_anchor + eps, t_anchor + eps) + kernel(t_anchor, t_anchor)
         - 2.0 * kernel(t_anchor, t_anchor + eps))
    slope, se = _slope_fit(eps, g)
    return SlopeReport(tuple(eps.tolist()), tuple(g.tolist()), slope, se)
