"""Exact samplers for the Gaussian processes behind the rough heat equation.

Every process with a known temporal covariance kernel (fBm(H/2), the linear
solution path, the smooth perturbation process T) is sampled exactly in law
by dense Cholesky factorization of its Gram matrix; stationary fractional
Gaussian noise additionally gets the circulant-embedding fast path.

Randomness comes from counter-based Philox streams keyed by
(root_seed, stream_index), so any trajectory can be regenerated bit-for-bit
in isolation and ensembles are independent of how work is partitioned
across processes.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import cov_fbm, cov_linear_she, cov_T, kappa

__all__ = [
    "SeedStream",
    "TimeGrid",
    "PathSample",
    "CovKernel",
    "fbm_kernel",
    "linear_she_kernel",
    "t_process_kernel",
    "FactorizationError",
    "cholesky_sample",
    "fgn_circulant",
    "sample_linear_she",
    "sample_T_process",
    "decompose_check",
]

# diagonal jitter ladder, relative to trace/n
_JITTERS = (0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10)


class FactorizationError(RuntimeError):
    """Gram matrix failed Cholesky even after jitter escalation."""


@dataclass(frozen=True)
class SeedStream:
    """Deterministic substream id: (root_seed, stream_index) keys a Philox generator."""

    root_seed: int
    stream_index: int = 0

    def generator(self):
        key = np.array([self.root_seed, self.stream_index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, offset):
        return SeedStream(self.root_seed, self.stream_index + offset)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid: n points t0, t0+dt, ..., t0+(n-1)*dt."""

    t0: float
    n: int
    dt: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs at least two points")
        if self.dt <= 0.0:
            raise ValueError("grid spacing must be positive")
        if self.t0 < 0.0:
            raise ValueError("grid must start at a nonnegative time")

    def times(self):
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def t_end(self):
        return self.t0 + self.dt * (self.n - 1)

    @classmethod
    def dyadic_unit(cls, N):
        """The grid t_i = i/N, i = 0..N, covering [0, 1]."""
        return cls(0.0, N + 1, 1.0 / N)


@dataclass
class PathSample:
    """One sampled path on a grid, tagged with its generating kernel and seed."""

    grid: TimeGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError("path length does not match its grid")


@dataclass(frozen=True)
class CovKernel:
    """Covariance function with an identity used for factorization caching."""

    id: str
    fn: object

    def __call__(self, s, t):
        return self.fn(s, t)

    def gram(self, times):
        s, t = np.meshgrid(times, times, indexing="ij")
        return np.asarray(self.fn(s, t), dtype=float)


def fbm_kernel(hurst):
    return CovKernel(f"fbm(h={hurst!r})", lambda s, t: cov_fbm(s, t, hurst))


def linear_she_kernel(H, theta=1.0):
    return CovKernel(f"linear_she(H={H!r},theta={theta!r})",
                     lambda s, t: cov_linear_she(s, t, H, theta))


def t_process_kernel(H):
    return CovKernel(f"t_process(H={H!r})", lambda s, t: cov_T(s, t, H))


_factor_cache = {}


def _grid_key(grid):
    return (repr(grid.t0), grid.n, repr(grid.dt))


def cholesky_factor(kernel, grid):
    """Lower factor of the kernel Gram matrix on the grid, with jitter escalation.

    Grid points where the kernel variance vanishes (e.g. t = 0 for processes
    pinned at the origin) are excluded from the factorization and their path
    values set to zero exactly.  Returns (L, live_index) and caches the result
    per (kernel.id, grid).
    """
    key = (kernel.id, _grid_key(grid))
    hit = _factor_cache.get(key)
    if hit is not None:
        return hit
    times = grid.times()
    C = kernel.gram(times)
    scale = np.trace(C) / grid.n
    if scale <= 0.0:
        raise FactorizationError(f"kernel {kernel.id} is identically zero on this grid")
    live = np.flatnonzero(np.diag(C) > 1e-15 * scale)
    Cl = C[np.ix_(live, live)]
    for lam in _JITTERS:
        try:
            L = np.linalg.cholesky(Cl + lam * scale * np.eye(live.size))
        except np.linalg.LinAlgError:
            continue
        _factor_cache[key] = (L, live)
        return L, live
    raise FactorizationError(
        f"kernel {kernel.id} not positive definite on grid (n={grid.n}) "
        f"after jitter up to {_JITTERS[-1]:g}*trace/n")


def cholesky_sample(kernel, grid, seed, n_paths=1):
    """Exact-in-law Gaussian paths with the kernel's Gram matrix as covariance.

    Path j draws from the substream seed.child(j), so an ensemble is
    reproducible path-by-path no matter how it is batched.

    Parameters
    ----------
    kernel : CovKernel
        Covariance function; must be PSD on the grid.
    grid : TimeGrid
    seed : SeedStream
        Stream of the first path.
    n_paths : int

    Returns
    -------
    list of PathSample
    """
    if grid.n > 2 ** 13:
        raise ValueError("dense factorization capped at n = 2^13 grid points")
    L, live = cholesky_factor(kernel, grid)
    out = []
    for j in range(n_paths):
        sj = seed.child(j)
        z = sj.generator().standard_normal(live.size)
        values = np.zeros(grid.n)
        values[live] = L @ z
        out.append(PathSample(grid, values, {"kernel": kernel.id, "seed": sj}))
    return out


def _embedding_eigenvalues(gamma, n):
    """Eigenvalues of the 2n-circulant embedding of the autocovariance gamma."""
    c = np.concatenate([gamma[:n], [gamma[n]], gamma[1:n][::-1]])
    return np.fft.fft(c).real


def fgn_circulant(n, hurst, seed):
    """Stationary fractional Gaussian noise by circulant embedding.

    Returns n increments with autocovariance
    gamma(k) = (|k+1|^2h + |k-1|^2h - 2|k|^2h)/2 on the unit-step grid; their
    cumulative sum is an fBm(hurst) path.  For hurst <= 1/2 the embedding is
    provably nonnegative definite, so a materially negative eigenvalue means
    numerical trouble: the sampler then falls back to dense Cholesky with a
    warning.
    """
    if not (0.0 < hurst < 1.0):
        raise ValueError(f"fBm index {hurst} outside (0, 1)")
    if n < 2:
        raise ValueError("need at least two increments")
    k = np.arange(n + 1, dtype=float)
    gamma = 0.5 * ((k + 1.0) ** (2 * hurst) + np.abs(k - 1.0) ** (2 * hurst)
                   - 2.0 * k ** (2 * hurst))
    m = 2 * n
    lam = _embedding_eigenvalues(gamma, n)
    if lam.min() < -1e-9 * lam.max():
        warnings.warn("circulant embedding not PSD; falling back to Cholesky",
                      RuntimeWarning)
        grid = TimeGrid(0.0, n + 1, 1.0)
        path = cholesky_sample(fbm_kernel(hurst), grid, seed)[0]
        return np.diff(path.values)
    lam = np.maximum(lam, 0.0)
    rng = seed.generator()
    z = rng.standard_normal(m)
    Z = np.empty(m, dtype=complex)
    Z[0] = z[0]
    Z[n] = z[1]
    Z[1:n] = (z[2:n + 1] + 1j * z[n + 1:]) / np.sqrt(2.0)
    Z[n + 1:] = np.conj(Z[1:n][::-1])
    return np.fft.ifft(np.sqrt(lam) * Z).real[:n] * np.sqrt(m)


def sample_linear_she(grid, H, theta, seed, n_paths=1):
    """Exact temporal paths of the additive-noise heat equation at a fixed point.

    The spatial probe coordinate does not appear: the temporal law is the
    same at every point, so only the kernel matters.  Variance at time t is
    theta^(H-1) * kappa_tilde(H)^2 * t^H.
    """
    return cholesky_sample(linear_she_kernel(H, theta), grid, seed, n_paths)


def sample_T_process(grid, H, seed, n_paths=1):
    """Exact paths of the smooth perturbation process (kernel cov_T)."""
    return cholesky_sample(t_process_kernel(H), grid, seed, n_paths)


@dataclass(frozen=True)
class DecomposeDiagnostic:
    max_abs_dev: float
    max_z: float
    n_pairs: int


def decompose_check(v_paths, T_paths, H):
    """Empirical check that kappa^{-1}(v + T) has the fBm(H/2) covariance.

    v and T ensembles must be independently seeded and share one grid.
    Returns the max-norm deviation between the empirical covariance of
    kappa^{-1}(v + T) and cov_fbm(.,., H/2), plus the largest entrywise
    z-score against the Gaussian sampling error of the empirical covariance.
    """
    if isinstance(v_paths, PathSample):
        v_paths = [v_paths]
    if isinstance(T_paths, PathSample):
        T_paths = [T_paths]
    if len(v_paths) != len(T_paths) or not v_paths:
        raise ValueError("need equally many v and T paths")
    grid = v_paths[0].grid
    for p in (*v_paths, *T_paths):
        if p.grid != grid:
            raise ValueError("all paths must share one grid")
    X = (np.stack([p.values for p in v_paths])
         + np.stack([p.values for p in T_paths])) / kappa(H)
    M = X.shape[0]
    emp = X.T @ X / M
    times = grid.times()
    s, t = np.meshgrid(times, times, indexing="ij")
    ref = cov_fbm(s, t, H / 2.0)
    dev = emp - ref
    # Var of an empirical covariance entry for Gaussians: (C_ii C_jj + C_ij^2)/M
    se = np.sqrt((np.outer(np.diag(ref), np.diag(ref)) + ref ** 2) / M)
    live = se > 0.0
    max_z = float(np.max(np.abs(dev[live]) / se[live])) if live.any() else 0.0
    return DecomposeDiagnostic(float(np.max(np.abs(dev))), max_z, M)
