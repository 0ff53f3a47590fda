"""Shared ensembles for the test suite.

The expensive objects (dense Cholesky factors, solver ensembles) are session
fixtures so every test module reuses one computation.  All seeds are fixed;
the statistical assertions below were sized against the frozen streams.
FIXTURE_SECONDS records construction cost so the acceptance lines can report
runtime inclusive of the data they consume.
"""

import time

import pytest

from roughheat.constants import ModelParams
from roughheat.sampling import SeedStream, TimeGrid, sample_linear_she
from roughheat.solver import SolverConfig, solve

H_STAR = 0.3
FIXTURE_SECONDS = {}


def _timed(name, build):
    t0 = time.time()
    out = build()
    FIXTURE_SECONDS[name] = time.time() - t0
    return out


@pytest.fixture(scope="session")
def fixture_seconds():
    """Construction cost of the shared ensembles (for runtime reporting)."""
    return FIXTURE_SECONDS


@pytest.fixture(scope="session")
def v_paths_1k():
    """500 exact linear-equation paths on the dyadic 2^10 grid, H = 0.3."""
    grid = TimeGrid.dyadic_unit(2 ** 10)
    return _timed("v_paths_1k", lambda: sample_linear_she(
        grid, H_STAR, 1.0, SeedStream(20240501, 0), n_paths=500))


@pytest.fixture(scope="session")
def v_paths_4k():
    """200 exact linear-equation paths on the dyadic 2^12 grid, H = 0.3."""
    grid = TimeGrid.dyadic_unit(2 ** 12)
    return _timed("v_paths_4k", lambda: sample_linear_she(
        grid, H_STAR, 1.0, SeedStream(20240502, 0), n_paths=200))


@pytest.fixture(scope="session")
def v_paths_4k_theta2():
    """100 exact paths with diffusivity theta = 2 on the dyadic 2^12 grid."""
    grid = TimeGrid.dyadic_unit(2 ** 12)
    return _timed("v_paths_4k_theta2", lambda: sample_linear_she(
        grid, H_STAR, 2.0, SeedStream(20240503, 0), n_paths=100))


@pytest.fixture(scope="session")
def lil_paths():
    """400 exact paths on [0, 2^-8] at spacing 2^-20 (origin-zoom grid)."""
    grid = TimeGrid(0.0, 2 ** 12 + 1, 2.0 ** -20)
    return _timed("lil_paths", lambda: sample_linear_she(
        grid, H_STAR, 1.0, SeedStream(20240504, 0), n_paths=400))


def _nonlinear_cfg(seed_index):
    return SolverConfig(
        params=ModelParams(H_STAR, 1.0, sigma="linear", u0="bump"),
        L=16.0, n_modes=2 ** 13, dt=2.0 ** -12, t_end=1.0,
        probes=(5.0,), record_stride=8,
        seed=SeedStream(20240505, seed_index), record_field=False)


@pytest.fixture(scope="session")
def nonlinear_probe_paths():
    """100 nonlinear solver runs (sigma(u) = u, bump initial data): probe paths."""
    def build():
        return [solve(_nonlinear_cfg(i)).probe_paths[0] for i in range(100)]
    return _timed("nonlinear_probe_paths", build)


@pytest.fixture(scope="session")
def solver_scaling_paths():
    """32 nonlinear runs recorded past t = 1 for increment-scaling regression."""
    t0 = time.time()
    paths = []
    for i in range(32):
        cfg = SolverConfig(
            params=ModelParams(H_STAR, 1.0, sigma="linear", u0="bump"),
            L=16.0, n_modes=2 ** 13, dt=2.0 ** -12, t_end=1.0 + 256 * 2.0 ** -12,
            probes=(0.0, 4.0, 8.0, 12.0), record_stride=4,
            seed=SeedStream(20240506, i), record_field=False)
        paths.extend(solve(cfg).probe_paths)
    FIXTURE_SECONDS["solver_scaling_paths"] = time.time() - t0
    return paths
