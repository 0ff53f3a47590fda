"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v` to see the per-criterion
lines and timings.  Statistical criteria run on frozen Philox streams, so
outcomes are reproducible bit-for-bit.
"""

import filecmp
import math
import os
import time

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma as sc_gamma

from roughheat.constants import (ModelParams, cov_fbm, cov_linear_she, cov_T,
                                 kappa, kappa_tilde)
from roughheat.estimators import ensemble_report, estimate_H, estimate_theta
from roughheat.harness import ExperimentConfig, run
from roughheat.quadrature import QuadratureSpec
from roughheat.sampling import SeedStream, linear_she_kernel
from roughheat.solver import SolverConfig, cross_validate_linear
from roughheat.spectral import (SpectralBand, band_second_moment,
                                tail_bound_check, verify_green_finiteness,
                                verify_kernel_scaling)
from roughheat.stats import (chung_statistic, dyadic_restrict,
                             khinchin_statistic, quadratic_variation,
                             qvar_target, qvar_variance_decay,
                             scaling_exponent, second_moment_slope_from_kernel)

H = 0.3
ONE = lambda u: np.ones_like(u)


_CAPSYS = None


@pytest.fixture(autouse=True)
def _report_channel(capsys):
    """Let report() print its PASS/FAIL line past pytest's output capture."""
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def report(n, ok, detail, elapsed):
    line = f"ACCEPTANCE {n:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:6.1f}s) {detail}"
    if _CAPSYS is not None:
        with _CAPSYS.disabled():
            print("\n" + line)
    else:
        print("\n" + line)
    assert ok, line


def test_criterion_01_constants_identities():
    t0 = time.time()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        s, t = rng.uniform(0.05, 5.0, 2)
        Hr = rng.uniform(0.26, 0.49)
        worst = max(worst, abs(kappa_tilde(Hr) ** 2 / kappa(Hr) ** 2
                               - 2.0 ** (Hr - 1.0)) / 2.0 ** (Hr - 1.0))
        lhs = cov_T(s, t, Hr) + cov_linear_she(s, t, Hr, 1.0)
        rhs = kappa(Hr) ** 2 * cov_fbm(s, t, Hr / 2.0)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
        tt = rng.uniform(0.05, 5.0)
        worst = max(worst, abs(cov_linear_she(tt, tt, Hr, 1.0)
                               - kappa_tilde(Hr) ** 2 * tt ** Hr)
                    / (kappa_tilde(Hr) ** 2 * tt ** Hr))
    elapsed = time.time() - t0
    report(1, worst < 1e-12 and elapsed < 1.0,
           f"identity residuals < 1e-12 (worst {worst:.2e})", elapsed)


def test_criterion_02_quadrature_oracles():
    t0 = time.time()
    points = [(1.0, 0.3), (0.5, 0.35), (0.25, 0.45), (2.0, 0.28), (1.5, 0.4)]
    worst_T = 0.0
    for (t, Hq) in points:
        pref = sc_gamma(1 + 2 * Hq) * math.sin(Hq * math.pi) / (4 * math.pi)
        val, _ = integrate.quad(
            lambda xi: 2.0 * (1 - math.exp(-t * xi * xi)) ** 2 * xi ** (-1 - 2 * Hq),
            0, np.inf, limit=400)
        worst_T = max(worst_T, abs(cov_T(t, t, Hq) - pref * val) / (pref * val))
    worst_band = 0.0
    q = QuadratureSpec(rel_tol=1e-7)
    for (t, Hq) in points:
        got = band_second_moment(SpectralBand(0.0, np.inf), t, Hq, q).value
        tgt = kappa_tilde(Hq) ** 2 * t ** Hq
        worst_band = max(worst_band, abs(got - tgt) / tgt)
    elapsed = time.time() - t0
    ok = worst_T < 1e-6 and worst_band < 1e-6 and elapsed < 60.0
    report(2, ok, f"cov_T vs spectral integral {worst_T:.1e}; "
           f"band moment vs variance law {worst_band:.1e}", elapsed)


def test_criterion_03_linear_quadratic_variation(v_paths_1k, fixture_seconds):
    t0 = time.time()
    k2 = kappa(H) ** 2
    V = [quadratic_variation(p, H).V_N for p in v_paths_1k[:200]]
    mean = float(np.mean(V))
    se = float(np.std(V, ddof=1) / math.sqrt(len(V)))
    z = abs(mean - k2) / se
    decay = qvar_variance_decay(v_paths_1k, [2 ** 8, 2 ** 9, 2 ** 10], H)
    elapsed = time.time() - t0 + fixture_seconds.get("v_paths_1k", 0.0)
    ok = (k2 == pytest.approx(0.497796, abs=5e-7)) and z <= 3.0 \
        and -1.4 <= decay.slope <= -0.6 and elapsed < 600.0
    report(3, ok, f"mean V_N {mean:.5f} vs kappa^2 {k2:.5f} (z={z:.2f}); "
           f"decay slope {decay.slope:.2f} in [-1.4,-0.6]", elapsed)


def test_criterion_04_nonlinear_quadratic_variation(nonlinear_probe_paths, fixture_seconds):
    t0 = time.time()
    from roughheat.solver import make_sigma
    sigma = make_sigma("linear", (1.0,))
    ratios = []
    for p in nonlinear_probe_paths:
        rp = dyadic_restrict(p, 2 ** 9)
        V = quadratic_variation(rp, H).V_N
        ratios.append(V / qvar_target(rp, sigma, H, 1.0))
    mean = float(np.mean(ratios))
    elapsed = time.time() - t0 \
        + fixture_seconds.get("nonlinear_probe_paths", 0.0)
    ok = 0.85 <= mean <= 1.15 and len(ratios) == 100 and elapsed < 3600.0
    report(4, ok, f"mean V_N/target = {mean:.4f} in [0.85, 1.15] (M=100)", elapsed)


def test_criterion_05_solver_cross_validation():
    t0 = time.time()
    details = []
    ok = True
    for theta in (1.0, 2.0):
        cfg = SolverConfig(params=ModelParams(H, theta, sigma="one", u0="zero"),
                           L=48.0, n_modes=2 ** 13, dt=2.5e-4, t_end=1.0,
                           probes=(0.0,), record_stride=1000,
                           seed=SeedStream(0, 0))
        rep = cross_validate_linear(cfg, [0.25, 0.5, 1.0],
                                    [SeedStream(6100 + int(theta), i) for i in range(200)])
        ok = ok and rep.max_rel_dev <= 0.10
        details.append(f"theta={theta}: maxdev {100 * rep.max_rel_dev:.1f}%")
    # dt-refinement trend at theta = 1
    devs, ses = [], []
    for dt, stride in ((1e-3, 250), (5e-4, 500), (2.5e-4, 1000)):
        cfg = SolverConfig(params=ModelParams(H, 1.0, sigma="one", u0="zero"),
                           L=48.0, n_modes=2 ** 13, dt=dt, t_end=1.0,
                           probes=(0.0,), record_stride=stride,
                           seed=SeedStream(0, 0))
        rep = cross_validate_linear(cfg, [1.0], [SeedStream(6200, i) for i in range(200)])
        devs.append(rep.max_rel_dev)
        ses.append(rep.stderrs[0])
    trend_ok = all(devs[i + 1] <= devs[i] + 2 * (ses[i] + ses[i + 1])
                   for i in range(len(devs) - 1))
    elapsed = time.time() - t0
    ok = ok and trend_ok and elapsed < 1800.0
    report(5, ok, "; ".join(details) + f"; refinement devs {['%.3f' % d for d in devs]} "
           f"non-increasing within slack: {trend_ok}", elapsed)


def test_criterion_06_scaling_exponent(solver_scaling_paths, fixture_seconds):
    t0 = time.time()
    eps = (2.0 ** np.arange(-12, -3)).tolist()
    exact = second_moment_slope_from_kernel(linear_she_kernel(H, 1.0), 1.0, eps)
    rec_dt = solver_scaling_paths[0].grid.dt
    anchor = int(round(1.0 / rec_dt))
    solver = scaling_exponent(solver_scaling_paths, anchor, [1, 2, 4, 8, 16],
                              n_anchors=8)
    elapsed = time.time() - t0 + fixture_seconds.get("solver_scaling_paths", 0.0)
    ok = abs(exact.slope - H) <= 0.02 and abs(solver.slope - H) <= 0.10 \
        and elapsed < 600.0
    report(6, ok, f"exact-kernel slope {exact.slope:.4f} (H +- 0.02); "
           f"solver slope {solver.slope:.3f} (H +- 0.1)", elapsed)


def test_criterion_07_lil_envelopes(lil_paths, fixture_seconds):
    t0 = time.time()
    kt = kappa_tilde(H)
    eps_levels = [2.0 ** k for k in range(-20, -7)]
    khin = np.array([khinchin_statistic(p, 0, eps_levels, H).khinchin_stat[-1]
                     for p in lil_paths[:200]])
    frac = float(np.mean((khin >= 0.2 * kt) & (khin <= 3.0 * kt)))
    chung = np.array([chung_statistic(p, eps_levels, H) for p in lil_paths])
    positive = bool(np.all(chung > 0.0) and np.all(np.isfinite(chung)))
    med_a, med_b = float(np.median(chung[:200])), float(np.median(chung[200:]))
    stab = abs(med_a - med_b) / med_a
    elapsed = time.time() - t0 + fixture_seconds.get("lil_paths", 0.0)
    ok = frac >= 0.90 and positive and stab <= 0.30
    report(7, ok, f"khinchin envelope fraction {frac:.3f} (>=0.90); "
           f"chung medians {med_a:.3f}/{med_b:.3f} (batch dev {100 * stab:.1f}%)",
           elapsed)


def test_criterion_08_tail_bounds():
    t0 = time.time()
    q = QuadratureSpec(rel_tol=1e-5)
    combos = [(a, b, t) for t in (0.5, 1.0) for a in (0.0, 0.5, 1.0)
              for b in (2.0, 4.0, 8.0, np.inf)][:20]
    results = [tail_bound_check(a, b, t, H, q) for (a, b, t) in combos]
    n_ok = sum(r.ok for r in results)
    elapsed = time.time() - t0
    ok = n_ok == 20 and elapsed < 300.0
    report(8, ok, f"{n_ok}/20 grid points satisfy lhs <= rhs", elapsed)


def test_criterion_09_appendix_checks():
    t0 = time.time()
    devs = [verify_kernel_scaling(beta, [0.5, 1.0, 2.0]).max_ratio_dev
            for beta in (0.1, 0.2, 0.25)]
    green = verify_green_finiteness(H, 0.1)
    elapsed = time.time() - t0
    ok = max(devs) < 1e-3 and green.converged and elapsed < 300.0
    report(9, ok, f"kernel scaling ratio devs {['%.1e' % d for d in devs]} < 1e-3; "
           f"singular integral refinement-stable at {green.value:.4f}", elapsed)


def test_criterion_10_estimation(v_paths_4k, v_paths_4k_theta2, fixture_seconds):
    t0 = time.time()
    rep1 = ensemble_report("theta", [estimate_theta(p, ONE, H)
                                     for p in v_paths_4k[:100]], true_value=1.0)
    rep2 = ensemble_report("theta", [estimate_theta(p, ONE, H)
                                     for p in v_paths_4k_theta2], true_value=2.0)
    repH = ensemble_report("H", [estimate_H(p).value for p in v_paths_4k[:100]],
                           true_value=H)
    trend = []
    for N in (2 ** 10, 2 ** 11, 2 ** 12):
        r = ensemble_report("theta", [estimate_theta(dyadic_restrict(p, N), ONE, H)
                                      for p in v_paths_4k[:100]], true_value=1.0)
        trend.append((r.rel_error, r.mc_stderr))
    trend_ok = all(b[0] <= a[0] + 2 * (a[1] + b[1]) for a, b in zip(trend, trend[1:]))
    elapsed = time.time() - t0 + fixture_seconds.get("v_paths_4k", 0.0) \
        + fixture_seconds.get("v_paths_4k_theta2", 0.0)
    ok = rep1.rel_error <= 0.10 and rep2.rel_error <= 0.10 \
        and abs(repH.mc_mean - H) <= 0.03 and trend_ok and elapsed < 900.0
    report(10, ok, f"theta rel errors {rep1.rel_error:.3f}/{rep2.rel_error:.3f} "
           f"(<=0.10); mean H_hat {repH.mc_mean:.3f} (0.3 +- 0.03); "
           f"N-trend ok: {trend_ok}", elapsed)


def test_criterion_11_worker_determinism(tmp_path):
    t0 = time.time()
    battery = [
        ("sample", {"kernel": "linear_she", "N": 128}, 8),
        ("qvar", {"N": 256, "decay_N_list": (64, 128, 256)}, 12),
        ("estimate", {"N": 512}, 8),
        ("pvar", {"n_dyadic": 8}, 8),
        ("solve", {"L": 16.0, "n_modes": 128, "dt": 1.0 / 512, "t_end": 0.125,
                   "record_stride": 8, "probes": (0.0,)}, 4),
        ("lil", {"eps_min_log2": -16, "eps_max_log2": -8}, 8),
    ]

    def run_all(workers, sub):
        for exp, numeric, n in battery:
            model = ModelParams(H, sigma="linear" if exp == "solve" else "one",
                                u0="bump" if exp == "solve" else "zero")
            cfg = ExperimentConfig(exp, model, numeric, n_paths=n, root_seed=17,
                                   workers=workers,
                                   out_dir=str(tmp_path / sub / exp))
            assert run(cfg) in (0, 1)

    run_all(1, "w1")
    run_all(4, "w4")
    identical = True
    for exp, _, _ in battery:
        d1, d4 = tmp_path / "w1" / exp, tmp_path / "w4" / exp
        names = sorted(os.listdir(d1))
        if names != sorted(os.listdir(d4)):
            identical = False
            break
        _, mismatch, errors = filecmp.cmpfiles(d1, d4, names, shallow=False)
        if mismatch or errors:
            identical = False
            break
    elapsed = time.time() - t0
    report(11, identical, "byte-identical artifacts for workers in {1, 4} "
           f"across {len(battery)} experiments", elapsed)
