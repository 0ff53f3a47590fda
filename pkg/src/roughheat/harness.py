"""Experiment orchestration: configs, parallel Monte Carlo, aggregation, artifacts.

Each experiment writes a deterministic artifact set into its output
directory: `manifest.json` (the resolved semantic configuration, enough to
regenerate everything), `summary.json` (statistics and pass/fail against the
declared tolerances), CSV tables, and per-path files where applicable.
Worker count is an execution detail: it is excluded from the manifest, and
artifacts are byte-identical for any number of workers because every
trajectory depends only on (root_seed, stream_index) and results merge in
stream order.
"""

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import get_context

import numpy as np

from . import dataio
from .constants import (ModelParams, cov_fbm, cov_linear_she, cov_T, kappa,
                        kappa_tilde, spectral_constant)
from .estimators import ensemble_report, estimate_H, estimate_theta
from .quadrature import QuadratureSpec
from .sampling import (PathSample, SeedStream, TimeGrid, cholesky_factor,
                       cholesky_sample, fbm_kernel, fgn_circulant,
                       linear_she_kernel, sample_linear_she, t_process_kernel)
from .solver import BlowUpError, SolverConfig, make_sigma, solve
from .spectral import check_record, tail_bound_check
from .stats import (chung_statistic, dyadic_restrict, khinchin_statistic,
                    quadratic_variation, qvar_target, scaling_exponent,
                    second_moment_slope_from_kernel, weighted_power_variation)

__all__ = ["ExperimentConfig", "EnsembleSummary", "ConfigError", "run",
           "seed_plan", "EXPERIMENTS", "default_numeric", "default_tolerances"]

EXPERIMENTS = ("verify-constants", "sample", "solve", "qvar", "lil", "pvar",
               "estimate", "tailbounds", "scaling")

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_ABORTS = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: ModelParams
    numeric: dict
    n_paths: int = 100
    root_seed: int = 0
    workers: int = 1
    out_dir: str = "."
    formats: tuple = ("csv", "json")
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.n_paths < 1 or self.workers < 1:
            raise ConfigError("n_paths and workers must be at least 1")
        if not isinstance(self.model.sigma, str):
            raise ConfigError("harness configs carry sigma as a registry id")


@dataclass
class EnsembleSummary:
    stats: dict
    checks: dict
    count: int
    aborted: list

    def passed(self):
        return all(c["ok"] for c in self.checks.values())


def default_numeric(experiment):
    """Shipped numeric defaults for each experiment id."""
    return {
        "verify-constants": {"n_triples": 100},
        "sample": {"kernel": "linear_she", "N": 256},
        "solve": {"L": 16.0, "n_modes": 1024, "dt": 1e-3, "t_end": 0.25,
                  "record_stride": 5, "probes": (0.0,)},
        "qvar": {"source": "exact", "N": 1024, "decay_N_list": (),
                 "L": 16.0, "n_modes": 8192, "dt": 1.0 / 4096, "probes": (5.0,)},
        "lil": {"eps_min_log2": -20, "eps_max_log2": -8},
        "pvar": {"n_dyadic": 12, "phi": "one"},
        "estimate": {"source": "exact", "N": 4096, "trend_N_list": (),
                     "estimators": ("theta", "H"), "L": 16.0, "n_modes": 8192,
                     "dt": 1.0 / 4096, "probes": (5.0,)},
        "tailbounds": {"a_list": (0.0, 0.25, 0.5, 1.0), "b_list": (2.0, 4.0, 8.0, 16.0, math.inf),
                       "t_list": (1.0,), "rel_tol": 1e-5},
        "scaling": {"source": "exact", "t_anchor": 1.0,
                    "eps_steps": (1, 2, 4, 8, 16), "n_anchors": 8,
                    "L": 16.0, "n_modes": 8192, "dt": 2.0 ** -12,
                    "t_end": 1.0 + 256 * 2.0 ** -12, "record_stride": 4,
                    "probes": (0.0, 4.0, 8.0, 12.0)},
    }[experiment]


def default_tolerances(experiment, source="exact"):
    """Shipped tolerance defaults; these mirror the acceptance thresholds."""
    table = {
        "verify-constants": {"identity_residual": 1e-12},
        "sample": {},
        "solve": {},
        "qvar": {"mean_z": 3.0, "decay_slope_lo": -1.4, "decay_slope_hi": -0.6}
        if source == "exact" else {"ratio_lo": 0.85, "ratio_hi": 1.15},
        "lil": {"khinchin_lo": 0.2, "khinchin_hi": 3.0, "khinchin_fraction": 0.9,
                "chung_batch_rel": 0.30},
        "pvar": {"mean_ratio_dev": 0.10},
        "estimate": {"theta_rel": 0.10, "H_abs": 0.03}
        if source == "exact" else {"theta_rel": 0.25, "H_abs": 0.08},
        "tailbounds": {"all_ok": 1.0},
        "scaling": {"slope_abs": 0.02} if source == "exact" else {"slope_abs": 0.10},
    }
    return dict(table[experiment])


def seed_plan(root_seed, n_paths):
    """One Philox substream per trajectory; stable under any partitioning."""
    if n_paths < 1:
        raise ConfigError("n_paths must be at least 1")
    return [SeedStream(root_seed, i) for i in range(n_paths)]


def _pool_map(fn, args, workers):
    if workers <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    ctx = get_context("fork")
    chunk = max(1, len(args) // (4 * workers))
    with ctx.Pool(workers) as pool:
        return pool.map(fn, args, chunksize=chunk)


# ---------------------------------------------------------------------------
# per-path tasks (module level so they pickle for worker processes)

def _exact_path_values(model, grid, seed):
    return sample_linear_she(grid, model.H, model.theta, seed, 1)[0]


def _qvar_exact_task(cfg, num, idx):
    grid = TimeGrid.dyadic_unit(num["N"])
    path = _exact_path_values(cfg.model, grid, SeedStream(cfg.root_seed, idx))
    V = quadratic_variation(path, cfg.model.H).V_N
    out = {"index": idx, "V_N": V}
    for N in num.get("decay_N_list", ()):
        out[f"V_{N}"] = quadratic_variation(dyadic_restrict(path, N), cfg.model.H).V_N
    return out


def _solver_config(cfg, num, idx, record_field=False):
    return SolverConfig(
        params=cfg.model,
        L=num["L"], n_modes=num["n_modes"], dt=num["dt"],
        t_end=num.get("t_end", 1.0),
        probes=tuple(num.get("probes", (0.0,))),
        record_stride=num.get("record_stride", 1),
        seed=SeedStream(cfg.root_seed, idx),
        record_field=record_field,
        u0_amplitude=num.get("u0_amplitude", 1.0),
        sigma_parameters=tuple(num.get("sigma_parameters", (1.0,))),
    )


def _qvar_solver_task(cfg, num, idx):
    scfg = _solver_config(cfg, dict(num, record_stride=int(round(
        1.0 / (num["dt"] * num["N"]))), t_end=1.0), idx)
    sigma = scfg.sigma_spec()
    try:
        traj = solve(scfg)
    except BlowUpError as err:
        return {"index": idx, "abort": str(err)}
    p = traj.probe_paths[0]
    V = quadratic_variation(p, cfg.model.H).V_N
    tgt = qvar_target(p, sigma, cfg.model.H, cfg.model.theta)
    return {"index": idx, "V_N": V, "target": tgt, "ratio": V / tgt}


def _lil_task(cfg, num, idx):
    H = cfg.model.H
    lo, hi = num["eps_min_log2"], num["eps_max_log2"]
    grid = TimeGrid(0.0, 2 ** (hi - lo) + 1, 2.0 ** lo)
    path = _exact_path_values(cfg.model, grid, SeedStream(cfg.root_seed, idx))
    eps_levels = [2.0 ** k for k in range(lo, hi + 1)]
    rep = khinchin_statistic(path, 0, eps_levels, H, reference=kappa_tilde(H))
    return {"index": idx,
            "khinchin": rep.khinchin_stat[-1],
            "chung": chung_statistic(path, eps_levels, H)}


def _pvar_task(cfg, num, idx):
    grid = TimeGrid.dyadic_unit(2 ** num["n_dyadic"])
    path = _exact_path_values(cfg.model, grid, SeedStream(cfg.root_seed, idx))
    sigma = make_sigma(cfg.model.sigma, tuple(num.get("sigma_parameters", (1.0,))))
    rep = weighted_power_variation(path, num["phi"], sigma, cfg.model.H, cfg.model.theta)
    return {"index": idx, "value": rep.value, "target": rep.target}


def _estimate_task(cfg, num, idx):
    sigma = make_sigma(cfg.model.sigma, tuple(num.get("sigma_parameters", (1.0,))))
    if num.get("source", "exact") == "solver":
        scfg = _solver_config(cfg, dict(num, record_stride=int(round(
            1.0 / (num["dt"] * num["N"]))), t_end=1.0), idx)
        try:
            path = solve(scfg).probe_paths[0]
        except BlowUpError as err:
            return {"index": idx, "abort": str(err)}
    else:
        grid = TimeGrid.dyadic_unit(num["N"])
        path = _exact_path_values(cfg.model, grid, SeedStream(cfg.root_seed, idx))
    out = {"index": idx}
    if "theta" in num["estimators"]:
        out["theta_hat"] = estimate_theta(path, sigma, cfg.model.H)
        for N in num.get("trend_N_list", ()):
            out[f"theta_hat_{N}"] = estimate_theta(
                dyadic_restrict(path, N), sigma, cfg.model.H)
    if "H" in num["estimators"]:
        out["H_hat"] = estimate_H(path).value
    return out


def _sample_task(cfg, num, idx):
    H, theta = cfg.model.H, cfg.model.theta
    kern = num["kernel"]
    seed = SeedStream(cfg.root_seed, idx)
    if kern == "fgn":
        vals = fgn_circulant(num["N"], H / 2.0, seed)
        t = np.arange(num["N"], dtype=float)
    else:
        grid = TimeGrid.dyadic_unit(num["N"])
        kernel = {"linear_she": lambda: linear_she_kernel(H, theta),
                  "fbm": lambda: fbm_kernel(H / 2.0),
                  "t_process": lambda: t_process_kernel(H)}[kern]()
        vals = cholesky_sample(kernel, grid, seed, 1)[0].values
        t = grid.times()
    return {"index": idx, "t": t, "values": vals}


def _solve_task(cfg, num, idx):
    scfg = _solver_config(cfg, num, idx, record_field=True)
    try:
        traj = solve(scfg)
    except BlowUpError as err:
        return {"index": idx, "abort": str(err)}
    return {"index": idx, "times": traj.times, "field": traj.field,
            "probes": [(p.meta["probe"], p.values) for p in traj.probe_paths]}


def _scaling_solver_task(cfg, num, idx):
    scfg = _solver_config(cfg, num, idx)
    try:
        traj = solve(scfg)
    except BlowUpError as err:
        return {"index": idx, "abort": str(err)}
    return {"index": idx, "paths": [p.values for p in traj.probe_paths]}


# ---------------------------------------------------------------------------
# experiment drivers

_SUMMARY_COLS = ("stat", "N_or_eps", "value", "target", "rel_error", "stderr")


def _summary_row(stat, n_or_eps, value, target=None, stderr=None):
    rel = abs(value - target) / abs(target) if target not in (None, 0.0) else ""
    return (stat, n_or_eps, value, target if target is not None else "",
            rel, stderr if stderr is not None else "")


def _paths_jsonl(results):
    return [{k: v for k, v in r.items() if np.isscalar(v) or isinstance(v, str)}
            for r in results]


def _mean_stderr(vals):
    v = np.asarray(vals, float)
    m = float(np.mean(v))
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return m, se


def _run_verify_constants(cfg):
    H = cfg.model.H
    num = cfg.numeric
    k, kt, c11 = kappa(H), kappa_tilde(H), spectral_constant(H)
    res_ratio = abs(kt ** 2 / k ** 2 - 2.0 ** (H - 1.0))
    rng = np.random.default_rng(cfg.root_seed)
    worst_decomp = 0.0
    for _ in range(num.get("n_triples", 100)):
        s, t = rng.uniform(0.05, 5.0, size=2)
        Hr = rng.uniform(0.26, 0.49)
        lhs = cov_T(s, t, Hr) + cov_linear_she(s, t, Hr, 1.0)
        rhs = kappa(Hr) ** 2 * cov_fbm(s, t, Hr / 2.0)
        worst_decomp = max(worst_decomp, abs(lhs - rhs) / abs(rhs))
    worst_var = max(abs(cov_linear_she(t, t, H, 1.0) - kt ** 2 * t ** H)
                    / (kt ** 2 * t ** H) for t in (0.1, 1.0, 10.0))
    tol = cfg.tolerances["identity_residual"]
    stats = {"kappa": k, "kappa_tilde": kt, "c11": c11,
             "residual_ratio_identity": res_ratio,
             "residual_decomposition": worst_decomp,
             "residual_variance_law": worst_var}
    checks = {name: {"value": stats[name], "tolerance": tol, "ok": stats[name] <= tol}
              for name in ("residual_ratio_identity", "residual_decomposition",
                           "residual_variance_law")}
    rows = [(k_, v) for k_, v in stats.items()]
    return EnsembleSummary(stats, checks, 1, []), {"constants.csv": (("name", "value"), rows)}


def _run_qvar(cfg):
    num = cfg.numeric
    source = num.get("source", "exact")
    task = partial(_qvar_exact_task if source == "exact" else _qvar_solver_task,
                   cfg, num)
    if source == "exact":
        grid = TimeGrid.dyadic_unit(num["N"])
        cholesky_factor(linear_she_kernel(cfg.model.H, cfg.model.theta), grid)
    results = _pool_map(task, list(range(cfg.n_paths)), cfg.workers)
    aborted = [(r["index"], r["abort"]) for r in results if "abort" in r]
    live = [r for r in results if "abort" not in r]
    stats, checks, rows = {}, {}, []
    tol = cfg.tolerances
    if source == "exact":
        mean, se = _mean_stderr([r["V_N"] for r in live])
        target = cfg.model.theta ** (cfg.model.H - 1.0) * kappa(cfg.model.H) ** 2
        z = abs(mean - target) / se if se > 0 else 0.0
        stats.update(V_N_mean=mean, V_N_stderr=se, target=target, z=z)
        checks["mean_vs_target"] = {"value": z, "tolerance": tol["mean_z"],
                                    "ok": z <= tol["mean_z"]}
        rows = [(r["index"], r["V_N"], target, abs(r["V_N"] - target) / target, se)
                for r in live]
        if num.get("decay_N_list"):
            k2 = kappa(cfg.model.H) ** 2
            mses = [float(np.mean([(r[f"V_{N}"] - k2) ** 2 for r in live]))
                    for N in num["decay_N_list"]]
            slope = float(np.polyfit(np.log(num["decay_N_list"]), np.log(mses), 1)[0])
            stats["decay_slope"] = slope
            checks["decay_slope"] = {
                "value": slope, "tolerance": [tol["decay_slope_lo"], tol["decay_slope_hi"]],
                "ok": tol["decay_slope_lo"] <= slope <= tol["decay_slope_hi"]}
    else:
        mean, se = _mean_stderr([r["ratio"] for r in live])
        stats.update(ratio_mean=mean, ratio_stderr=se)
        checks["ratio_band"] = {
            "value": mean, "tolerance": [tol["ratio_lo"], tol["ratio_hi"]],
            "ok": tol["ratio_lo"] <= mean <= tol["ratio_hi"]}
        rows = [(r["index"], r["V_N"], r["target"],
                 abs(r["V_N"] - r["target"]) / r["target"], se) for r in live]
    srows = []
    if source == "exact":
        srows.append(_summary_row("V_N", num["N"], stats["V_N_mean"],
                                  stats["target"], stats["V_N_stderr"]))
        for N in num.get("decay_N_list", ()):
            k2 = kappa(cfg.model.H) ** 2
            srows.append(_summary_row(
                "qvar_sq_err", N, float(np.mean([(r[f"V_{N}"] - k2) ** 2 for r in live]))))
        if "decay_slope" in stats:
            srows.append(_summary_row("decay_slope", "", stats["decay_slope"], -1.0))
    else:
        srows.append(_summary_row("V_N_over_target", num["N"], stats["ratio_mean"],
                                  1.0, stats["ratio_stderr"]))
    tables = {"qvar_paths.csv": (("path", "value", "target", "rel_error", "stderr"), rows),
              "summary.csv": (_SUMMARY_COLS, srows),
              "qvar_paths.jsonl": _paths_jsonl(live)}
    return EnsembleSummary(stats, checks, len(live), aborted), tables


def _run_lil(cfg):
    num = cfg.numeric
    H = cfg.model.H
    grid = TimeGrid(0.0, 2 ** (num["eps_max_log2"] - num["eps_min_log2"]) + 1,
                    2.0 ** num["eps_min_log2"])
    cholesky_factor(linear_she_kernel(H, cfg.model.theta), grid)
    results = _pool_map(partial(_lil_task, cfg, num), list(range(cfg.n_paths)),
                        cfg.workers)
    kt = kappa_tilde(H)
    kh = np.array([r["khinchin"] for r in results])
    ch = np.array([r["chung"] for r in results])
    tol = cfg.tolerances
    frac = float(np.mean((kh >= tol["khinchin_lo"] * kt) & (kh <= tol["khinchin_hi"] * kt)))
    half = len(ch) // 2
    med_a, med_b = float(np.median(ch[:half])), float(np.median(ch[half:]))
    batch_rel = abs(med_a - med_b) / med_a if med_a > 0 else math.inf
    stats = {"khinchin_median": float(np.median(kh)), "reference": kt,
             "envelope_fraction": frac, "chung_median": float(np.median(ch)),
             "chung_batch_rel": batch_rel}
    checks = {
        "khinchin_envelope": {"value": frac, "tolerance": tol["khinchin_fraction"],
                              "ok": frac >= tol["khinchin_fraction"]},
        "chung_positive_finite": {"value": float(np.min(ch)),
                                  "tolerance": 0.0,
                                  "ok": bool(np.all(ch > 0) and np.all(np.isfinite(ch)))},
        "chung_batch_stability": {"value": batch_rel, "tolerance": tol["chung_batch_rel"],
                                  "ok": batch_rel <= tol["chung_batch_rel"]},
    }
    rows = [(r["index"], r["khinchin"], r["chung"]) for r in results]
    eps_max = 2.0 ** num["eps_max_log2"]
    srows = [_summary_row("khinchin_sup_ratio", eps_max, stats["khinchin_median"], kt),
             _summary_row("envelope_fraction", eps_max, frac, 1.0),
             _summary_row("chung_min_ratio", eps_max, stats["chung_median"])]
    return EnsembleSummary(stats, checks, len(results), []), \
        {"lil_paths.csv": (("path", "khinchin", "chung"), rows),
         "summary.csv": (_SUMMARY_COLS, srows),
         "lil_paths.jsonl": _paths_jsonl(results)}


def _run_pvar(cfg):
    results = _pool_map(partial(_pvar_task, cfg, cfg.numeric),
                        list(range(cfg.n_paths)), cfg.workers)
    vals = np.array([r["value"] for r in results])
    tgts = np.array([r["target"] for r in results])
    ratio = float(np.mean(vals) / np.mean(tgts))
    tol = cfg.tolerances["mean_ratio_dev"]
    stats = {"value_mean": float(np.mean(vals)), "target_mean": float(np.mean(tgts)),
             "mean_ratio": ratio}
    checks = {"mean_ratio": {"value": ratio, "tolerance": [1 - tol, 1 + tol],
                             "ok": 1 - tol <= ratio <= 1 + tol}}
    rows = [(r["index"], r["value"], r["target"],
             abs(r["value"] - r["target"]) / r["target"]) for r in results]
    se = float(np.std(vals, ddof=1) / math.sqrt(vals.size))
    srows = [_summary_row("pvar_sum", 2 ** cfg.numeric["n_dyadic"],
                          stats["value_mean"], stats["target_mean"], se)]
    return EnsembleSummary(stats, checks, len(results), []), \
        {"pvar_paths.csv": (("path", "value", "target", "rel_error"), rows),
         "summary.csv": (_SUMMARY_COLS, srows),
         "pvar_paths.jsonl": _paths_jsonl(results)}


def _run_estimate(cfg):
    num = cfg.numeric
    if num.get("source", "exact") == "exact":
        grid = TimeGrid.dyadic_unit(num["N"])
        cholesky_factor(linear_she_kernel(cfg.model.H, cfg.model.theta), grid)
    results = _pool_map(partial(_estimate_task, cfg, num),
                        list(range(cfg.n_paths)), cfg.workers)
    aborted = [(r["index"], r["abort"]) for r in results if "abort" in r]
    results = [r for r in results if "abort" not in r]
    stats, checks, rows = {}, {}, []
    tol = cfg.tolerances
    if "theta" in num["estimators"]:
        rep = ensemble_report("theta", [r["theta_hat"] for r in results],
                              true_value=cfg.model.theta, mode="H known")
        stats.update(theta_mean=rep.mc_mean, theta_stderr=rep.mc_stderr,
                     theta_rel_error=rep.rel_error)
        checks["theta"] = {"value": rep.rel_error, "tolerance": tol["theta_rel"],
                           "ok": rep.rel_error <= tol["theta_rel"]}
        for N in num.get("trend_N_list", ()):
            r = ensemble_report(f"theta_{N}", [x[f"theta_hat_{N}"] for x in results],
                                true_value=cfg.model.theta)
            stats[f"theta_rel_error_N{N}"] = r.rel_error
    if "H" in num["estimators"]:
        rep = ensemble_report("H", [r["H_hat"] for r in results],
                              true_value=cfg.model.H, mode="raw dyadic sums")
        stats.update(H_mean=rep.mc_mean, H_stderr=rep.mc_stderr)
        dev = abs(rep.mc_mean - cfg.model.H)
        checks["H"] = {"value": dev, "tolerance": tol["H_abs"], "ok": dev <= tol["H_abs"]}
    for r in results:
        rows.append((r["index"], r.get("theta_hat", ""), r.get("H_hat", "")))
    srows = []
    if "theta_mean" in stats:
        srows.append(_summary_row("theta_hat", num["N"], stats["theta_mean"],
                                  cfg.model.theta, stats["theta_stderr"]))
    if "H_mean" in stats:
        srows.append(_summary_row("H_hat", num["N"], stats["H_mean"],
                                  cfg.model.H, stats["H_stderr"]))
    return EnsembleSummary(stats, checks, len(results), aborted), \
        {"estimates.csv": (("path", "theta_hat", "H_hat"), rows),
         "summary.csv": (_SUMMARY_COLS, srows),
         "estimates.jsonl": _paths_jsonl(results)}


def _run_tailbounds(cfg):
    num = cfg.numeric
    q = QuadratureSpec(rel_tol=num.get("rel_tol", 1e-5))
    records, rows = [], []
    combos = [(a, b, t) for t in num["t_list"] for a in num["a_list"]
              for b in num["b_list"] if a < b]
    for (a, b, t) in combos:
        rep = tail_bound_check(a, b, t, cfg.model.H, q)
        records.append(check_record("tail_bound", {"a": a, "b": b, "t": t},
                                    rep.lhs, rep.rhs, rep.ok, rep.achieved_tol))
        rows.append((a, b, t, rep.lhs, rep.rhs, rep.ok))
    n_ok = sum(r["ok"] for r in records)
    stats = {"n_combos": len(records), "n_ok": n_ok}
    checks = {"all_ok": {"value": n_ok, "tolerance": len(records),
                         "ok": n_ok == len(records)}}
    srows = [_summary_row("tail_ok_fraction", len(records),
                          n_ok / len(records), 1.0)]
    return EnsembleSummary(stats, checks, len(records), []), \
        {"tailbounds.csv": (("a", "b", "t", "lhs", "rhs", "ok"), rows),
         "summary.csv": (_SUMMARY_COLS, srows),
         "tailbounds.jsonl": records}


def _run_scaling(cfg):
    num = cfg.numeric
    H = cfg.model.H
    tol = cfg.tolerances["slope_abs"]
    if num.get("source", "exact") == "exact":
        eps = [s * 2.0 ** -12 for s in (1, 2, 4, 8, 16, 32, 64, 128, 256)]
        rep = second_moment_slope_from_kernel(
            linear_she_kernel(H, cfg.model.theta), num.get("t_anchor", 1.0), eps)
        rows = list(zip(rep.eps, rep.second_moments))
        stats = {"slope": rep.slope, "stderr": rep.stderr}
    else:
        results = _pool_map(partial(_scaling_solver_task, cfg, num),
                            list(range(cfg.n_paths)), cfg.workers)
        aborted = [(r["index"], r["abort"]) for r in results if "abort" in r]
        live = [r for r in results if "abort" not in r]
        rec_dt = num["dt"] * num.get("record_stride", 1)
        grid = TimeGrid(0.0, int(round(num.get("t_end", 1.0) / rec_dt)) + 1, rec_dt)
        paths = [PathSample(grid, v, {}) for r in live for v in r["paths"]]
        anchor = int(round(num.get("t_anchor", 1.0) / rec_dt))
        rep = scaling_exponent(paths, anchor, list(num["eps_steps"]),
                               n_anchors=num.get("n_anchors", 8))
        rows = list(zip(rep.eps, rep.second_moments))
        stats = {"slope": rep.slope, "stderr": rep.stderr}
        dev = abs(rep.slope - H)
        checks = {"slope": {"value": dev, "tolerance": tol, "ok": dev <= tol}}
        srows = [_summary_row("slope", num.get("t_anchor", 1.0), rep.slope, H,
                              rep.stderr)]
        return EnsembleSummary(stats, checks, len(live), aborted), \
            {"scaling.csv": (("eps", "second_moment"), rows),
             "summary.csv": (_SUMMARY_COLS, srows)}
    dev = abs(rep.slope - H)
    checks = {"slope": {"value": dev, "tolerance": tol, "ok": dev <= tol}}
    srows = [_summary_row("slope", num.get("t_anchor", 1.0), rep.slope, H, rep.stderr)]
    return EnsembleSummary(stats, checks, 1, []), \
        {"scaling.csv": (("eps", "second_moment"), rows),
         "summary.csv": (_SUMMARY_COLS, srows)}


def _run_sample(cfg, out_dir):
    num = cfg.numeric
    results = _pool_map(partial(_sample_task, cfg, num),
                        list(range(cfg.n_paths)), cfg.workers)
    mat = np.stack([r["values"] for r in results])
    artifacts = {}
    if "csv" in cfg.formats:
        for r in results:
            name = f"path_{r['index']:05d}.csv"
            dataio.write_path_csv(os.path.join(out_dir, name), r["t"], r["values"])
            artifacts[name] = None
    dataio.write_matrix(os.path.join(out_dir, "paths.bin"), mat)
    artifacts["paths.bin"] = None
    end_mean, end_se = _mean_stderr(mat[:, -1])
    end_var = float(np.var(mat[:, -1], ddof=1))
    stats = {"end_mean": end_mean, "end_mean_stderr": end_se, "end_var": end_var}
    return EnsembleSummary(stats, {}, len(results), []), artifacts


def _run_solve(cfg, out_dir):
    num = cfg.numeric
    results = _pool_map(partial(_solve_task, cfg, num),
                        list(range(cfg.n_paths)), cfg.workers)
    aborted = [(r["index"], r["abort"]) for r in results if "abort" in r]
    artifacts = {}
    end_vals = []
    for r in results:
        if "abort" in r:
            continue
        idx = r["index"]
        dataio.write_matrix(os.path.join(out_dir, f"field_{idx:05d}.bin"), r["field"])
        artifacts[f"field_{idx:05d}.bin"] = None
        if "csv" in cfg.formats:
            for j, (p, vals) in enumerate(r["probes"]):
                name = f"probe_{idx:05d}_{j}.csv"
                dataio.write_path_csv(os.path.join(out_dir, name), r["times"],
                                      vals, label="u")
                artifacts[name] = None
        end_vals.append(r["field"][-1].mean())
    stats = {"n_ok": len(end_vals)}
    return EnsembleSummary(stats, {}, len(end_vals), aborted), artifacts


# ---------------------------------------------------------------------------

def _manifest(cfg):
    model = dataclasses.asdict(cfg.model)
    return {
        "experiment": cfg.experiment,
        "model": model,
        "numeric": {k: (list(v) if isinstance(v, tuple) else v)
                    for k, v in cfg.numeric.items()},
        "mc": {"n_paths": cfg.n_paths, "root_seed": cfg.root_seed},
        "formats": list(cfg.formats),
        "tolerances": cfg.tolerances,
    }


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def run(config):
    """Execute one experiment; returns the process exit status.

    0: all declared tolerances pass.  1: a tolerance failed.  2: invalid
    configuration.  3: more than 5% of trajectories aborted.
    """
    try:
        os.makedirs(config.out_dir, exist_ok=True)
        num = dict(default_numeric(config.experiment))
        num.update(config.numeric)
        tols = default_tolerances(config.experiment, num.get("source", "exact"))
        tols.update(config.tolerances)
        cfg = dataclasses.replace(config, numeric=num, tolerances=tols)

        if cfg.experiment == "verify-constants":
            summary, tables = _run_verify_constants(cfg)
        elif cfg.experiment == "qvar":
            summary, tables = _run_qvar(cfg)
        elif cfg.experiment == "lil":
            summary, tables = _run_lil(cfg)
        elif cfg.experiment == "pvar":
            summary, tables = _run_pvar(cfg)
        elif cfg.experiment == "estimate":
            summary, tables = _run_estimate(cfg)
        elif cfg.experiment == "tailbounds":
            summary, tables = _run_tailbounds(cfg)
        elif cfg.experiment == "scaling":
            summary, tables = _run_scaling(cfg)
        elif cfg.experiment == "sample":
            summary, tables = _run_sample(cfg, cfg.out_dir)
        elif cfg.experiment == "solve":
            summary, tables = _run_solve(cfg, cfg.out_dir)
        else:  # pragma: no cover
            raise ConfigError(cfg.experiment)
    except (ConfigError, KeyError, ValueError, FileNotFoundError) as err:
        print(f"config error: {err}")
        return EXIT_CONFIG

    for name, content in tables.items():
        if content is None:
            continue
        path = os.path.join(cfg.out_dir, name)
        if name.endswith(".jsonl"):
            with open(path, "w", encoding="utf-8") as fh:
                for rec in content:
                    fh.write(json.dumps(rec, sort_keys=True, default=float) + "\n")
        elif name.endswith(".csv") and "csv" in cfg.formats:
            columns, rows = content
            dataio.write_csv(path, columns, rows)

    _write_json(os.path.join(cfg.out_dir, "manifest.json"), _manifest(cfg))
    _write_json(os.path.join(cfg.out_dir, "summary.json"), {
        "experiment": cfg.experiment,
        "stats": summary.stats,
        "checks": summary.checks,
        "count": summary.count,
        "aborted": [{"index": i, "reason": r} for i, r in summary.aborted],
    })

    if summary.aborted and len(summary.aborted) > 0.05 * cfg.n_paths:
        return EXIT_ABORTS
    if not summary.passed():
        return EXIT_TOLERANCE
    return EXIT_OK
