#!/usr/bin/env python3
"""The spectral solver on a periodic domain: fields, probes, and validation.

Runs the nonlinear equation with sigma(u) = u from a smooth bump, exports the
space-time field in the binary container, and cross-validates the additive
mode against the exact variance law.
"""

import os

from roughheat import ModelParams, SeedStream, SolverConfig, solve
from roughheat.solver import cross_validate_linear, expected_additive_variance
from roughheat.dataio import write_matrix, write_path_csv

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)
H = 0.3

print("=== nonlinear field, sigma(u) = u, bump initial data ===")
cfg = SolverConfig(params=ModelParams(H, 1.0, sigma="linear", u0="bump"),
                   L=16.0, n_modes=1024, dt=1.0 / 2048, t_end=0.5,
                   probes=(0.0, 8.0), record_stride=32,
                   seed=SeedStream(11, 0))
traj = solve(cfg)
print(f"recorded field: {traj.field.shape[0]} rows x {traj.field.shape[1]} sites")
print(f"field range at t_end: [{traj.field[-1].min():+.3f}, {traj.field[-1].max():+.3f}]")
write_matrix(os.path.join(OUT, "field.bin"), traj.field)
write_path_csv(os.path.join(OUT, "probe_x0.csv"), traj.times,
               traj.probe_paths[0].values)
print(f"wrote field container and probe CSV to {OUT}/")

print("\n=== additive-mode validation against the exact law ===")
acfg = SolverConfig(params=ModelParams(H, 1.0, sigma="one", u0="zero"),
                    L=16.0, n_modes=2048, dt=1e-3, t_end=1.0,
                    probes=(0.0,), record_stride=250, seed=SeedStream(0, 0))
rep = cross_validate_linear(acfg, [0.25, 0.5, 1.0],
                            [SeedStream(303, i) for i in range(60)])
for t, d, se in zip(rep.t_checks, rep.deviations, rep.stderrs):
    print(f"  t={t:5.2f}: relative deviation {100 * d:+.2f}% (stderr {100 * se:.2f}%)")
print("(negative bias = mass lost to the mode truncation and periodic domain)")

print("\nexact per-mode bias of this configuration (no Monte Carlo):")
for t in (0.25, 1.0):
    from roughheat.constants import kappa_tilde
    tgt = kappa_tilde(H) ** 2 * t ** H
    print(f"  t={t:5.2f}: {100 * (expected_additive_variance(acfg, t) / tgt - 1):+.2f}%")
