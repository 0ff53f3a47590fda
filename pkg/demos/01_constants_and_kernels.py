#!/usr/bin/env python3
"""Closed-form constants and the temporal covariance kernels.

Walks through the normalization constants of the rough-noise heat equation,
checks the algebraic identities that tie them together, and prints a small
table of kernel values.
"""

import numpy as np

from roughheat import (cov_fbm, cov_linear_she, cov_T, gaussian_abs_moment,
                       heat_kernel, kappa, kappa_tilde, rho_H,
                       spectral_constant)

H = 0.3

print("=== constants at H = 0.3 ===")
print(f"kappa        = {kappa(H):.6f}   (kappa^2 = {kappa(H)**2:.6f})")
print(f"kappa_tilde  = {kappa_tilde(H):.6f}   (kappa_tilde^2 = {kappa_tilde(H)**2:.6f})")
print(f"c11          = {spectral_constant(H):.6f}")
print(f"E|N|^{{2/H}}   = {gaussian_abs_moment(2.0 / H):.4f}")

print("\nidentity kappa_tilde^2 / kappa^2 = 2^(H-1):",
      abs(kappa_tilde(H) ** 2 / kappa(H) ** 2 - 2 ** (H - 1)))

print("\n=== temporal kernels ===")
print("variance of the linear solution at t: theta^(H-1) kappa_tilde^2 t^H")
for t in (0.25, 1.0, 4.0):
    print(f"  t={t:5.2f}: var = {cov_linear_she(t, t, H):.6f} "
          f"(law: {kappa_tilde(H)**2 * t**H:.6f})")

print("\ndecomposition cov_T + cov_v = kappa^2 cov_fbm(H/2) on random points:")
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(1000):
    s, t = rng.uniform(0.01, 5.0, 2)
    lhs = cov_T(s, t, H) + cov_linear_she(s, t, H)
    rhs = kappa(H) ** 2 * cov_fbm(s, t, H / 2)
    worst = max(worst, abs(lhs - rhs))
print(f"  worst absolute residual over 1000 points: {worst:.2e}")

print("\nfractional-noise autocovariance rho_H(k):")
print("  k:      ", "  ".join(f"{k:7d}" for k in range(5)))
print("  rho:    ", "  ".join(f"{rho_H(k, H):+.4f}" for k in range(5)))

print(f"\nheat kernel mass check: {np.trapezoid(heat_kernel(1.0, np.linspace(-20, 20, 20001)), np.linspace(-20, 20, 20001)):.12f}")
