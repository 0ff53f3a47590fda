"""Frequency-band second moments and the auxiliary integral checks.

The full-band value has an exact target (the time-domain variance); finite
bands are cross-checked against a brute-force scipy nested quadrature that
shares no code with the library's oscillation-aware evaluation.
"""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma as sc_gamma

from roughheat.constants import kappa_tilde, spectral_constant
from roughheat.quadrature import QuadratureSpec
from roughheat.spectral import (SpectralBand, band_second_moment,
                                tail_bound_check, verify_green_finiteness,
                                verify_kernel_scaling, check_record)

Q7 = QuadratureSpec(rel_tol=1e-7)


def scipy_band_moment(a, b, t, H):
    """Brute-force nested quadrature over the band region (finite b only)."""
    c11 = spectral_constant(H)
    xa = a ** (1 / H) if a > 0 else 0.0
    xb = b ** (1 / H)
    ta = a ** (2 / H) if a > 0 else 0.0
    tb = b ** (2 / H)

    def inner(xi, lo, hi):
        f = lambda tau: ((math.cos(tau * t) - math.exp(-t * xi * xi)) ** 2
                         + math.sin(tau * t) ** 2) / (xi ** 4 + tau ** 2)
        val, _ = integrate.quad(f, lo, hi, limit=1000, epsabs=1e-14, epsrel=1e-11)
        return val

    p1, _ = integrate.quad(lambda xi: xi ** (1 - 2 * H) * inner(xi, 0.0, tb),
                           xa, xb, limit=400, epsrel=1e-10, epsabs=1e-14)
    p2 = 0.0
    if a > 0:
        p2, _ = integrate.quad(lambda xi: xi ** (1 - 2 * H) * inner(xi, ta, tb),
                               0.0, xa, limit=400, epsrel=1e-10, epsabs=1e-14)
    return 4.0 * c11 / (2.0 * math.pi) * (p1 + p2)


def test_band_validation():
    with pytest.raises(ValueError):
        SpectralBand(2.0, 1.0)
    with pytest.raises(ValueError):
        SpectralBand(-0.5, 1.0)
    with pytest.raises(ValueError):
        band_second_moment(SpectralBand(0.0, np.inf), -1.0, 0.3)


def test_full_band_reproduces_variance_law():
    for (t, H) in [(1.0, 0.3), (0.5, 0.35), (0.25, 0.45), (2.0, 0.28), (1.0, 0.5)]:
        r = band_second_moment(SpectralBand(0.0, np.inf), t, H, Q7)
        assert r.converged
        assert r.value == pytest.approx(kappa_tilde(H) ** 2 * t ** H, rel=1e-6)


def test_finite_band_against_scipy_oracle():
    for (a, b, t, H) in [(0.5, 2.0, 1.0, 0.3), (0.0, 1.0, 0.5, 0.4),
                         (1.0, 3.0, 2.0, 0.28)]:
        mine = band_second_moment(SpectralBand(a, b), t, H, Q7)
        ref = scipy_band_moment(a, b, t, H)
        assert mine.value == pytest.approx(ref, rel=3e-7)


def test_band_additivity_and_degenerate():
    mf = band_second_moment(SpectralBand(0.0, np.inf), 1.0, 0.3, Q7)
    # split points below and far above the dead-exponential frequency cutoff
    for c in (0.8, 2.0, 4.0, 8.0):
        m1 = band_second_moment(SpectralBand(0.0, c), 1.0, 0.3, Q7)
        m2 = band_second_moment(SpectralBand(c, np.inf), 1.0, 0.3, Q7)
        assert m1.value + m2.value == pytest.approx(mf.value, rel=2e-7), c
    # an empty band is rejected at construction
    with pytest.raises(ValueError):
        SpectralBand(0.7, 0.7)


def test_infinite_band_against_scipy_complement():
    # [a, inf) via the scipy oracle's complement of the finite rectangle
    a, t, H = 4.0, 1.0, 0.3
    mine = band_second_moment(SpectralBand(a, np.inf), t, H, Q7).value
    from roughheat.constants import kappa_tilde
    full = kappa_tilde(H) ** 2 * t ** H
    ref = full - scipy_band_moment(0.0, a, t, H)
    assert mine == pytest.approx(ref, rel=2e-6)


def test_tail_bound_trivial_and_generic():
    rep0 = tail_bound_check(0.0, np.inf, 1.0, 0.3)
    assert rep0.lhs == 0.0 and rep0.rhs == 0.0 and rep0.ok
    q = QuadratureSpec(rel_tol=1e-5)
    rep = tail_bound_check(0.5, 4.0, 1.0, 0.3, q)
    assert rep.ok and rep.lhs > 0.0 and rep.lhs <= rep.rhs


def test_tail_bound_sweep_20_points():
    q = QuadratureSpec(rel_tol=1e-5)
    count = 0
    for t in (0.5, 1.0):
        for a in (0.0, 0.5, 1.0):
            for b in (2.0, 4.0, 8.0, np.inf):
                if count >= 20:
                    break
                rep = tail_bound_check(a, b, t, 0.3, q)
                assert rep.ok, (a, b, t)
                count += 1
    assert count == 20


def test_tail_bound_monotonicity():
    q = QuadratureSpec(rel_tol=1e-6)
    # enlarging the kept band shrinks the remainder
    lhs_a = [tail_bound_check(a, 4.0, 1.0, 0.3, q).lhs for a in (0.25, 0.5, 1.0)]
    assert lhs_a[0] < lhs_a[1] < lhs_a[2]
    lhs_b = [tail_bound_check(0.5, b, 1.0, 0.3, q).lhs for b in (2.0, 4.0, 8.0)]
    assert lhs_b[0] > lhs_b[1] > lhs_b[2]


def test_kernel_scaling_checks():
    for beta in (0.1, 0.2, 0.25):
        rep = verify_kernel_scaling(beta, [0.5, 1.0, 2.0])
        assert rep.max_ratio_dev < 1e-3
    assert verify_kernel_scaling(0.2, [1.0]).max_ratio_dev == 0.0
    with pytest.raises(ValueError):
        verify_kernel_scaling(1.5, [1.0])


def test_kernel_scaling_absolute_value_against_fourier_route():
    # I(t) = Gamma(beta+1/2) (2t)^(-beta-1/2) / (Gamma(1+2 beta) sin(pi beta))
    beta = 0.2
    rep = verify_kernel_scaling(beta, [0.5, 1.0, 2.0])
    for v, t in zip(rep.integrals, rep.t_values):
        closed = sc_gamma(beta + 0.5) * (2 * t) ** (-beta - 0.5) \
            / (sc_gamma(1 + 2 * beta) * math.sin(math.pi * beta))
        assert v == pytest.approx(closed, rel=1e-6)


def test_green_finiteness():
    rep = verify_green_finiteness(0.3, 0.1)
    assert rep.converged and rep.value > 0.0
    steps = np.abs(np.diff(rep.levels))
    assert steps[-1] < steps[0]
    rep0 = verify_green_finiteness(0.3, 0.0)
    assert rep0.converged
    with pytest.raises(ValueError):
        verify_green_finiteness(0.3, 0.2)
    with pytest.raises(ValueError):
        verify_green_finiteness(0.3, -0.05)


def test_green_divergence_flagged():
    # H = -0.6 drives the h-singularity exponent to -1.2 after the squared
    # increment, so the singular mass keeps growing under refinement and the
    # guard must fire
    with pytest.raises(ArithmeticError):
        verify_green_finiteness(-0.6, 0.1)


def test_check_record_shape():
    rec = check_record("tail_bound", {"a": 0.5}, 1.0, 2.0, True, 1e-8)
    assert rec["ok"] is True and rec["check"] == "tail_bound"
