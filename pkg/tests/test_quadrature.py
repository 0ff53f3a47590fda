"""Panel integrator against closed forms and scipy.integrate."""

import math

import numpy as np
import pytest
from scipy import integrate

from roughheat.quadrature import (QuadratureSpec, adaptive_panels, fixed_panels,
                                  geometric_edges)


def test_fixed_panels_polynomial_exact():
    val = fixed_panels(lambda x: 3 * x ** 2, np.linspace(-1, 2, 7))
    assert val == pytest.approx(2 ** 3 - (-1) ** 3, rel=1e-14)


def test_adaptive_gaussian():
    r = adaptive_panels(lambda x: np.exp(-x * x), -8.0, 8.0,
                        QuadratureSpec(rel_tol=1e-10))
    assert r.converged
    assert r.value == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert abs(r.value - math.sqrt(math.pi)) <= 10 * max(r.error, 1e-15)


def test_adaptive_peaked_integrand_vs_scipy():
    f = lambda x: 1.0 / (1e-4 + (x - 0.31) ** 2)
    mine = adaptive_panels(f, 0.0, 1.0, QuadratureSpec(rel_tol=1e-9))
    ref, _ = integrate.quad(f, 0.0, 1.0, limit=200)
    assert mine.converged
    assert mine.value == pytest.approx(ref, rel=1e-9)


def test_adaptive_integrable_singularity_with_breakpoint():
    # |x|^(-0.6) is integrable; geometric panels from the breakpoint handle it
    f = lambda x: np.abs(x) ** -0.6
    r = adaptive_panels(f, 1e-12, 1.0, QuadratureSpec(rel_tol=1e-6),
                        breakpoints=tuple(geometric_edges(1e-10, 0.5, 20)))
    exact = (1.0 - (1e-12) ** 0.4) / 0.4
    assert r.value == pytest.approx(exact, rel=1e-5)


def test_budget_exhaustion_flags_not_converged():
    f = lambda x: np.abs(np.sin(200.0 / (x + 1e-3)))
    spec = QuadratureSpec(rel_tol=1e-10, max_evals=2000)
    r = adaptive_panels(f, 0.0, 1.0, spec)
    assert not r.converged


def test_determinism_bitwise():
    f = lambda x: np.exp(-x) * np.sin(7 * x)
    a = adaptive_panels(f, 0.0, 10.0, QuadratureSpec(rel_tol=1e-9))
    b = adaptive_panels(f, 0.0, 10.0, QuadratureSpec(rel_tol=1e-9))
    assert a.value == b.value and a.evals == b.evals


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=1e-2)
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=1e-11)
    QuadratureSpec(rel_tol=1e-3)
    QuadratureSpec(rel_tol=1e-10)
