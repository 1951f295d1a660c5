"""Integrator, quadrature, and root-finder checks against closed forms."""

import math

import numpy as np
import pytest

from ottosim.numerics import (
    DEFAULT_INTEGRATOR,
    IntegratorConfig,
    NumericsError,
    find_root,
    integrate_ode,
    quad,
)


def test_integrate_exponential_decay():
    res = integrate_ode(lambda t, y: -y, np.array([1.0]), (0.0, 3.0))
    assert res.y[0] == pytest.approx(math.exp(-3.0), rel=1e-9)
    assert res.t == 3.0
    assert res.steps > 0


def test_integrate_harmonic_oscillator():
    def rhs(t, y):
        return np.array([y[1], -y[0]])

    res = integrate_ode(rhs, np.array([1.0, 0.0]), (0.0, 2.0 * math.pi))
    assert res.y[0] == pytest.approx(1.0, abs=1e-8)
    assert res.y[1] == pytest.approx(0.0, abs=1e-8)


def test_integrate_complex_state():
    # i y' = y  ->  y(t) = exp(-i t) on a complex state vector
    res = integrate_ode(lambda t, y: -1j * y, np.array([1.0 + 0j]), (0.0, 1.0))
    assert res.y[0] == pytest.approx(np.exp(-1j), abs=1e-9)
    assert np.iscomplexobj(res.y)


def test_integrate_record_trajectory():
    res = integrate_ode(lambda t, y: -y, np.array([1.0]), (0.0, 1.0), record=True)
    assert res.ts is not None and res.ys is not None
    assert res.ts[0] == 0.0 and res.ts[-1] == 1.0
    assert len(res.ts) == len(res.ys)
    # recorded points must themselves sit on the exact solution
    err = np.max(np.abs(res.ys[:, 0] - np.exp(-res.ts)))
    assert err < 1e-8


def test_integrate_max_step_is_respected():
    res = integrate_ode(lambda t, y: 0.0 * y, np.array([1.0]), (0.0, 1.0),
                        max_step=0.01, record=True)
    assert np.max(np.diff(res.ts)) <= 0.01 + 1e-12


def test_integrate_step_budget_exhaustion():
    cfg = IntegratorConfig(max_steps=10)
    with pytest.raises(NumericsError):
        integrate_ode(lambda t, y: -y, np.array([1.0]), (0.0, 100.0),
                      cfg=cfg, max_step=1e-4)


def test_integrate_zero_length_span():
    res = integrate_ode(lambda t, y: -y, np.array([2.0]), (1.0, 1.0))
    assert res.y[0] == 2.0
    assert res.steps == 0


def test_quad_polynomial_and_oscillatory():
    assert quad(lambda x: 3.0 * x**2, (0.0, 2.0)) == pytest.approx(8.0, rel=1e-10)
    assert quad(math.sin, (0.0, math.pi)) == pytest.approx(2.0, rel=1e-10)


def test_find_root_simple():
    root = find_root(lambda x: x**2 - 2.0, (0.0, 2.0))
    assert root == pytest.approx(math.sqrt(2.0), abs=1e-11)


def test_find_root_requires_sign_change():
    with pytest.raises(ValueError):
        find_root(lambda x: x**2 + 1.0, (0.0, 2.0))


def test_find_root_endpoint_root():
    assert find_root(lambda x: x, (0.0, 1.0)) == pytest.approx(0.0, abs=1e-11)


def test_default_config_tolerances():
    assert DEFAULT_INTEGRATOR.rel_tol == 1e-10
    assert DEFAULT_INTEGRATOR.abs_tol == 1e-12
