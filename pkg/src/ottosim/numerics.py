"""Shared numerical plumbing: adaptive ODE integration, quadrature, root finding.

One embedded Runge-Kutta pair of order 5(4) (Dormand-Prince, via scipy's
stepper) serves every ODE in the package; the systems here are non-stiff,
and oscillatory phase factors are co-integrated by the callers rather than
delegated to a stiff solver.  All routines are deterministic for fixed
inputs and configuration, hold no state, and are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45
from scipy.integrate import quad as _scipy_quad


class NumericsError(RuntimeError):
    """An adaptive routine failed to meet its tolerance or step budget."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and budgets for the adaptive integrator.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Per-step local error control of the embedded pair.
    max_steps : int
        Hard cap on accepted steps; exceeding it raises NumericsError.
    initial_step : float or None
        First trial step as a fraction of the span; None lets the
        stepper choose.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    initial_step: float | None = None

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.initial_step is not None and not 0 < self.initial_step <= 1:
            raise ValueError("initial_step is a fraction of the span in (0, 1]")


DEFAULT_INTEGRATOR = IntegratorConfig()


@dataclass(frozen=True)
class OdeResult:
    """Final state plus step diagnostics; trajectory only when recorded."""

    t: float
    y: np.ndarray
    steps: int
    ts: np.ndarray | None = None
    ys: np.ndarray | None = None


def integrate_ode(rhs, y0, span, cfg: IntegratorConfig | None = None,
                  max_step: float | None = None, record: bool = False) -> OdeResult:
    """Integrate y' = rhs(t, y) over span with adaptive 5(4) stepping.

    Real and complex state vectors are both supported (scipy's stepper
    propagates complex dtypes natively).  `max_step` bounds the step size,
    used by callers to keep at least ~10 steps per oscillation period of
    any co-integrated phase factor.  With `record=True` the accepted-step
    trajectory is returned for invariant checks.

    Raises NumericsError if the stepper fails, produces a non-finite
    state, or exceeds cfg.max_steps accepted steps.
    """
    cfg = cfg or DEFAULT_INTEGRATOR
    y0 = np.atleast_1d(np.asarray(y0))
    t0, t1 = float(span[0]), float(span[1])
    if t1 < t0:
        raise ValueError("span must be ordered: t1 >= t0")
    if t1 == t0:
        return OdeResult(t=t0, y=y0.copy(), steps=0)

    first = cfg.initial_step * (t1 - t0) if cfg.initial_step else None
    if max_step is not None and first is not None:
        first = min(first, max_step)
    solver = RK45(rhs, t0, y0, t1, rtol=cfg.rel_tol, atol=cfg.abs_tol,
                  max_step=max_step if max_step else np.inf, first_step=first)
    steps = 0
    ts = [t0] if record else None
    ys = [y0.copy()] if record else None
    while solver.status == "running":
        solver.step()
        steps += 1
        if not np.all(np.isfinite(solver.y)):
            raise NumericsError(
                f"non-finite state at t={solver.t!r} after {steps} steps")
        if steps > cfg.max_steps:
            raise NumericsError(
                f"exceeded max_steps={cfg.max_steps} before reaching t={t1!r}")
        if record:
            ts.append(solver.t)
            ys.append(solver.y.copy())
    if solver.status == "failed":
        raise NumericsError(
            f"step size underflow at t={solver.t!r} after {steps} steps "
            f"(rel_tol={cfg.rel_tol!r}, abs_tol={cfg.abs_tol!r})")
    return OdeResult(t=solver.t, y=solver.y, steps=steps,
                     ts=np.array(ts) if record else None,
                     ys=np.array(ys) if record else None)


def quad(f, interval, cfg: IntegratorConfig | None = None) -> float:
    """Adaptive quadrature of f over interval, relative tolerance 1e-10."""
    cfg = cfg or DEFAULT_INTEGRATOR
    a, b = float(interval[0]), float(interval[1])
    if a == b:
        return 0.0
    out = _scipy_quad(f, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                      limit=200, full_output=True)
    if len(out) > 3:  # an explanation string is appended on trouble
        raise NumericsError(f"quadrature did not converge on [{a!r}, {b!r}]: {out[3]}")
    return float(out[0])


def find_root(f, bracket, tol: float = 1e-12) -> float:
    """Bisection for a root of f inside bracket, to absolute tolerance tol.

    Requires a sign change over the bracket; raises ValueError otherwise.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise ValueError(f"no sign change over bracket [{lo!r}, {hi!r}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:  # bracket narrower than float spacing
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
