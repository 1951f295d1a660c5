"""Shared domain types and cycle-level work/power/efficiency bookkeeping.

Units are hbar = k_B = 1 throughout the package.  The working medium's
energy scale (epsilon for the two-level spin, omega for the oscillator)
carries the energy unit; temperatures are energies; times are inverse
energies.

The finite-time Otto cycle here consists of two driven adiabats (strokes
1->2 and 3->4, control times tau1 and tau3) and two instantaneous
isochores.  Cycle output is the quasi-static net work minus the extra
work spent finishing each adiabat in finite time:

    P   = (W_T^adi - W1^ex - W3^ex) / (tau1 + tau3)
    eta = (W_T^adi - W1^ex - W3^ex) / (Q_h^adi - W3^ex)

All types are immutable values after construction and all operations are
pure functions, so everything is safe to evaluate concurrently.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator


class DomainError(ValueError):
    """Inputs are outside the physical domain of an operation."""


# ---------------------------------------------------------------------------
# schedules


class Schedule(ABC):
    """A dimensionless control protocol R(s) over rescaled time s in [0, 1].

    Concrete kinds: "linear" and "tabulated" (here), plus the special
    zero-extra-work protocols "special_two_level" (twolevel module) and
    "special_oscillator" (oscillator module).  Evaluation at s = 0 and
    s = 1 returns the stored endpoints exactly; the derivative is
    evaluable everywhere in (0, 1).
    """

    kind: str

    @property
    @abstractmethod
    def start(self) -> float:
        """R(0), exact."""

    @property
    @abstractmethod
    def end(self) -> float:
        """R(1), exact."""

    @abstractmethod
    def value(self, s: float) -> float: ...

    @abstractmethod
    def derivative(self, s: float) -> float: ...

    def value_and_derivative(self, s: float) -> tuple[float, float]:
        """Both at once; kinds whose value needs a solve override this."""
        return self.value(s), self.derivative(s)


@dataclass(frozen=True)
class LinearSchedule(Schedule):
    """R(s) = start + (end - start) s; constant derivative."""

    start_value: float
    end_value: float
    kind = "linear"

    @property
    def start(self) -> float:
        return self.start_value

    @property
    def end(self) -> float:
        return self.end_value

    def value(self, s):
        if s <= 0.0:
            return self.start_value
        if s >= 1.0:
            return self.end_value
        return self.start_value + (self.end_value - self.start_value) * s

    def derivative(self, s):
        return self.end_value - self.start_value


@dataclass(frozen=True, eq=False)
class TabulatedSchedule(Schedule):
    """User-supplied samples, interpolated with a cubic monotone method.

    The amplitude ODEs need a continuous derivative, so the samples are
    interpolated shape-preservingly (PCHIP) and the derivative is taken
    from the interpolant.  Sample abscissae must be strictly increasing
    and cover [0, 1] exactly.
    """

    s_samples: np.ndarray
    values: np.ndarray
    kind = "tabulated"
    _interp: PchipInterpolator = field(init=False, repr=False)
    _deriv: PchipInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        s = np.asarray(self.s_samples, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if s.ndim != 1 or s.shape != v.shape or s.size < 2:
            raise DomainError("tabulated schedule needs matching 1-d arrays of length >= 2")
        if np.any(np.diff(s) <= 0):
            raise DomainError("tabulated schedule samples must be strictly increasing in s")
        if s[0] != 0.0 or s[-1] != 1.0:
            raise DomainError("tabulated schedule must cover s in [0, 1] exactly")
        object.__setattr__(self, "s_samples", s)
        object.__setattr__(self, "values", v)
        interp = PchipInterpolator(s, v)
        object.__setattr__(self, "_interp", interp)
        object.__setattr__(self, "_deriv", interp.derivative())

    @property
    def start(self) -> float:
        return float(self.values[0])

    @property
    def end(self) -> float:
        return float(self.values[-1])

    def value(self, s):
        if s <= 0.0:
            return self.start
        if s >= 1.0:
            return self.end
        return float(self._interp(s))

    def derivative(self, s):
        return float(self._deriv(min(max(s, 0.0), 1.0)))


# ---------------------------------------------------------------------------
# thermodynamic records


@dataclass(frozen=True)
class BathPair:
    """Hot and cold bath temperatures (energy units, k_B = 1)."""

    t_hot: float
    t_cold: float

    def __post_init__(self):
        if not self.t_hot > self.t_cold > 0:
            raise DomainError(f"need t_hot > t_cold > 0, got t_hot={self.t_hot!r}, "
                              f"t_cold={self.t_cold!r}")

    @property
    def beta_hot(self) -> float:
        return 1.0 / self.t_hot

    @property
    def beta_cold(self) -> float:
        return 1.0 / self.t_cold


@dataclass(frozen=True)
class WorkBreakdown:
    """Work decomposition of one finite-time adiabat at control time tau.

    w_ex_exact is the extra work from the exact dynamics; w_mean and
    w_osc are the first-order asymptotic pieces (w_mean is the monotone
    C/tau^2 part, w_osc oscillates in tau and may take either sign, with
    |w_osc| <= w_mean by the arithmetic-geometric mean inequality on the
    two endpoint terms).
    """

    tau: float
    w_adi: float
    w_ex_exact: float
    w_mean: float
    w_osc: float

    def __post_init__(self):
        if self.tau <= 0:
            raise DomainError("control time must be positive")
        if self.w_ex_exact < 0:
            raise DomainError("exact extra work cannot be negative")
        if self.w_mean < 0:
            raise DomainError("mean extra work cannot be negative")
        # tiny relative slack: the AM-GM bound is saturated by balanced
        # endpoint terms and float roundoff may overshoot by ulps
        if abs(self.w_osc) > self.w_mean * (1 + 1e-9) + 1e-300:
            raise DomainError("oscillating extra work exceeds the mean part")

    @property
    def w_first_order(self) -> float:
        return self.w_mean + self.w_osc


@dataclass(frozen=True)
class QuasistaticCycle:
    """Net work, hot-bath heat, and efficiency of the quasi-static cycle."""

    w_total_adi: float
    q_hot_adi: float
    eta_adi: float

    def __post_init__(self):
        if not self.q_hot_adi >= self.w_total_adi >= 0:
            raise DomainError("need q_hot_adi >= w_total_adi >= 0")
        if not 0 <= self.eta_adi < 1:
            raise DomainError("eta_adi must lie in [0, 1)")


@dataclass(frozen=True)
class CyclePoint:
    """One finite-time operating point of the engine.

    `stalled` marks power <= 0; `valid` is cleared when the efficiency
    denominator Q_h^adi - W3^ex is non-positive (the cycle no longer
    absorbs net heat from the hot bath; efficiency is reported as 0.0)
    or when a per-point numerical failure was recorded during a sweep.
    Flagged points are kept, never dropped: the stall boundary is
    physically informative.
    """

    tau1: float
    tau3: float
    power: float
    efficiency: float
    stalled: bool = False
    valid: bool = True

    def __post_init__(self):
        if self.tau1 <= 0 or self.tau3 <= 0:
            raise DomainError("control times must be positive")
        if not (math.isfinite(self.power) and math.isfinite(self.efficiency)):
            raise DomainError("cycle point values must be finite")


# ---------------------------------------------------------------------------
# cycle formulas


def cycle_power(qc: QuasistaticCycle, wex1: float, wex3: float,
                tau1: float, tau3: float) -> float:
    """Net output power of the finite-time cycle.

    Returns (W_T^adi - wex1 - wex3)/(tau1 + tau3).  May be negative when
    the extra work exceeds the quasi-static output (the engine stalls);
    the caller decides whether to keep the point.
    """
    if tau1 <= 0 or tau3 <= 0:
        raise DomainError("control times must be positive")
    return (qc.w_total_adi - wex1 - wex3) / (tau1 + tau3)


def cycle_efficiency(qc: QuasistaticCycle, wex1: float, wex3: float) -> float:
    """Efficiency of the finite-time cycle.

    Returns (W_T^adi - wex1 - wex3)/(Q_h^adi - wex3).  The denominator is
    the heat actually drawn from the hot bath; if it is not positive the
    cycle no longer operates as an engine and a DomainError is raised.
    """
    denom = qc.q_hot_adi - wex3
    if denom <= 0:
        raise DomainError("cycle absorbs no net heat from the hot bath "
                          f"(q_hot_adi={qc.q_hot_adi!r} <= wex3={wex3!r})")
    return (qc.w_total_adi - wex1 - wex3) / denom


def emp_mean_only(eta_adi: float, sigma1: float, sigma3: float) -> float:
    """Efficiency at maximum power of the mean-only extra-work model.

    Under W_i^ex ~ Sigma_i/tau_i^2 the power maximum over (tau1, tau3)
    has the closed form

        eta_EMP = 2 eta_adi / (3 - eta_adi/[1 + (Sigma1/Sigma3)^(1/3)]).
    """
    if sigma1 <= 0 or sigma3 <= 0:
        raise DomainError("mean-work coefficients must be positive")
    if not 0 < eta_adi < 1:
        raise DomainError("eta_adi must lie in (0, 1)")
    return 2 * eta_adi / (3 - eta_adi / (1 + (sigma1 / sigma3) ** (1.0 / 3.0)))
