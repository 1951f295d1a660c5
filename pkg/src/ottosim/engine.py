"""Finite-time Otto cycle assembly and (tau1, tau3) sweeps.

A cycle couples one working medium to a hot and a cold bath through two
instantaneous isochores and two finite-time adiabats: stroke 1 starts
thermal at beta_h and drives the control from its hot-side to its
cold-side value in tau1; stroke 3 starts thermal at beta_c and drives
back along the same path reversed in s, in tau3.  Power and efficiency
come from the quasi-static cycle figures minus the two strokes' extra
works (core.cycle_power / cycle_efficiency).

sweep() maps a rectangular (tau1, tau3) grid twice: with the exact extra
works, and with the mean-only model W_ex = Sigma/tau^2 that ignores the
oscillating part.  Because each stroke's work depends on its own tau
alone, the grid costs count1 + count3 integrations, not count1*count3.
The oscillating part has period pi/phi(1) in tau, so grids are densified
(count -> 2*count - 1, preserving existing nodes) until at least 20
points cover each period; otherwise the jagged frontier edge aliases.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import oscillator, twolevel
from .core import (BathPair, CyclePoint, DomainError, QuasistaticCycle,
                   cycle_efficiency, cycle_power, emp_mean_only)
from .numerics import IntegratorConfig

__all__ = [
    "TauGrid", "TwoLevelMedium", "OscillatorMedium", "CycleSpec",
    "SweepResult", "evaluate_cycle", "sweep", "sigma_coefficients",
    "zero_work_times", "quasistatic", "stroke_adiabats",
]

_SCHEDULE_KINDS = ("linear", "special")


@dataclass(frozen=True)
class TauGrid:
    """One adiabat's control-time axis: [minimum, maximum] with count nodes."""

    minimum: float
    maximum: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if not 0 < self.minimum <= self.maximum:
            raise DomainError("grid bounds must satisfy 0 < minimum <= maximum")
        if self.count < 1:
            raise DomainError("grid count must be at least 1")
        if self.count == 1 and self.minimum != self.maximum:
            raise DomainError("a single-point grid needs minimum == maximum")
        if self.spacing not in ("linear", "log"):
            raise DomainError(f"unknown grid spacing {self.spacing!r}")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.minimum, self.maximum, self.count)
        return np.linspace(self.minimum, self.maximum, self.count)

    def densified(self, period: float) -> "TauGrid":
        """Smallest nested refinement with >= 20 nodes per oscillation period."""
        target = period / 20.0
        count = self.count
        while count < 20001:
            values = (np.geomspace if self.spacing == "log" else np.linspace)(
                self.minimum, self.maximum, count)
            if count == 1 or float(np.max(np.diff(values))) <= target:
                if count == self.count:
                    return self
                return TauGrid(self.minimum, self.maximum, count, self.spacing)
            count = 2 * count - 1
        raise DomainError(
            "grid cannot resolve the extra-work oscillation (period "
            f"{period!r}) below 20001 points; narrow the tau range")


@dataclass(frozen=True)
class TwoLevelMedium:
    """Spin working medium: drive between lambda0 (hot side) and lambda1."""

    epsilon: float
    theta: float
    lambda0: float
    lambda1: float
    schedule_kind: str = "linear"

    def __post_init__(self):
        if self.schedule_kind not in _SCHEDULE_KINDS:
            raise DomainError(f"unknown schedule kind {self.schedule_kind!r}")


@dataclass(frozen=True)
class OscillatorMedium:
    """Oscillator working medium: ramp between omega0 (hot side) and omega1."""

    omega0: float
    omega1: float
    mass: float = 1.0
    schedule_kind: str = "linear"

    def __post_init__(self):
        if self.schedule_kind not in _SCHEDULE_KINDS:
            raise DomainError(f"unknown schedule kind {self.schedule_kind!r}")


@dataclass(frozen=True)
class CycleSpec:
    """Everything needed to evaluate one engine: medium, baths, tau grids.

    schedule_kind3 overrides the return stroke's protocol family; by
    default both strokes use the medium's kind.  Construction fails
    unless the quasi-static cycle is in the engine regime.
    """

    medium: TwoLevelMedium | OscillatorMedium
    baths: BathPair
    grid1: TauGrid
    grid3: TauGrid
    schedule_kind3: str | None = None
    cfg: IntegratorConfig | None = None

    def __post_init__(self):
        if self.schedule_kind3 is not None and self.schedule_kind3 not in _SCHEDULE_KINDS:
            raise DomainError(f"unknown schedule kind {self.schedule_kind3!r}")
        quasistatic(self)  # engine-regime gate


@dataclass(frozen=True)
class SweepResult:
    """Exact-model cloud plus the mean-only comparison on the same grid.

    points/frontier/max_power_point describe the exact model; the *_mean
    triplet is the Sigma/tau^2 model.  tau1_values/tau3_values are the
    axes actually used, after any densification.
    """

    points: tuple[CyclePoint, ...]
    frontier: tuple[CyclePoint, ...]
    max_power_point: CyclePoint
    sigma1: float
    sigma3: float
    eta_emp_model: float
    points_mean: tuple[CyclePoint, ...]
    frontier_mean: tuple[CyclePoint, ...]
    max_power_point_mean: CyclePoint
    tau1_values: np.ndarray
    tau3_values: np.ndarray


def _schedule_for(medium, start_side: str, kind: str):
    if isinstance(medium, TwoLevelMedium):
        a, b = ((medium.lambda0, medium.lambda1) if start_side == "hot"
                else (medium.lambda1, medium.lambda0))
        if kind == "special":
            return twolevel.special_schedule(a, b, medium.theta)
        from .core import LinearSchedule
        return LinearSchedule(start_value=a, end_value=b)
    a, b = ((medium.omega0, medium.omega1) if start_side == "hot"
            else (medium.omega1, medium.omega0))
    if kind == "special":
        return oscillator.special_schedule_osc(a, b)
    from .core import LinearSchedule
    return LinearSchedule(start_value=a, end_value=b)


def stroke_adiabats(spec: CycleSpec):
    """The two driven strokes as adiabat objects: (hot-start, cold-start)."""
    kind1 = spec.medium.schedule_kind
    kind3 = spec.schedule_kind3 or kind1
    sched1 = _schedule_for(spec.medium, "hot", kind1)
    sched3 = _schedule_for(spec.medium, "cold", kind3)
    if isinstance(spec.medium, TwoLevelMedium):
        params = twolevel.TwoLevelParams(epsilon=spec.medium.epsilon,
                                         theta=spec.medium.theta)
        return (twolevel.TwoLevelAdiabat(params=params, schedule=sched1,
                                         beta=spec.baths.beta_hot),
                twolevel.TwoLevelAdiabat(params=params, schedule=sched3,
                                         beta=spec.baths.beta_cold))
    return (oscillator.OscillatorAdiabat(schedule=sched1, mass=spec.medium.mass,
                                         beta=spec.baths.beta_hot),
            oscillator.OscillatorAdiabat(schedule=sched3, mass=spec.medium.mass,
                                         beta=spec.baths.beta_cold))


def quasistatic(spec: CycleSpec) -> QuasistaticCycle:
    """The infinitely slow cycle's figures for this spec's medium and baths."""
    m = spec.medium
    if isinstance(m, TwoLevelMedium):
        return twolevel.quasistatic_cycle_two_level(m.lambda0, m.lambda1, m.theta,
                                                    m.epsilon, spec.baths)
    return oscillator.quasistatic_cycle_osc(m.omega0, m.omega1, spec.baths)


def _exact_work(job) -> float:
    adiabat, tau, cfg = job
    if isinstance(adiabat, twolevel.TwoLevelAdiabat):
        return twolevel.exact_extra_work(adiabat, tau, cfg=cfg)
    return oscillator.exact_extra_work(adiabat, tau, cfg=cfg)


def _mean_work(adiabat, tau: float) -> float:
    if isinstance(adiabat, twolevel.TwoLevelAdiabat):
        return twolevel.mean_extra_work(adiabat, tau)
    return oscillator.mean_extra_work(adiabat, tau)


def _stroke_phase(adiabat) -> float:
    if isinstance(adiabat, twolevel.TwoLevelAdiabat):
        return twolevel.dynamical_phase(adiabat, 1.0)
    return oscillator.total_phase(adiabat)


def _point_from_works(cyc: QuasistaticCycle, tau1: float, tau3: float,
                      w1: float, w3: float) -> CyclePoint:
    power = cycle_power(cyc, w1, w3, tau1, tau3)
    try:
        efficiency = cycle_efficiency(cyc, w1, w3)
        valid = True
    except DomainError:
        efficiency = 0.0
        valid = False
    return CyclePoint(tau1=tau1, tau3=tau3, power=power, efficiency=efficiency,
                      stalled=power <= 0.0, valid=valid)


def evaluate_cycle(spec: CycleSpec, tau1: float, tau3: float) -> CyclePoint:
    """One finite-time cycle with the exact stroke works.

    A stall (P <= 0) and a cycle that no longer draws heat from the hot
    bath (efficiency denominator <= 0) are flagged on the point, never
    raised: both are physical regions of the (tau1, tau3) plane.
    """
    if tau1 <= 0 or tau3 <= 0:
        raise DomainError("stroke times must be positive")
    ad1, ad3 = stroke_adiabats(spec)
    cyc = quasistatic(spec)
    w1 = _exact_work((ad1, tau1, spec.cfg))
    w3 = _exact_work((ad3, tau3, spec.cfg))
    return _point_from_works(cyc, tau1, tau3, w1, w3)


def _pareto(points: Sequence[CyclePoint]) -> tuple[CyclePoint, ...]:
    """Non-dominated, non-stalled, valid points, in cloud order.

    A point survives iff no other point beats it strictly in BOTH power
    and efficiency; among equal powers only the best efficiency is kept
    (exact ties once, first in (tau1, tau3) order).
    """
    indexed = [(p.power, p.efficiency, i) for i, p in enumerate(points)
               if p.valid and not p.stalled]
    if not indexed:
        return ()
    # descending power; within equal power: descending efficiency, then cloud order
    indexed.sort(key=lambda t: (-t[0], -t[1], t[2]))
    survivors = []
    best_eta_higher_power = -math.inf
    i = 0
    while i < len(indexed):
        j = i
        while j < len(indexed) and indexed[j][0] == indexed[i][0]:
            j += 1
        power, eta, idx = indexed[i]  # equal-power group representative
        if eta >= best_eta_higher_power:
            survivors.append(idx)
        best_eta_higher_power = max(best_eta_higher_power, eta)
        i = j
    return tuple(points[i] for i in sorted(survivors))


def _max_power(points: Sequence[CyclePoint]) -> CyclePoint:
    best = points[0]
    for p in points[1:]:
        if p.power > best.power:
            best = p
    return best


def sweep(spec: CycleSpec, workers: int = 1, densify: bool = True) -> SweepResult:
    """Map the (tau1, tau3) grid with exact and mean-only stroke works.

    Stroke works are computed once per axis value and combined
    algebraically, so the exact model costs count1 + count3 ODE
    integrations.  With workers > 1 the axis integrations run in a
    process pool; results are reduced in index order, so the output is
    identical to the serial run.  densify=False skips the
    20-points-per-period refinement; frontier shapes then alias, but
    pointwise quantities (and bound checks over them) stay exact.
    """
    ad1, ad3 = stroke_adiabats(spec)
    cyc = quasistatic(spec)

    if densify:
        grid1 = spec.grid1.densified(math.pi / _stroke_phase(ad1))
        grid3 = spec.grid3.densified(math.pi / _stroke_phase(ad3))
    else:
        grid1, grid3 = spec.grid1, spec.grid3
    taus1 = grid1.values()
    taus3 = grid3.values()

    jobs1 = [(ad1, float(t), spec.cfg) for t in taus1]
    jobs3 = [(ad3, float(t), spec.cfg) for t in taus3]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            w1_exact = list(pool.map(_exact_work, jobs1, chunksize=8))
            w3_exact = list(pool.map(_exact_work, jobs3, chunksize=8))
    else:
        w1_exact = [_exact_work(j) for j in jobs1]
        w3_exact = [_exact_work(j) for j in jobs3]

    sigma1 = _mean_work(ad1, 1.0)
    sigma3 = _mean_work(ad3, 1.0)

    points = []
    points_mean = []
    for i, tau1 in enumerate(taus1):
        t1 = float(tau1)
        for j, tau3 in enumerate(taus3):
            t3 = float(tau3)
            points.append(_point_from_works(cyc, t1, t3, w1_exact[i], w3_exact[j]))
            points_mean.append(_point_from_works(cyc, t1, t3,
                                                 sigma1 / (t1 * t1),
                                                 sigma3 / (t3 * t3)))

    return SweepResult(
        points=tuple(points),
        frontier=_pareto(points),
        max_power_point=_max_power(points),
        sigma1=sigma1,
        sigma3=sigma3,
        eta_emp_model=emp_mean_only(cyc.eta_adi, sigma1, sigma3),
        points_mean=tuple(points_mean),
        frontier_mean=_pareto(points_mean),
        max_power_point_mean=_max_power(points_mean),
        tau1_values=taus1,
        tau3_values=taus3,
    )


def sigma_coefficients(spec: CycleSpec) -> tuple[float, float]:
    """(Sigma1, Sigma3): the tau-independent coefficients of W_mean = Sigma/tau^2."""
    ad1, ad3 = stroke_adiabats(spec)
    return _mean_work(ad1, 1.0), _mean_work(ad3, 1.0)


def zero_work_times(spec: CycleSpec, n_max: int) -> tuple[float, ...]:
    """tau_n = n pi / phi(1), where the special protocols' extra work vanishes.

    Defined only when both strokes run special protocols (the reversed
    stroke has the same total phase, so one sequence serves both).
    """
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    kind1 = spec.medium.schedule_kind
    kind3 = spec.schedule_kind3 or kind1
    if kind1 != "special" or kind3 != "special":
        raise DomainError("zero-work times require the special protocol on both "
                          "strokes (constant lambda'/Lambda^3 or omega'/omega^2)")
    m = spec.medium
    if isinstance(m, TwoLevelMedium):
        phase = twolevel.special_phase_total(m.lambda0, m.lambda1, m.theta, m.epsilon)
    else:
        phase = oscillator.SpecialOscillatorSchedule(m.omega0, m.omega1).phase_integral
    return tuple(n * math.pi / phase for n in range(1, n_max + 1))
