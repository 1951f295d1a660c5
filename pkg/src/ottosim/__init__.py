"""Simulation and optimization toolkit for finite-time quantum Otto engines.

Two working media are provided: a driven two-level spin (`twolevel`) and a
frequency-ramped harmonic oscillator (`oscillator`).  The `engine` module
assembles either medium into a finite-time Otto cycle and maps the
power-efficiency trade-off; the `cli` module exposes everything as the
``ottosim`` command.
"""

from .core import (
    BathPair,
    CyclePoint,
    DomainError,
    LinearSchedule,
    QuasistaticCycle,
    Schedule,
    TabulatedSchedule,
    WorkBreakdown,
    cycle_efficiency,
    cycle_power,
    emp_mean_only,
)
from .engine import (
    CycleSpec,
    OscillatorMedium,
    SweepResult,
    TauGrid,
    TwoLevelMedium,
    evaluate_cycle,
    sigma_coefficients,
    sweep,
    zero_work_times,
)
from .numerics import IntegratorConfig, NumericsError, find_root, integrate_ode, quad

__version__ = "0.1.0"

__all__ = [
    "BathPair",
    "CyclePoint",
    "CycleSpec",
    "DomainError",
    "IntegratorConfig",
    "LinearSchedule",
    "NumericsError",
    "OscillatorMedium",
    "QuasistaticCycle",
    "Schedule",
    "SweepResult",
    "TabulatedSchedule",
    "TauGrid",
    "TwoLevelMedium",
    "WorkBreakdown",
    "cycle_efficiency",
    "cycle_power",
    "emp_mean_only",
    "evaluate_cycle",
    "find_root",
    "integrate_ode",
    "quad",
    "sigma_coefficients",
    "sweep",
    "zero_work_times",
    "__version__",
]
