"""Finite-time adiabat physics for the driven two-level spin.

The working medium is a spin in a rotated magnetic field with Hamiltonian

    H(t) = epsilon * [ (lambda(t) - cos theta) sigma_z + sin theta sigma_x ],

so the instantaneous levels are +/- epsilon*Lambda with
Lambda(lambda) = sqrt((lambda - cos theta)^2 + sin^2 theta) and the
dimensionless drive lambda(t) = lambda_tilde(t/tau) is the only control.
A stroke starts from a thermal state of H(0) at inverse temperature beta
and drives lambda_tilde from its start to its end value in control time
tau.  Everything is expressed in rescaled time s = t/tau, where the
transition amplitudes in the instantaneous basis obey

    db_g/ds = +exp(-2i tau phi(s)) * |sin theta| lambda'(s) / (2 Lambda^2) * b_e
    db_e/ds = -exp(+2i tau phi(s)) * |sin theta| lambda'(s) / (2 Lambda^2) * b_g

with the dynamical phase phi(s) = epsilon * integral_0^s Lambda ds'
co-integrated as an auxiliary state variable.  The module provides the
exact extra work from these amplitudes, its first-order large-tau
asymptotics (mean + oscillating parts), the quasi-static work and cycle,
and the special protocol with constant lambda'/Lambda^3 whose first-order
extra work vanishes at tau = n pi / phi(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BathPair, DomainError, QuasistaticCycle, Schedule
from .numerics import DEFAULT_INTEGRATOR, IntegratorConfig, integrate_ode, quad, find_root

__all__ = [
    "TwoLevelParams", "TwoLevelAdiabat", "AmplitudePair", "SpecialTwoLevelSchedule",
    "gap", "eigenvectors", "dynamical_phase", "integrate_amplitudes", "norm_drift",
    "exact_extra_work", "quasistatic_work", "first_order_amplitude",
    "mean_extra_work", "osc_extra_work", "special_schedule", "special_phase_total",
    "quasistatic_cycle_two_level",
]


def gap(lam: float, theta: float) -> float:
    """Dimensionless half-splitting Lambda = sqrt(lambda^2 - 2 lambda cos theta + 1).

    Computed as sqrt((lambda - cos theta)^2 + sin^2 theta), which is the
    same polynomial without cancellation and makes Lambda >= |sin theta|
    manifest.
    """
    d = lam - math.cos(theta)
    st = math.sin(theta)
    return math.hypot(d, st)


def eigenvectors(lam: float, theta: float):
    """Normalized instantaneous eigenvectors (ground, excited).

    ground ~ (lambda - cos theta - Lambda, sin theta) and
    excited ~ (lambda - cos theta + Lambda, sin theta).  The difference
    Lambda -/+ (lambda - cos theta) is evaluated through
    sin^2 theta / (Lambda +/- (lambda - cos theta)) on the side where
    direct subtraction would cancel.
    """
    d = lam - math.cos(theta)
    st = math.sin(theta)
    lam_gap = math.hypot(d, st)
    if lam_gap == 0.0:
        raise DomainError("degenerate point: sin theta = 0 and lambda = cos theta")
    if d >= 0.0:
        lpd = lam_gap + d
        lmd = st * st / lpd
    else:
        lmd = lam_gap - d
        lpd = st * st / lmd
    n1 = math.sqrt(2.0 * lam_gap * lmd)
    n2 = math.sqrt(2.0 * lam_gap * lpd)
    if n1 == 0.0 or n2 == 0.0:
        raise DomainError("normalization factor vanishes: at sin theta = 0 this "
                          "parametrization cannot represent the sigma_z eigenvectors")
    ground = np.array([-lmd / n1, st / n1])
    excited = np.array([lpd / n2, st / n2])
    return ground, excited


@dataclass(frozen=True)
class TwoLevelParams:
    """Energy scale epsilon and static field angle theta of the spin."""

    epsilon: float
    theta: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise DomainError("epsilon must be positive")
        if math.sin(self.theta) == 0.0:
            raise DomainError("sin theta = 0: the drive never couples the levels")


@dataclass(frozen=True)
class TwoLevelAdiabat:
    """One driven stroke: spin parameters, lambda schedule, initial beta."""

    params: TwoLevelParams
    schedule: Schedule
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError("inverse temperature must be positive")
        if gap(self.schedule.start, self.params.theta) <= 0 \
                or gap(self.schedule.end, self.params.theta) <= 0:
            raise DomainError("schedule endpoints sit on a level crossing")

    @property
    def gap_start(self) -> float:
        return gap(self.schedule.start, self.params.theta)

    @property
    def gap_end(self) -> float:
        return gap(self.schedule.end, self.params.theta)

    @property
    def thermal_weight(self) -> float:
        """Initial population difference p_g - p_e = tanh(beta epsilon Lambda(0))."""
        return math.tanh(self.beta * self.params.epsilon * self.gap_start)


@dataclass(frozen=True)
class AmplitudePair:
    """Final instantaneous-basis amplitudes and accumulated dynamical phase."""

    ground: complex
    excited: complex
    phase: float

    @property
    def norm(self) -> float:
        return abs(self.ground) ** 2 + abs(self.excited) ** 2


def dynamical_phase(adiabat: TwoLevelAdiabat, s: float) -> float:
    """phi(s) = epsilon * integral_0^s Lambda(lambda(s')) ds', strictly increasing."""
    if not 0.0 <= s <= 1.0:
        raise DomainError("rescaled time must lie in [0, 1]")
    eps = adiabat.params.epsilon
    theta = adiabat.params.theta
    sched = adiabat.schedule
    return eps * quad(lambda u: gap(sched.value(u), theta), (0.0, s))


def _phase_rate_bound(adiabat: TwoLevelAdiabat) -> float:
    # upper bound on Lambda over the stroke; 65 samples cover any
    # reasonable tabulated wiggle, monotone schedules peak at an endpoint
    theta = adiabat.params.theta
    sched = adiabat.schedule
    return max(gap(sched.value(s), theta) for s in np.linspace(0.0, 1.0, 65))


def integrate_amplitudes(adiabat: TwoLevelAdiabat, tau: float,
                         initial=(1.0, 0.0),
                         cfg: IntegratorConfig | None = None,
                         record: bool = False):
    """Exact amplitudes after the stroke, for a basis state start.

    Returns an AmplitudePair holding b_g(1), b_e(1) and phi(1); the
    default initial condition (1, 0) starts in the instantaneous ground
    state.  With record=True returns (pair, s_steps, amplitude_steps) so
    invariant checks can inspect every accepted step.

    The step size is capped at a tenth of the fastest oscillation period
    of the phase factor exp(2i tau phi), so the quadrature of the
    coupling never aliases.
    """
    if tau <= 0:
        raise DomainError("control time must be positive")
    cfg = cfg or DEFAULT_INTEGRATOR
    eps = adiabat.params.epsilon
    theta = adiabat.params.theta
    coupling = abs(math.sin(theta))
    sched = adiabat.schedule

    def rhs(s, y):
        lam, dlam = sched.value_and_derivative(s)
        lam_gap = gap(lam, theta)
        k = coupling * dlam / (2.0 * lam_gap * lam_gap)
        rot = np.exp(-2j * tau * y[2])
        return np.array([k * rot * y[1],
                         -k * np.conj(rot) * y[0],
                         eps * lam_gap + 0j])

    # oscillation period in s is pi/(tau * eps * Lambda_max)
    max_step = min(math.pi / (10.0 * tau * eps * _phase_rate_bound(adiabat)), 0.1)
    y0 = np.array([complex(initial[0]), complex(initial[1]), 0.0 + 0j])
    res = integrate_ode(rhs, y0, (0.0, 1.0), cfg, max_step=max_step, record=record)
    pair = AmplitudePair(ground=complex(res.y[0]), excited=complex(res.y[1]),
                         phase=float(res.y[2].real))
    if record:
        return pair, res.ts, res.ys[:, :2]
    return pair


def norm_drift(adiabat: TwoLevelAdiabat, tau: float,
               cfg: IntegratorConfig | None = None) -> float:
    """Largest deviation of |b_g|^2 + |b_e|^2 from 1 over all accepted steps."""
    _, _, amps = integrate_amplitudes(adiabat, tau, cfg=cfg, record=True)
    norms = np.abs(amps[:, 0]) ** 2 + np.abs(amps[:, 1]) ** 2
    return float(np.max(np.abs(norms - 1.0)))


def exact_extra_work(adiabat: TwoLevelAdiabat, tau: float,
                     cfg: IntegratorConfig | None = None) -> float:
    """Extra work of the finite-time stroke from the exact amplitudes.

    W_ex(tau) = 2 epsilon Lambda(1) tanh(beta epsilon Lambda(0)) |b_e(tau)|^2.
    The single ground->excited transition probability suffices because the
    2x2 propagator is unitary (P_{g->e} = P_{e->g}), so the thermal average
    over both basis starts collapses to the tanh population factor.
    """
    pair = integrate_amplitudes(adiabat, tau, cfg=cfg)
    eps = adiabat.params.epsilon
    return (2.0 * eps * adiabat.gap_end * adiabat.thermal_weight
            * abs(pair.excited) ** 2)


def quasistatic_work(adiabat: TwoLevelAdiabat) -> float:
    """Work of the infinitely slow stroke: -eps tanh(beta eps Lambda(0)) (Lambda(1)-Lambda(0))."""
    eps = adiabat.params.epsilon
    return -eps * adiabat.thermal_weight * (adiabat.gap_end - adiabat.gap_start)


def first_order_amplitude(adiabat: TwoLevelAdiabat, tau: float) -> complex:
    """Leading large-tau transition amplitude.

    c_ge^[1](tau) = (i |sin theta| / 4 eps tau)
                    * (lambda'(1) e^{2 i tau phi(1)} / Lambda(1)^3
                       - lambda'(0) / Lambda(0)^3).

    Only the two endpoint derivatives survive the first integration by
    parts; balancing them is what the special protocol exploits.
    """
    if tau <= 0:
        raise DomainError("control time must be positive")
    eps = adiabat.params.epsilon
    sched = adiabat.schedule
    phase_end = dynamical_phase(adiabat, 1.0)
    term_end = sched.derivative(1.0) / adiabat.gap_end ** 3 * np.exp(2j * tau * phase_end)
    term_start = sched.derivative(0.0) / adiabat.gap_start ** 3
    return 1j * abs(math.sin(adiabat.params.theta)) / (4.0 * eps * tau) \
        * (term_end - term_start)


def mean_extra_work(adiabat: TwoLevelAdiabat, tau: float) -> float:
    """Monotone part of the first-order extra work; exact C/tau^2 law."""
    if tau <= 0:
        raise DomainError("control time must be positive")
    eps = adiabat.params.epsilon
    st2 = math.sin(adiabat.params.theta) ** 2
    d0 = adiabat.schedule.derivative(0.0)
    d1 = adiabat.schedule.derivative(1.0)
    return (st2 * adiabat.gap_end / (8.0 * eps * tau * tau)
            * (d1 * d1 / adiabat.gap_end ** 6 + d0 * d0 / adiabat.gap_start ** 6)
            * adiabat.thermal_weight)


def osc_extra_work(adiabat: TwoLevelAdiabat, tau: float) -> float:
    """Oscillating part of the first-order extra work (either sign).

    Proportional to cos(2 tau phi(1)); together with the mean part it
    equals 2 eps Lambda(1) tanh(beta eps Lambda(0)) |c_ge^[1]|^2 identically.
    """
    if tau <= 0:
        raise DomainError("control time must be positive")
    eps = adiabat.params.epsilon
    st2 = math.sin(adiabat.params.theta) ** 2
    d0 = adiabat.schedule.derivative(0.0)
    d1 = adiabat.schedule.derivative(1.0)
    phase_end = dynamical_phase(adiabat, 1.0)
    return (-st2 / (4.0 * eps * tau * tau)
            * d1 * d0 * math.cos(2.0 * tau * phase_end)
            / (adiabat.gap_end ** 2 * adiabat.gap_start ** 3)
            * adiabat.thermal_weight)


# ---------------------------------------------------------------------------
# special protocol: constant lambda'/Lambda^3


def _f(lam, theta):
    # strictly increasing in lambda: f' = sin^2(theta)/Lambda^3
    return (lam - np.cos(theta)) / np.hypot(lam - np.cos(theta), np.sin(theta))


_TABLE_POINTS = 1024


@dataclass(frozen=True, eq=False)
class SpecialTwoLevelSchedule(Schedule):
    """Drive with lambda'(s) = C Lambda(s)^3, the endpoint-balanced protocol.

    Defined implicitly by s = [f(lambda(s)) - f(lambda0)] / [f(lambda1) - f(lambda0)]
    with f(lambda) = (lambda - cos theta)/Lambda(lambda).  Construction
    tabulates the inverse on a 1024-point grid by vectorized bisection;
    point queries bisect within the bracketing table cell to 1e-12.  The
    derivative comes from the defining identity, with
    C = [f(lambda1) - f(lambda0)]/sin^2 theta.
    """

    lambda0: float
    lambda1: float
    theta: float
    kind = "special_two_level"
    _table: np.ndarray = field(init=False, repr=False)
    _const: float = field(init=False, repr=False)

    def __post_init__(self):
        if math.sin(self.theta) == 0.0:
            raise DomainError("sin theta = 0 leaves no coupled drive to balance")
        f0 = float(_f(self.lambda0, self.theta))
        f1 = float(_f(self.lambda1, self.theta))
        const = (f1 - f0) / math.sin(self.theta) ** 2
        if self.lambda0 == self.lambda1:
            table = np.full(_TABLE_POINTS, float(self.lambda0))
        else:
            s_grid = np.linspace(0.0, 1.0, _TABLE_POINTS)
            targets = f0 + s_grid * (f1 - f0)
            lo = np.full(_TABLE_POINTS, min(self.lambda0, self.lambda1))
            hi = np.full(_TABLE_POINTS, max(self.lambda0, self.lambda1))
            for _ in range(60):  # 0.7/2^60 << 1e-12
                mid = 0.5 * (lo + hi)
                below = _f(mid, self.theta) < targets
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
            table = 0.5 * (lo + hi)
            table[0] = self.lambda0
            table[-1] = self.lambda1
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_const", const)

    @property
    def start(self) -> float:
        return self.lambda0

    @property
    def end(self) -> float:
        return self.lambda1

    def value(self, s):
        if s <= 0.0 or self.lambda0 == self.lambda1:
            return self.lambda0
        if s >= 1.0:
            return self.lambda1
        f0 = float(_f(self.lambda0, self.theta))
        f1 = float(_f(self.lambda1, self.theta))
        target = f0 + s * (f1 - f0)
        cell = int(s * (_TABLE_POINTS - 1))
        a, b = sorted((self._table[cell], self._table[min(cell + 1, _TABLE_POINTS - 1)]))
        pad = 1e-9  # table entries are only 1e-12-accurate themselves
        lo = max(a - pad, min(self.lambda0, self.lambda1))
        hi = min(b + pad, max(self.lambda0, self.lambda1))
        try:
            return find_root(lambda lam: float(_f(lam, self.theta)) - target,
                             (lo, hi), tol=1e-12)
        except ValueError:
            return find_root(lambda lam: float(_f(lam, self.theta)) - target,
                             (min(self.lambda0, self.lambda1),
                              max(self.lambda0, self.lambda1)), tol=1e-12)

    def derivative(self, s):
        return self._const * gap(self.value(s), self.theta) ** 3

    def value_and_derivative(self, s):
        lam = self.value(s)
        return lam, self._const * gap(lam, self.theta) ** 3

    @property
    def phase_integral(self) -> float:
        """integral_0^1 Lambda(lambda(s)) ds in closed form (phi(1)/epsilon)."""
        return _special_phase_integral(self.lambda0, self.lambda1, self.theta)


def _special_phase_integral(lambda0, lambda1, theta):
    # substituting ds = d lambda/(C Lambda^3) turns the phase integral into
    # an arctangent; the customary tan(theta/2) form differs only by a
    # constant that cancels between the endpoints, this one stays finite
    # at lambda = 1
    if lambda0 == lambda1:
        return gap(lambda0, theta)
    st = math.sin(theta)
    ct = math.cos(theta)
    df = float(_f(lambda1, theta)) - float(_f(lambda0, theta))
    return st * (math.atan((lambda1 - ct) / st) - math.atan((lambda0 - ct) / st)) / df


def special_schedule(lambda0: float, lambda1: float, theta: float) -> SpecialTwoLevelSchedule:
    """The protocol with constant lambda'/Lambda^3 between the given endpoints."""
    return SpecialTwoLevelSchedule(lambda0, lambda1, theta)


def special_phase_total(lambda0: float, lambda1: float, theta: float,
                        epsilon: float) -> float:
    """phi(1) of the special protocol, in closed form.

    The first-order extra work of the special protocol vanishes exactly at
    tau = n pi / phi(1).
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if math.sin(theta) == 0.0:
        raise DomainError("sin theta = 0 admits no special protocol")
    return epsilon * _special_phase_integral(lambda0, lambda1, theta)


def quasistatic_cycle_two_level(lambda0: float, lambda1: float, theta: float,
                                epsilon: float, baths: BathPair) -> QuasistaticCycle:
    """Quasi-static Otto cycle figures for the spin medium.

    The hot isochore thermalizes at lambda0 (level splitting 2 E0) and the
    cold one at lambda1 (splitting 2 E1):

        W_T^adi = (E0 - E1) [tanh(beta_c E1) - tanh(beta_h E0)]
        Q_h^adi =  E0       [tanh(beta_c E1) - tanh(beta_h E0)]
        eta_adi = 1 - E1/E0

    Engine regime requires E0 >= E1 and a positive population bracket.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    e0 = epsilon * gap(lambda0, theta)
    e1 = epsilon * gap(lambda1, theta)
    if e1 > e0:
        raise DomainError("not an engine: the drive must lower the gap "
                          f"(E0={e0!r} < E1={e1!r})")
    bracket = math.tanh(baths.beta_cold * e1) - math.tanh(baths.beta_hot * e0)
    if bracket <= 0:
        raise DomainError("not an engine: population bracket "
                          "tanh(beta_c E1) - tanh(beta_h E0) must be positive, "
                          f"got {bracket!r}")
    return QuasistaticCycle(w_total_adi=(e0 - e1) * bracket,
                            q_hot_adi=e0 * bracket,
                            eta_adi=1.0 - e1 / e0)
