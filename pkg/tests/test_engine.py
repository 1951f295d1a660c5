"""Cycle assembly, grid handling, Pareto extraction, and sweeps."""

import math

import numpy as np
import pytest

from ottosim.core import BathPair, CyclePoint, DomainError
from ottosim.engine import (
    CycleSpec,
    OscillatorMedium,
    TauGrid,
    TwoLevelMedium,
    _max_power,
    _pareto,
    evaluate_cycle,
    quasistatic,
    sigma_coefficients,
    stroke_adiabats,
    sweep,
    zero_work_times,
)

BATHS = BathPair(t_hot=5.0, t_cold=2.0)
TL = TwoLevelMedium(epsilon=1.0, theta=0.4, lambda0=0.1, lambda1=0.8)
OSC = OscillatorMedium(omega0=2.0, omega1=1.0)


def tl_spec(grid1, grid3=None, kind="linear"):
    medium = TwoLevelMedium(epsilon=1.0, theta=0.4, lambda0=0.1, lambda1=0.8,
                            schedule_kind=kind)
    return CycleSpec(medium=medium, baths=BATHS, grid1=grid1,
                     grid3=grid3 or grid1)


def osc_spec(grid1, grid3=None, kind="linear"):
    medium = OscillatorMedium(omega0=2.0, omega1=1.0, schedule_kind=kind)
    return CycleSpec(medium=medium, baths=BATHS, grid1=grid1,
                     grid3=grid3 or grid1)


class TestTauGrid:
    def test_values_linear_and_log(self):
        lin = TauGrid(1.0, 5.0, 5)
        assert np.allclose(lin.values(), [1, 2, 3, 4, 5])
        log = TauGrid(1.0, 100.0, 3, spacing="log")
        assert np.allclose(log.values(), [1.0, 10.0, 100.0])

    def test_single_point(self):
        g = TauGrid(7.0, 7.0, 1)
        assert list(g.values()) == [7.0]

    def test_validation(self):
        with pytest.raises(DomainError):
            TauGrid(0.0, 5.0, 3)
        with pytest.raises(DomainError):
            TauGrid(5.0, 1.0, 3)
        with pytest.raises(DomainError):
            TauGrid(1.0, 5.0, 1)  # count 1 needs min == max
        with pytest.raises(DomainError):
            TauGrid(1.0, 5.0, 3, spacing="cubic")

    def test_densified_nests_original_points(self):
        g = TauGrid(1.0, 9.0, 5)
        # need gap <= 0.1; doubling count -> 2c - 1 reaches it at 129
        fine = g.densified(period=2.0)
        assert fine.count == 129
        assert np.max(np.diff(fine.values())) <= 0.1 + 1e-12
        orig = set(map(float, g.values()))
        assert orig.issubset(set(map(float, fine.values())))

    def test_densified_noop_when_already_fine(self):
        g = TauGrid(1.0, 2.0, 101)
        assert g.densified(period=10.0) is g

    def test_densified_cap(self):
        g = TauGrid(1.0, 1e6, 2)
        with pytest.raises(DomainError):
            g.densified(period=1e-3)


class TestCycleSpec:
    def test_mixed_schedule_kinds(self):
        spec = CycleSpec(medium=TL, baths=BATHS, grid1=TauGrid(5.0, 10.0, 3),
                         grid3=TauGrid(5.0, 10.0, 3), schedule_kind3="special")
        ad1, ad3 = stroke_adiabats(spec)
        assert ad1.schedule.kind == "linear"
        assert ad3.schedule.kind == "special_two_level"

    def test_rejects_unknown_kind(self):
        with pytest.raises(DomainError):
            CycleSpec(medium=TwoLevelMedium(epsilon=1.0, theta=0.4,
                                            lambda0=0.1, lambda1=0.8,
                                            schedule_kind="cubic"),
                      baths=BATHS, grid1=TauGrid(1.0, 2.0, 2),
                      grid3=TauGrid(1.0, 2.0, 2))

    def test_rejects_non_engine_regime(self):
        with pytest.raises(DomainError):
            CycleSpec(medium=OscillatorMedium(omega0=1.0, omega1=2.0),
                      baths=BATHS, grid1=TauGrid(1.0, 2.0, 2),
                      grid3=TauGrid(1.0, 2.0, 2))

    def test_stroke_adiabats_orientation(self):
        spec = osc_spec(TauGrid(1.0, 2.0, 2))
        ad1, ad3 = stroke_adiabats(spec)
        # stroke 1 rides the hot bath through the closing gap, stroke 3
        # returns through the reversed ramp in contact with the cold bath
        assert ad1.omega_start == 2.0 and ad1.omega_end == 1.0
        assert ad3.omega_start == 1.0 and ad3.omega_end == 2.0
        assert ad1.beta == pytest.approx(BATHS.beta_hot)
        assert ad3.beta == pytest.approx(BATHS.beta_cold)


class TestEvaluateCycle:
    def test_agrees_with_direct_formulas(self):
        from ottosim import twolevel as tl

        spec = tl_spec(TauGrid(5.0, 20.0, 4))
        ad1, ad3 = stroke_adiabats(spec)
        cyc = quasistatic(spec)
        pt = evaluate_cycle(spec, 12.0, 17.0)
        w1 = tl.exact_extra_work(ad1, 12.0)
        w3 = tl.exact_extra_work(ad3, 17.0)
        assert pt.power == pytest.approx(
            (cyc.w_total_adi - w1 - w3) / 29.0, rel=1e-12)
        assert pt.efficiency == pytest.approx(
            (cyc.w_total_adi - w1 - w3) / (cyc.q_hot_adi - w3), rel=1e-12)
        assert not pt.stalled and pt.valid

    def test_special_protocol_near_quasistatic_at_magic_time(self):
        spec = tl_spec(TauGrid(1.0, 10.0, 4), kind="special")
        tau_star = zero_work_times(spec, 1)[0]
        pt = evaluate_cycle(spec, tau_star, tau_star)
        cyc = quasistatic(spec)
        assert pt.power > 0
        assert pt.efficiency == pytest.approx(cyc.eta_adi, rel=5e-3)

    def test_stall_flag_at_fast_driving(self):
        pt = evaluate_cycle(tl_spec(TauGrid(0.5, 1.0, 2)), 0.5, 0.5)
        assert pt.stalled
        assert pt.power <= 0

    def test_invalid_flag_when_heat_intake_exhausted(self):
        # drive stroke 3 hard enough that the cold-side extra work eats
        # the whole quasistatic heat intake
        spec = osc_spec(TauGrid(0.05, 1.0, 2))
        pt = evaluate_cycle(spec, 0.05, 0.05)
        assert not pt.valid
        assert pt.efficiency == 0.0


def mk(tau1, tau3, power, eta, stalled=False, valid=True):
    return CyclePoint(tau1=tau1, tau3=tau3, power=power, efficiency=eta,
                      stalled=stalled, valid=valid)


class TestParetoRules:
    def test_dominated_points_removed(self):
        cloud = [mk(1, 1, 0.5, 0.3), mk(2, 1, 0.4, 0.2), mk(3, 1, 0.6, 0.1)]
        front = _pareto(cloud)
        # (0.4, 0.2) is beaten by (0.5, 0.3) on both axes
        assert [(p.power, p.efficiency) for p in front] == [(0.5, 0.3), (0.6, 0.1)]

    def test_survivors_keep_cloud_order(self):
        cloud = [mk(3, 1, 0.6, 0.1), mk(1, 1, 0.5, 0.3), mk(2, 1, 0.7, 0.05)]
        front = _pareto(cloud)
        assert [p.tau1 for p in front] == [3, 1, 2]

    def test_equal_power_keeps_best_efficiency(self):
        cloud = [mk(1, 1, 0.5, 0.2), mk(2, 1, 0.5, 0.35), mk(3, 1, 0.5, 0.3)]
        front = _pareto(cloud)
        assert len(front) == 1
        assert front[0].efficiency == 0.35

    def test_stalled_and_invalid_excluded(self):
        cloud = [mk(1, 1, 0.5, 0.3), mk(2, 1, -0.1, 0.4, stalled=True),
                 mk(3, 1, 0.9, 0.0, valid=False)]
        front = _pareto(cloud)
        assert [p.tau1 for p in front] == [1]

    def test_empty_cloud(self):
        assert _pareto([]) == ()

    def test_frontier_is_mutually_nondominated(self):
        rng = np.random.default_rng(7)
        cloud = [mk(i + 1, 1, float(p), float(e))
                 for i, (p, e) in enumerate(rng.random((200, 2)))]
        front = _pareto(cloud)
        for a in front:
            for b in front:
                if a is not b:
                    assert not (b.power > a.power and b.efficiency > a.efficiency)
        # every excluded valid point is dominated or an equal-power loser
        kept = set(id(p) for p in front)
        for p in cloud:
            if id(p) in kept:
                continue
            assert any((q.power > p.power and q.efficiency >= p.efficiency)
                       or (q.power >= p.power and q.efficiency > p.efficiency)
                       for q in front)

    def test_max_power_first_strict_winner(self):
        cloud = [mk(1, 1, 0.5, 0.1), mk(2, 1, 0.9, 0.2), mk(3, 1, 0.9, 0.9)]
        assert _max_power(cloud).tau1 == 2


class TestSweep:
    GRID = TauGrid(8.0, 16.0, 5)

    def test_point_grid_shape_and_reuse(self):
        spec = tl_spec(self.GRID)
        res = sweep(spec, densify=False)
        n1 = len(res.tau1_values)
        n3 = len(res.tau3_values)
        assert len(res.points) == n1 * n3
        assert len(res.points_mean) == n1 * n3
        # spot-check one point against an independent evaluation
        pt = res.points[7]
        direct = evaluate_cycle(spec, pt.tau1, pt.tau3)
        assert pt.power == pytest.approx(direct.power, rel=1e-12)
        assert pt.efficiency == pytest.approx(direct.efficiency, rel=1e-12)

    def test_frontier_subset_and_nondominated(self):
        res = sweep(tl_spec(self.GRID), densify=False)
        cloud_keys = {(p.tau1, p.tau3) for p in res.points}
        for f in res.frontier:
            assert (f.tau1, f.tau3) in cloud_keys
        for p in res.points:
            if p.stalled or not p.valid:
                continue
            for f in res.frontier:
                assert not (p.power > f.power and p.efficiency > f.efficiency)

    def test_exact_beats_mean_at_max_power(self):
        res = sweep(tl_spec(self.GRID), densify=False)
        assert res.max_power_point.power > res.max_power_point_mean.power

    def test_workers_do_not_change_anything(self):
        spec = tl_spec(TauGrid(8.0, 16.0, 3))
        serial = sweep(spec, workers=1, densify=False)
        parallel = sweep(spec, workers=2, densify=False)
        assert [(p.power, p.efficiency) for p in serial.points] == \
               [(p.power, p.efficiency) for p in parallel.points]

    def test_single_point_grid_frontier_is_that_point(self):
        spec = tl_spec(TauGrid(20.0, 20.0, 1))
        res = sweep(spec)
        assert len(res.points) == 1
        assert len(res.frontier) == 1
        assert res.frontier[0].tau1 == 20.0 and res.frontier[0].tau3 == 20.0

    def test_densification_against_aliasing(self):
        spec = osc_spec(TauGrid(1.0, 21.0, 5))
        res = sweep(spec)  # gap 5 is far coarser than the beat period
        assert len(res.tau1_values) > 5
        # original coarse abscissae survive in the densified axis
        assert set(np.round(np.linspace(1.0, 21.0, 5), 12)).issubset(
            set(np.round(res.tau1_values, 12)))

    def test_sigma_matches_small_time_coefficient(self):
        from ottosim import twolevel as tl

        spec = tl_spec(self.GRID)
        s1, s3 = sigma_coefficients(spec)
        ad1, ad3 = stroke_adiabats(spec)
        assert s1 == pytest.approx(tl.mean_extra_work(ad1, 10.0) * 100.0,
                                   rel=1e-12)
        assert s3 == pytest.approx(tl.mean_extra_work(ad3, 10.0) * 100.0,
                                   rel=1e-12)
        # recomputed independently (mpmath, 50 digits)
        assert s1 == pytest.approx(0.14926025869751127, abs=1e-13)
        assert s3 == pytest.approx(0.37210757572558663, abs=1e-13)

    def test_eta_emp_model_value(self):
        res = sweep(tl_spec(TauGrid(8.0, 16.0, 3)), densify=False)
        # recomputed independently (mpmath, 50 digits)
        assert res.eta_emp_model == pytest.approx(0.41095243628304271, abs=1e-12)


class TestZeroWorkTimes:
    def test_two_level_reference(self):
        spec = tl_spec(TauGrid(1.0, 2.0, 2), kind="special")
        times = zero_work_times(spec, 3)
        # recomputed independently: n pi / 0.53054663359012401
        assert times[0] == pytest.approx(5.9214260437977702, abs=1e-12)
        assert np.allclose(times, times[0] * np.arange(1, 4), rtol=1e-13)

    def test_oscillator_closed_form(self):
        spec = osc_spec(TauGrid(1.0, 2.0, 2), kind="special")
        times = zero_work_times(spec, 4)
        expected = math.pi / (2 * math.log(2.0)) * np.arange(1, 5)
        assert np.allclose(times, expected, atol=1e-12)

    def test_requires_special_schedules(self):
        with pytest.raises(DomainError):
            zero_work_times(tl_spec(TauGrid(1.0, 2.0, 2)), 2)
