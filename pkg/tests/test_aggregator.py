"""Aggregator tests: PDDF construction, CFF exactness, feasible region, optimizer."""

import numpy as np
import pytest

from heatfleet.aggregator import (
    PowerDensityPair,
    build_pddf,
    build_pddf_from_arrays,
    capacity_factor,
    cff,
    feasible_region,
    max_cff_increment,
    select_setpoint,
    verify_boundary_condition,
)
from heatfleet.thermostat import (
    PowerStateVector,
    ThermostatConfig,
    hysteresis_update,
    measurement_temperature,
)

CFG8 = ThermostatConfig(setpoint=20.0, deadband=1.0, resolution=8)
CFG1000 = ThermostatConfig(setpoint=20.0, deadband=1.0, resolution=1000)


def random_reports(rng, n, cfg):
    m = rng.integers(0, cfg.resolution + 1, n)
    state = rng.integers(0, 2, n)
    power = rng.uniform(3.0, 5.0, n)
    return state, m, power


def realized_phi_after_switch(state, m, power, m_s, cfg):
    """Independent oracle: apply the deadband rule to every unit and sum."""
    n_new = hysteresis_update(state, m, m_s, cfg)
    return power[n_new.astype(bool)].sum() / power.sum()


class TestBuildPddf:
    def test_single_unit(self):
        pddf = build_pddf([PowerStateVector(1, 300, 4.0)], CFG1000)
        assert pddf.installed_capacity == 4.0
        assert pddf.phi1[300] * pddf.grid_step == pytest.approx(1.0, abs=1e-12)
        assert pddf.phi0.sum() == 0.0

    def test_two_unit_weighted_histogram(self):
        reports = [PowerStateVector(1, 300, 4.0), PowerStateVector(0, 700, 6.0)]
        pddf = build_pddf(reports, CFG1000)
        assert pddf.installed_capacity == 10.0
        assert pddf.phi1[300] * pddf.grid_step == pytest.approx(0.4, abs=1e-12)
        assert pddf.phi0[700] * pddf.grid_step == pytest.approx(0.6, abs=1e-12)

    def test_capacity_factor_matches_direct_sum(self):
        rng = np.random.default_rng(17)
        state, m, power = random_reports(rng, 1000, CFG1000)
        reports = [PowerStateVector(int(s), int(i), float(p))
                   for s, i, p in zip(state, m, power)]
        pddf = build_pddf(reports, CFG1000)
        direct = (state * power).sum() / power.sum()
        assert abs(capacity_factor(pddf) - direct) <= 1e-12

    def test_array_and_report_paths_agree(self):
        rng = np.random.default_rng(23)
        state, m, power = random_reports(rng, 200, CFG8)
        reports = [PowerStateVector(int(s), int(i), float(p))
                   for s, i, p in zip(state, m, power)]
        a = build_pddf(reports, CFG8)
        b = build_pddf_from_arrays(state, m, power, CFG8)
        assert np.array_equal(a.phi0, b.phi0)
        assert np.array_equal(a.phi1, b.phi1)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_pddf([], CFG8)
        with pytest.raises(ValueError):
            build_pddf_from_arrays(np.array([], dtype=int), np.array([], dtype=int),
                                   np.array([]), CFG8)

    def test_index_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            build_pddf_from_arrays(np.array([1]), np.array([9]), np.array([4.0]), CFG8)

    def test_normalization_and_nonnegativity(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            n = int(rng.integers(1, 500))
            state, m, power = random_reports(rng, n, CFG1000)
            pddf = build_pddf_from_arrays(state, m, power, CFG1000)
            assert (pddf.phi0 >= 0).all() and (pddf.phi1 >= 0).all()
            assert abs(pddf.total_mass() - 1.0) <= 1e-9


class TestCapacityFactor:
    def test_all_inactive(self):
        pddf = build_pddf([PowerStateVector(0, 100, 4.0)], CFG1000)
        assert capacity_factor(pddf) == 0.0

    def test_all_active(self):
        state = np.ones(50, dtype=int)
        m = np.full(50, 500)
        power = np.linspace(3, 5, 50)
        pddf = build_pddf_from_arrays(state, m, power, CFG1000)
        assert capacity_factor(pddf) == pytest.approx(1.0, abs=1e-12)

    def test_mixed_aggregate_demand(self):
        reports = [PowerStateVector(1, 300, 4.0), PowerStateVector(0, 700, 6.0)]
        pddf = build_pddf(reports, CFG1000)
        phi = capacity_factor(pddf)
        assert phi == pytest.approx(0.4, abs=1e-12)
        assert phi * pddf.installed_capacity == pytest.approx(4.0, abs=1e-12)


class TestCff:
    def test_worked_example(self):
        # masses phi*dtheta laid out on the 9-point grid, dtheta = 0.25
        mass0 = np.array([0.1, 0.1, 0, 0, 0.2, 0, 0, 0, 0])
        mass1 = np.array([0, 0, 0.3, 0, 0, 0.3, 0, 0, 0])
        pddf = PowerDensityPair(phi0=mass0 / 0.25, phi1=mass1 / 0.25,
                                grid_step=0.25, installed_capacity=10.0)
        assert cff(pddf, 4, CFG8) == pytest.approx(0.8, abs=1e-12)

    def test_worked_example_against_unit_simulation(self):
        # five explicit units carrying the same weights, switched per the deadband rule
        state = np.array([0, 0, 0, 1, 1])
        m = np.array([0, 1, 4, 2, 5])
        power = np.array([1.0, 1.0, 2.0, 3.0, 3.0])
        pddf = build_pddf_from_arrays(state, m, power, CFG8)
        for m_s in range(CFG8.ms_min, CFG8.ms_max + 1):
            realized = realized_phi_after_switch(state, m, power, m_s, CFG8)
            assert abs(cff(pddf, m_s, CFG8) - realized) <= 1e-12

    def test_saturated_low_mass(self):
        # all active mass at the bottom of the grid: everything stays on
        pddf = build_pddf([PowerStateVector(1, 0, 4.0)], CFG1000)
        for m_s in (375, 500, 625):
            assert cff(pddf, m_s, CFG1000) == pytest.approx(1.0, abs=1e-12)

    def test_saturated_high_mass(self):
        # all inactive mass at the top: nothing switches on
        pddf = build_pddf([PowerStateVector(0, 1000, 4.0)], CFG1000)
        for m_s in (375, 500, 625):
            assert cff(pddf, m_s, CFG1000) == 0.0

    def test_out_of_range_rejected(self):
        pddf = build_pddf([PowerStateVector(1, 500, 4.0)], CFG1000)
        with pytest.raises(ValueError):
            cff(pddf, 374, CFG1000)
        with pytest.raises(ValueError):
            cff(pddf, 626, CFG1000)

    def test_nondecreasing_in_setpoint_index(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            state, m, power = random_reports(rng, int(rng.integers(1, 300)), CFG8)
            pddf = build_pddf_from_arrays(state, m, power, CFG8)
            values = [cff(pddf, s, CFG8) for s in range(CFG8.ms_min, CFG8.ms_max + 1)]
            assert (np.diff(values) >= 0).all()

    def test_prediction_equals_realization(self):
        rng = np.random.default_rng(37)
        for _ in range(100):
            state, m, power = random_reports(rng, int(rng.integers(1, 400)), CFG8)
            pddf = build_pddf_from_arrays(state, m, power, CFG8)
            m_s = int(rng.integers(CFG8.ms_min, CFG8.ms_max + 1))
            realized = realized_phi_after_switch(state, m, power, m_s, CFG8)
            assert abs(cff(pddf, m_s, CFG8) - realized) <= 1e-12


class TestFeasibleRegion:
    def test_paper_resolution_bounds(self):
        pddf = build_pddf([PowerStateVector(1, 500, 4.0)], CFG1000)
        region = feasible_region(pddf, CFG1000)
        assert (region.ms_min, region.ms_max) == (375, 625)

    def test_uniform_active_mass(self):
        r = CFG1000.resolution
        mass1 = np.full(r + 1, 1.0 / (r + 1))
        pddf = PowerDensityPair(phi0=np.zeros(r + 1), phi1=mass1 / CFG1000.grid_step,
                                grid_step=CFG1000.grid_step, installed_capacity=100.0)
        region = feasible_region(pddf, CFG1000)
        assert region.phi_max - region.phi_min == pytest.approx(250 / (r + 1), abs=1e-12)

    def test_bounds_bracket_every_cff(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            state, m, power = random_reports(rng, 100, CFG8)
            pddf = build_pddf_from_arrays(state, m, power, CFG8)
            region = feasible_region(pddf, CFG8)
            assert region.phi_min <= region.phi_max
            for m_s in range(CFG8.ms_min, CFG8.ms_max + 1):
                assert region.phi_min <= cff(pddf, m_s, CFG8) <= region.phi_max


def exhaustive_setpoint_oracle(pddf, phi_target, cfg):
    """Scan every admissible index; break deviation ties toward R/2."""
    center = cfg.resolution // 2
    best = None
    for m_s in range(cfg.ms_min, cfg.ms_max + 1):
        dev = (phi_target - cff(pddf, m_s, cfg)) ** 2
        key = (dev, abs(m_s - center))
        if best is None or key < best[0]:
            best = (key, m_s)
    return best[1]


class TestSelectSetpoint:
    def test_target_at_center_gives_zero_offset(self):
        rng = np.random.default_rng(43)
        state, m, power = random_reports(rng, 400, CFG1000)
        pddf = build_pddf_from_arrays(state, m, power, CFG1000)
        target = cff(pddf, 500, CFG1000)
        decision = select_setpoint(pddf, target, CFG1000)
        assert decision.ms_star == 500
        assert decision.u == 0.0
        assert decision.phi_predicted == target

    def test_clamping_at_bounds(self):
        # mass in every bin so the CFF is strictly increasing at the bounds
        r = CFG1000.resolution
        state = np.tile([0, 1], r + 1)
        m = np.repeat(np.arange(r + 1), 2)
        power = np.full(2 * (r + 1), 4.0)
        pddf = build_pddf_from_arrays(state, m, power, CFG1000)
        high = select_setpoint(pddf, 2.0, CFG1000)
        assert high.ms_star == high.ms_max == 625
        assert high.u == CFG1000.deadband / 4
        assert high.clamped
        low = select_setpoint(pddf, -1.0, CFG1000)
        assert low.ms_star == low.ms_min == 375
        assert low.u == -CFG1000.deadband / 4

    def test_small_grid_worked_example(self):
        mass0 = np.array([0.1, 0.1, 0, 0, 0.2, 0, 0, 0, 0])
        mass1 = np.array([0, 0, 0.3, 0, 0, 0.3, 0, 0, 0])
        pddf = PowerDensityPair(phi0=mass0 / 0.25, phi1=mass1 / 0.25,
                                grid_step=0.25, installed_capacity=10.0)
        decision = select_setpoint(pddf, 0.75, CFG8)
        # cff is (0.5, 0.8, 0.8) over {3, 4, 5}: tie between 4 and 5 goes to R/2
        assert decision.ms_star == exhaustive_setpoint_oracle(pddf, 0.75, CFG8) == 4

    def test_bisection_matches_exhaustive_scan(self):
        rng = np.random.default_rng(47)
        for trial in range(1000):
            cfg = CFG8 if trial % 2 == 0 else ThermostatConfig(20.0, 1.0, 64)
            n = int(rng.integers(1, 60))
            state, m, power = random_reports(rng, n, cfg)
            pddf = build_pddf_from_arrays(state, m, power, cfg)
            target = float(rng.uniform(-0.2, 1.2))
            decision = select_setpoint(pddf, target, cfg)
            assert decision.ms_star == exhaustive_setpoint_oracle(pddf, target, cfg)
            assert abs(decision.u) <= cfg.deadband / 4
            assert measurement_temperature(decision.ms_star, cfg) == \
                cfg.setpoint + decision.u

    def test_nonfinite_target_rejected(self):
        pddf = build_pddf([PowerStateVector(1, 4, 4.0)], CFG8)
        with pytest.raises(ValueError):
            select_setpoint(pddf, float("nan"), CFG8)


class TestBoundaryCondition:
    def test_random_population_residual(self):
        rng = np.random.default_rng(53)
        state, m, power = random_reports(rng, 1000, CFG1000)
        pddf_before = build_pddf_from_arrays(state, m, power, CFG1000)
        m_s = int(rng.integers(CFG1000.ms_min, CFG1000.ms_max + 1))
        n_new = hysteresis_update(state, m, m_s, CFG1000)
        pddf_after = build_pddf_from_arrays(n_new, m, power, CFG1000)
        assert verify_boundary_condition(pddf_before, m_s, pddf_after, CFG1000) <= 1e-12

    def test_idempotent_zero_offset_with_frozen_temperatures(self):
        rng = np.random.default_rng(59)
        state, m, power = random_reports(rng, 300, CFG1000)
        for _ in range(3):
            pddf_before = build_pddf_from_arrays(state, m, power, CFG1000)
            state = hysteresis_update(state, m, 500, CFG1000)
            pddf_after = build_pddf_from_arrays(state, m, power, CFG1000)
            assert verify_boundary_condition(pddf_before, 500, pddf_after, CFG1000) \
                <= 1e-12

    def test_interior_unit_unaffected(self):
        # strictly inside the hold band for every admissible offset
        state = np.array([1])
        m = np.array([500])
        power = np.array([4.0])
        pddf = build_pddf_from_arrays(state, m, power, CFG1000)
        for m_s in range(CFG1000.ms_min + 126, CFG1000.ms_max - 125):
            n_new = hysteresis_update(state, m, m_s, CFG1000)
            after = build_pddf_from_arrays(n_new, m, power, CFG1000)
            assert capacity_factor(after) == capacity_factor(pddf)

    def test_mismatched_populations_rejected(self):
        a = build_pddf([PowerStateVector(1, 4, 4.0)], CFG8)
        b = build_pddf([PowerStateVector(1, 500, 5.0)], CFG1000)
        with pytest.raises(ValueError):
            verify_boundary_condition(a, 4, b, CFG8)


def test_max_cff_increment_matches_sweep():
    rng = np.random.default_rng(61)
    for _ in range(30):
        state, m, power = random_reports(rng, 200, CFG8)
        pddf = build_pddf_from_arrays(state, m, power, CFG8)
        values = [cff(pddf, s, CFG8) for s in range(CFG8.ms_min, CFG8.ms_max + 1)]
        assert max_cff_increment(pddf, CFG8) == pytest.approx(
            np.max(np.diff(values)), abs=1e-15)


def test_density_invariants_enforced():
    with pytest.raises(ValueError):
        PowerDensityPair(phi0=np.array([-0.1, 0.1]), phi1=np.zeros(2),
                         grid_step=0.25, installed_capacity=1.0)
    with pytest.raises(ValueError):
        PowerDensityPair(phi0=np.zeros(3), phi1=np.zeros(2),
                         grid_step=0.25, installed_capacity=1.0)
    with pytest.raises(ValueError):
        PowerDensityPair(phi0=np.zeros(2), phi1=np.zeros(2),
                         grid_step=0.25, installed_capacity=0.0)
