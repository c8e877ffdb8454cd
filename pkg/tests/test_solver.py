"""Integrator: linear exactness, budget accounting, convergence orders,
the regularized family, and the mild-solution fixed point."""

import math
from dataclasses import replace

import numpy as np
import pytest

from sqgev.errors import Divergence, StabilityViolation, ZeroInitialData
from sqgev.norms import GevreyParams, gevrey_norm, spectral_norm
from sqgev.solver import (SolverConfig, bisect_contraction_horizon,
                          calibrate_existence_constant,
                          existence_time_estimate, fit_decay_exponent,
                          initial_state, kato_compare, linear_symbol,
                          picard_iterate, run, step)
from sqgev.spectral import GridSpec, SpectralField

from conftest import make_random_field


@pytest.fixture
def small_cfg(grid32, params):
    return SolverConfig(grid=grid32, params=params, dt=1e-2, t_end=0.25,
                        output_stride=5)


@pytest.fixture
def small_field(grid32):
    return make_random_field(grid32, seed=5, band=6, amplitude=0.5)


def cos_x1(grid):
    x = 2 * np.pi * np.arange(grid.n) / grid.n
    X1, _ = np.meshgrid(x, x, indexing="ij")
    return SpectralField.from_physical(grid, np.cos(X1))


class TestConfig:
    def test_validation(self, grid32, params):
        with pytest.raises(ValueError):
            SolverConfig(grid=grid32, params=params, kappa=0.0)
        with pytest.raises(ValueError):
            SolverConfig(grid=grid32, params=params, dt=-1.0)
        with pytest.raises(ValueError):
            SolverConfig(grid=grid32, params=params, kato_k=0)

    def test_default_dt_is_cfl_limited(self, grid32, params):
        cfg = SolverConfig(grid=grid32, params=params, t_end=1.0)
        kmax = grid32.dealias_cutoff * math.sqrt(2.0)
        assert cfg.effective_dt == pytest.approx(0.5 / kmax)
        cfg2 = SolverConfig(grid=grid32, params=params, t_end=1.0, cfl=0.25)
        assert cfg2.effective_dt == pytest.approx(0.125 / kmax)

    def test_kato_symbol(self, grid32, params):
        cfg = SolverConfig(grid=grid32, params=params, kato_k=10)
        sym = linear_symbol(cfg)
        base = linear_symbol(replace(cfg, kato_k=None))
        assert np.allclose(sym - base, grid32.kmag**2 / 10.0)


class TestLinearSector:
    def test_exact_exponential_decay(self, grid32):
        # x1-only data: the transport term vanishes identically, so the step
        # reduces to the exact semigroup factor
        p = GevreyParams(a=0.1, s=2.5, alpha=0.5)
        cfg = SolverConfig(grid=grid32, params=p, dt=1e-3, t_end=1.0,
                           output_stride=100)
        res = run(cos_x1(grid32), cfg)
        led = res.state.ledger
        l2_0 = led.l2[0]
        for t, l2 in zip(led.times, led.l2):
            assert abs(l2 - math.exp(-t) * l2_0) < 1e-10
        # every report matches the closed form in every recorded norm
        for i, t in enumerate(led.times):
            factor = math.exp(-t)
            assert led.hs_gevrey[i] == pytest.approx(
                factor * led.hs_gevrey[0], rel=1e-11)

    def test_kappa_scales_decay(self, grid32, params):
        cfg = SolverConfig(grid=grid32, params=params, kappa=3.0, dt=1e-3,
                           t_end=0.5, output_stride=10**9)
        res = run(cos_x1(grid32), cfg)
        led = res.state.ledger
        assert led.l2[-1] == pytest.approx(math.exp(-3.0 * led.times[-1])
                                           * led.l2[0], rel=1e-10)

    def test_zero_field_fixed_point(self, grid32, params):
        cfg = SolverConfig(grid=grid32, params=params, dt=1e-2, t_end=0.1)
        res = run(SpectralField.zero(grid32), cfg)
        assert np.all(res.state.theta.coeffs == 0)


class TestStep:
    def test_preserves_invariants(self, small_cfg, small_field):
        state = initial_state(small_field, small_cfg)
        for _ in range(5):
            state = step(state, small_cfg)
            state.theta.validate()
            assert state.theta.is_band_limited()

    def test_stability_violation(self, grid32, params):
        big = make_random_field(grid32, seed=5, band=6, amplitude=50.0)
        cfg = SolverConfig(grid=grid32, params=params, dt=0.5, t_end=5.0)
        with pytest.raises(StabilityViolation):
            run(big, cfg)

    def test_fourth_order_self_convergence(self, grid32, params, small_field):
        sols = {}
        for dt in (1e-2, 5e-3, 2.5e-3):
            cfg = SolverConfig(grid=grid32, params=params, dt=dt, t_end=0.25,
                               output_stride=10**9)
            sols[dt] = run(small_field, cfg).state.theta
        e_coarse = gevrey_norm(sols[1e-2] - sols[5e-3], params)
        e_fine = gevrey_norm(sols[5e-3] - sols[2.5e-3], params)
        assert 10.0 < e_coarse / e_fine < 24.0


class TestRun:
    def test_t_end_zero_single_report(self, small_cfg, small_field):
        res = run(small_field, replace(small_cfg, t_end=0.0))
        assert len(res.reports) == 1 and res.reports[0][0] == 0.0

    def test_report_stride_and_final(self, small_cfg, small_field):
        res = run(small_field, small_cfg)  # 25 steps, stride 5
        assert res.report_indices == [0, 5, 10, 15, 20, 25]

    def test_l2_budget(self, small_cfg, small_field):
        res = run(small_field, small_cfg)
        led = res.state.ledger
        assert max(abs(b) for b in led.budget_residual) < 1e-6
        assert all(led.diss_accum[i + 1] >= led.diss_accum[i]
                   for i in range(len(led) - 1))
        assert all(led.x1w_sq_accum[i + 1] >= led.x1w_sq_accum[i]
                   for i in range(len(led) - 1))

    def test_budget_fourth_order(self, grid32, params, small_field):
        residuals = {}
        for dt in (4e-3, 2e-3):
            cfg = SolverConfig(grid=grid32, params=params, dt=dt, t_end=0.5,
                               output_stride=10**9)
            led = run(small_field, cfg).state.ledger
            residuals[dt] = max(abs(b) for b in led.budget_residual)
        assert residuals[4e-3] / residuals[2e-3] >= 8.0


class TestExistenceTime:
    def test_formula(self, grid32, params):
        theta = make_random_field(grid32, seed=1)
        norm_sq = gevrey_norm(theta, params) ** 2
        t1 = existence_time_estimate(theta, params, c_cal=1.0)
        assert t1 == pytest.approx(1.0 / norm_sq, rel=1e-12)
        # scaling theta -> 2 theta divides the estimate by 4
        t2 = existence_time_estimate(theta * 2.0, params, c_cal=1.0)
        assert t2 == pytest.approx(t1 / 4.0, rel=1e-12)
        assert existence_time_estimate(theta, params, c_cal=4.0) == \
            pytest.approx(t1 / 4.0, rel=1e-12)

    def test_zero_data(self, grid32, params):
        with pytest.raises(ZeroInitialData):
            existence_time_estimate(SpectralField.zero(grid32), params, 1.0)


class TestKato:
    @pytest.fixture
    def kato_setup(self, grid32, params, small_field):
        cfg = SolverConfig(grid=grid32, params=params, dt=2e-3, t_end=0.2,
                           output_stride=20)
        return small_field, cfg

    def test_deviations_decrease_and_scale(self, kato_setup):
        theta, cfg = kato_setup
        table = kato_compare(theta, cfg, [10, 100, 1000])
        devs = [d for _, d in table]
        assert devs[0] > devs[1] > devs[2] > 0
        # per-decade ratio approximately 10 within a factor 3
        for a, b in zip(devs, devs[1:]):
            assert 10.0 / 3.0 <= a / b <= 30.0
        q = fit_decay_exponent(table)
        assert q > 0

    def test_huge_k_below_dt_floor(self, kato_setup):
        theta, cfg = kato_setup
        base = run(theta, cfg, keep_snapshots=True)
        half = run(theta, replace(cfg, dt=cfg.dt / 2,
                                  output_stride=2 * cfg.output_stride),
                   keep_snapshots=True)
        p = cfg.params
        floor = max(
            spectral_norm(fb - fh, s=p.s - 1, a=p.a, alpha=p.alpha)
            for (_, fb), (_, fh) in zip(base.snapshots, half.snapshots))
        (_, dev), = kato_compare(theta, cfg, [10**14])
        assert dev <= 10.0 * floor


class TestPicard:
    def test_zero_data_fixed_point(self, grid32, params):
        cfg = SolverConfig(grid=grid32, params=params, dt=1e-2, t_end=1.0)
        res = picard_iterate(SpectralField.zero(grid32), cfg, 0.1, 4)
        assert all(d == 0.0 for d in res.distances)

    def test_contraction_at_small_horizon(self, grid32, params, small_field):
        cfg = SolverConfig(grid=grid32, params=params, dt=2e-3, t_end=1.0)
        res = picard_iterate(small_field, cfg, 0.05, 7)
        d = res.distances
        ratios = [d[m + 1] / d[m] for m in range(1, 6)]
        assert max(ratios) <= 0.9

    def test_mild_matches_strong(self, grid32, params, small_field):
        horizon = 0.05
        final = {}
        for dt in (2e-3, 1e-3):
            cfg = SolverConfig(grid=grid32, params=params, dt=dt, t_end=1.0)
            final[dt] = picard_iterate(small_field, cfg, horizon, 8
                                       ).trajectory[-1]
        floor = gevrey_norm(final[2e-3] - final[1e-3], params)
        cfg_run = SolverConfig(grid=grid32, params=params, dt=2e-3,
                               t_end=horizon, output_stride=10**9)
        strong = run(small_field, cfg_run).state.theta
        gap = gevrey_norm(final[2e-3] - strong, params)
        assert gap <= 10.0 * floor

    def test_divergence_detected(self, grid32, params):
        big = make_random_field(grid32, seed=5, band=6, amplitude=40.0)
        cfg = SolverConfig(grid=grid32, params=params, dt=1e-2, t_end=2.0)
        with pytest.raises(Divergence):
            picard_iterate(big, cfg, 2.0, 10)

    def test_bisected_horizon_contracts(self, grid32, params):
        theta = make_random_field(grid32, seed=5, band=6, amplitude=4.0)
        cfg = SolverConfig(grid=grid32, params=params, dt=5e-3, t_end=0.5)
        horizon, res = bisect_contraction_horizon(theta, cfg, t_cap=2.0)
        d = res.distances
        ratios = [d[m + 1] / d[m] for m in range(1, len(d) - 1) if d[m] > 0]
        assert horizon <= 2.0 and max(ratios) <= 0.9

    def test_calibration_constant_positive(self, grid32, params):
        theta = make_random_field(grid32, seed=5, band=6, amplitude=4.0)
        cfg = SolverConfig(grid=grid32, params=params, dt=5e-3, t_end=0.5)
        c = calibrate_existence_constant(theta, cfg, t_cap=2.0)
        assert c > 0

    def test_bisect_handles_fixed_point_data(self, grid32, params):
        # zero and x1-only data are exact fixed points of the mild map
        cfg = SolverConfig(grid=grid32, params=params, dt=1e-2, t_end=0.2)
        horizon, res = bisect_contraction_horizon(
            SpectralField.zero(grid32), cfg, t_cap=0.2)
        assert horizon == 0.2 and res.distances[-1] == 0.0
        horizon, res = bisect_contraction_horizon(cos_x1(grid32), cfg,
                                                  t_cap=0.2)
        assert horizon == 0.2 and res.distances[-1] == 0.0
