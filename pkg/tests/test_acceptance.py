"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
(run with ``pytest tests/test_acceptance.py -v -s`` to see them live).

Desk scale unless a criterion states otherwise: n=64, alpha=0.25, s=2.5,
a=0.1, dt=1e-3.

Pinned calibration values. All come from the documented procedure below and
are regenerated with:

    python - <<'PY'
    from sqgev import *
    g = GridSpec(64); p = GevreyParams(a=0.1, s=2.5, alpha=0.25)
    ref = generate_initial_data(InitialDataSpec(kind="random_band",
          amplitude=1.0, band=(1, 4), seed=42), g)
    cfg = SolverConfig(grid=g, params=p, dt=5e-3, t_end=1.0)
    h, _ = bisect_contraction_horizon(ref, cfg, t_start=0.5, t_cap=32.0)
    G = gevrey_norm(ref, p)
    print("C_CAL =", 1.0 / (h * G**2))   # horizon bisection at coarse dt
    print("AMPLITUDE =", 0.5 / (2.0 * (1.0 / (h * G**2))**0.5) / G)
    PY

The small-data amplitude is 0.5x the calibrated global-existence threshold
1/(2 sqrt(C_CAL)) converted to an l2 amplitude through the unit-amplitude
Gevrey norm G of the reference field (seed 42, band 1..4).
"""

import functools
import math

import numpy as np
import pytest

from sqgev.analysis import (BlowupEnvelope, EnergyLedger, bkm_integral,
                            blowup_envelope_eval, decay_report,
                            energy_inequality_audit, no_blowup_before,
                            nonlinear_term_direct, pointwise_inequality_probe,
                            small_data_check)
from sqgev.initial_data import InitialDataSpec, generate_initial_data
from sqgev.norms import GevreyParams, NormReport, gevrey_norm, spectral_norm
from sqgev.solver import (SolverConfig, bisect_contraction_horizon,
                          fit_decay_exponent, kato_compare, picard_iterate,
                          run)
from sqgev.spectral import GridSpec, SpectralField, nonlinear_term, \
    riesz_velocity

from conftest import make_random_field

N = 64
PARAMS = GevreyParams(a=0.1, s=2.5, alpha=0.25)
DT = 1e-3

CAL_SEED = 42
CAL_BAND = (1, 4)
CAL_UNIT_GEVREY = 44.72482626931305    # G at unit l2 amplitude
CAL_C_CAL = 0.0015655065155707778      # from the coarse-dt horizon bisection
CAL_AMPLITUDE = 0.14127454156269628    # 0.5x calibrated threshold amplitude
CAL_T_END = 5.0                        # run horizon fixed by the calibration
CAL_DECAY_CROSSING = 1.093             # pinned regression, t of 0.1x crossing
CAL_PICARD_HORIZON = 0.322265625       # bisected at dt=1e-3, amplitude 1.0


def criterion(num, desc):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"FAIL criterion {num:2d}: {desc}")
                raise
            print(f"PASS criterion {num:2d}: {desc}")
        return wrapper
    return deco


@pytest.fixture(scope="module")
def grid():
    return GridSpec(N)


@pytest.fixture(scope="module")
def small_theta0(grid):
    spec = InitialDataSpec(kind="random_band", amplitude=CAL_AMPLITUDE,
                           band=CAL_BAND, seed=CAL_SEED)
    return generate_initial_data(spec, grid)


@pytest.fixture(scope="module")
def small_run(grid, small_theta0):
    cfg = SolverConfig(grid=grid, params=PARAMS, dt=DT, t_end=CAL_T_END,
                       output_stride=50)
    return run(small_theta0, cfg)


@pytest.fixture(scope="module")
def small_run_half_dt(grid, small_theta0):
    cfg = SolverConfig(grid=grid, params=PARAMS, dt=DT / 2, t_end=CAL_T_END,
                       output_stride=100)
    return run(small_theta0, cfg)


@criterion(1, "exact linear sector: cos(x1) decays as e^-t to 1e-10")
def test_criterion_01_linear_sector(grid):
    p = GevreyParams(a=PARAMS.a, s=PARAMS.s, alpha=0.5)
    x = 2 * np.pi * np.arange(N) / N
    X1, _ = np.meshgrid(x, x, indexing="ij")
    theta0 = SpectralField.from_physical(grid, np.cos(X1))
    cfg = SolverConfig(grid=grid, params=p, dt=DT, t_end=2.0, output_stride=50)
    led = run(theta0, cfg).state.ledger
    worst = max(abs(l2 - math.exp(-t) * led.l2[0])
                for t, l2 in zip(led.times, led.l2))
    assert worst <= 1e-10, f"max deviation {worst:.3e}"


@criterion(2, "transport cancellation <u.grad(theta), theta> = 0 on 100 fields")
def test_criterion_02_cancellation():
    grid = GridSpec(32)
    for seed in range(100):
        theta = make_random_field(grid, seed=seed)
        ip = np.sum(nonlinear_term(theta).coeffs * np.conj(theta.coeffs)).real
        assert abs(ip) <= 1e-12 * theta.l2_norm() ** 2, f"seed {seed}"


@criterion(3, "pseudo-spectral transport matches the O(n^4) convolution oracle")
def test_criterion_03_convolution_oracle():
    seeds = iter(range(1000))
    cases = [(8, 17), (12, 17), (16, 16)]
    for n, count in cases:
        grid = GridSpec(n)
        for _ in range(count):
            theta = make_random_field(grid, seed=next(seeds))
            fast = nonlinear_term(theta).coeffs
            slow = nonlinear_term_direct(theta).coeffs
            scale = np.max(np.abs(slow)) or 1.0
            assert np.max(np.abs(fast - slow)) <= 1e-10 * scale


@criterion(4, "L2 energy budget residual <= 1e-6, shrinking >= 8x per halving")
def test_criterion_04_l2_budget(small_run, small_run_half_dt):
    res_full = max(abs(b) for b in small_run.state.ledger.budget_residual)
    res_half = max(abs(b) for b in small_run_half_dt.state.ledger.budget_residual)
    assert res_full <= 1e-6, f"residual {res_full:.3e}"
    assert res_full / res_half >= 8.0, \
        f"halving shrink {res_full / res_half:.1f}x"


@criterion(5, "Gevrey energy inequality holds with a non-increasing tail")
def test_criterion_05_gevrey_energy(small_run, small_theta0):
    check = small_data_check(small_theta0, PARAMS, CAL_C_CAL)
    assert check.ok and check.margin == pytest.approx(0.5, rel=1e-6)
    violation = energy_inequality_audit(small_run.state.ledger)
    assert violation <= 1e-6, f"violation {violation:.3e}"
    rep = decay_report(small_run.state.ledger,
                       eps=0.1 * small_run.state.ledger.hs_gevrey[0])
    assert rep.monotone_tail


@criterion(6, "decay below 0.1x the initial Gevrey norm before t_end")
def test_criterion_06_decay(small_run):
    led = small_run.state.ledger
    rep = decay_report(led, eps=0.1 * led.hs_gevrey[0])
    assert rep.crossing_time is not None and rep.crossing_time < CAL_T_END
    assert rep.crossing_time == pytest.approx(CAL_DECAY_CROSSING, abs=0.05)


@criterion(7, "pointwise power-split and exponential-triangle facts, 1e6 samples")
def test_criterion_07_pointwise():
    report = pointwise_inequality_probe(1_000_000, alpha=None, a=1.0, seed=0)
    assert report.violations == 0
    assert report.min_slack_power > -1e-14
    assert report.min_slack_exp > -1e-14


@criterion(8, "homogeneous Gevrey norm equals its Taylor series to 1e-8")
def test_criterion_08_series_identity(grid):
    def series(theta, p):
        total, factor = 0.0, 1.0
        for m in range(0, 200):
            if m > 0:
                factor *= 2.0 * p.a / m
            term = factor * spectral_norm(theta, s=p.s + m * p.alpha / 2.0,
                                          homogeneous=True) ** 2
            total += term
            if m > 2 and term < 1e-15 * total:
                break
        return math.sqrt(total)

    for seed, p in ((0, PARAMS), (1, PARAMS),
                    (2, GevreyParams(a=0.4, s=2.5, alpha=0.25)),
                    (3, GevreyParams(a=0.1, s=3.0, alpha=0.4))):
        theta = make_random_field(grid, seed=seed, band=10)
        direct = gevrey_norm(theta, p, homogeneous=True)
        assert direct == pytest.approx(series(theta, p), rel=1e-8)


@criterion(9, "Kato family: deviations decrease; exponent in [0.3, 0.7]")
def test_criterion_09_kato(grid, small_theta0):
    cfg = SolverConfig(grid=grid, params=PARAMS, dt=DT, t_end=0.5,
                       output_stride=50)
    table = kato_compare(small_theta0, cfg, [10, 100, 1000])
    devs = [d for _, d in table]
    print(f"\n    kato deviations: {[f'{d:.4e}' for d in devs]}")
    assert devs[0] > devs[1] > devs[2] > 0, "deviations not strictly decreasing"
    q = fit_decay_exponent(table)
    print(f"    measured exponent {q:.3f} "
          "(dt-floor caveat: both runs share dt, so the time-discretization "
          "error cancels and the measured rate is the sharp one)")
    # The sqrt(1/k) rate is only an upper envelope from the Gronwall bound;
    # band-limited data sits in the regular-perturbation regime where the
    # deviation scales like 1/k, so this window cannot be met on a fixed
    # grid. See the decisions ledger; kept as specified rather than widened.
    assert 0.3 <= q <= 0.7, \
        f"measured exponent {q:.3f} outside [0.3, 0.7] (sharp rate is ~1/k)"


@criterion(10, "Picard contraction at the bisected horizon; mild matches strong")
def test_criterion_10_picard(grid):
    ref = generate_initial_data(
        InitialDataSpec(kind="random_band", amplitude=1.0, band=CAL_BAND,
                        seed=CAL_SEED), grid)
    cfg = SolverConfig(grid=grid, params=PARAMS, dt=DT, t_end=1.0)
    horizon, res = bisect_contraction_horizon(ref, cfg, t_start=0.5, t_cap=1.0)
    assert horizon == pytest.approx(CAL_PICARD_HORIZON, rel=0.25)
    d = res.distances
    ratios = [d[m + 1] / d[m] for m in range(1, 6)]
    assert max(ratios) <= 0.9, f"ratios {ratios}"
    # converged iterate vs the strong solution, on a horizon divisible by
    # both dt and 2 dt so all three trajectories end at the same time
    h = math.floor(horizon / (2 * DT)) * 2 * DT
    pic = picard_iterate(ref, cfg, h, 150, tol=1e-10)
    pic2 = picard_iterate(
        ref, SolverConfig(grid=grid, params=PARAMS, dt=2 * DT, t_end=1.0),
        h, 150, tol=1e-10)
    floor = gevrey_norm(pic.trajectory[-1] - pic2.trajectory[-1], PARAMS)
    strong = run(ref, SolverConfig(grid=grid, params=PARAMS, dt=DT, t_end=h,
                                   output_stride=10**9)).state.theta
    gap = gevrey_norm(pic.trajectory[-1] - strong, PARAMS)
    assert gap <= 10.0 * floor, f"gap {gap:.3e} vs floor {floor:.3e}"


@criterion(11, "blow-up envelope inversion round-trips synthetic ledgers")
def test_criterion_11_envelope_round_trip():
    # genuine finite-time blow-up is NOT claimed (open problem; band-limited
    # Galerkin systems cannot blow up); this checks the monitor's inversion
    env = BlowupEnvelope(c1=1.0, c2=1.0, a=PARAMS.a, alpha=PARAMS.alpha,
                         s=PARAMS.s)
    for t_star in (2.0, 5.0, 11.0):
        led = EnergyLedger(kappa=1.0)
        for t in np.linspace(0.0, t_star - 1.0, 101):
            v = math.sqrt(blowup_envelope_eval(env, t_star - t))
            led.append(float(t), NormReport(l2=v, hs=v, hs_gevrey=v,
                                            hs_dot_gevrey=v, x1_weighted=v),
                       0.0, 0.0)
        t_safe = no_blowup_before(led, env)
        assert t_safe == pytest.approx(t_star, abs=1e-6 * t_star)


@criterion(12, "Riesz velocity is an isometry in L2, H^s, and Gevrey-H^s")
def test_criterion_12_riesz_isometry(grid):
    for seed in range(100):
        theta = make_random_field(grid, seed=seed)
        u = riesz_velocity(theta)
        for kwargs in ({}, {"s": PARAMS.s},
                       {"s": PARAMS.s, "a": PARAMS.a, "alpha": PARAMS.alpha}):
            nu_sq = spectral_norm(u.u1, **kwargs) ** 2 \
                + spectral_norm(u.u2, **kwargs) ** 2
            nt = spectral_norm(theta, **kwargs)
            assert math.sqrt(nu_sq) == pytest.approx(nt, rel=1e-12), \
                f"seed {seed} kwargs {kwargs}"
