"""Monitors and probes for the energy, decay, and blow-up theory.

The EnergyLedger accrues the weighted norms and dissipation integrals along a
run; the monitors audit the small-data energy inequality, track decay, and
invert the blow-up envelope. The inequality lab splits into assert-class
probes (pointwise facts that are theorems and must never fail) and
estimation probes (norm inequalities whose constants the analysis does not
pin down; only finiteness and seed stability are asserted).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from .errors import EmptyLedger, InequalityViolated, NonPositiveRemaining
from .norms import NormReport, gevrey_norm


# ---------------------------------------------------------------------------
# Energy ledger


@dataclass
class EnergyLedger:
    """Time series of weighted norms and accumulated dissipation.

    diss_accum and x1w_sq_accum use composite trapezoid on the step grid;
    l2_diss_accum is fed by the integrator's own stage quadrature (see
    solver.step) so the L2 budget residual shrinks at the full order of the
    scheme. Accumulations are compensated (Kahan) to keep the roundoff floor
    below the quadrature error.
    """

    kappa: float
    times: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    hs: list = field(default_factory=list)
    hs_gevrey: list = field(default_factory=list)
    x1_weighted: list = field(default_factory=list)
    hs_gevrey_sq: list = field(default_factory=list)
    diss_accum: list = field(default_factory=list)
    x1w_sq_accum: list = field(default_factory=list)
    l2_diss_accum: list = field(default_factory=list)
    budget_residual: list = field(default_factory=list)

    def __post_init__(self):
        self._prev_diss_gev = 0.0
        self._prev_x1w_sq = 0.0
        self._acc = {"diss": _Kahan(), "x1w": _Kahan(), "l2diss": _Kahan()}

    def append(self, t, report, diss_gev_sq, l2_diss_increment):
        """Record one step; the first call records the initial state and must
        pass l2_diss_increment = 0."""
        if self.times:
            dt = t - self.times[-1]
            self._acc["diss"].add(0.5 * dt * (self._prev_diss_gev + diss_gev_sq))
            x1w_sq = report.x1_weighted**2
            self._acc["x1w"].add(0.5 * dt * (self._prev_x1w_sq + x1w_sq))
            self._acc["l2diss"].add(l2_diss_increment)
        self._prev_diss_gev = diss_gev_sq
        self._prev_x1w_sq = report.x1_weighted**2
        self.times.append(t)
        self.l2.append(report.l2)
        self.hs.append(report.hs)
        self.hs_gevrey.append(report.hs_gevrey)
        self.x1_weighted.append(report.x1_weighted)
        self.hs_gevrey_sq.append(report.hs_gevrey**2)
        self.diss_accum.append(self._acc["diss"].total)
        self.x1w_sq_accum.append(self._acc["x1w"].total)
        self.l2_diss_accum.append(self._acc["l2diss"].total)
        l2_sq0 = self.l2[0] ** 2
        res = self.l2[-1] ** 2 + 2.0 * self.kappa * self.l2_diss_accum[-1] - l2_sq0
        self.budget_residual.append(res / l2_sq0 if l2_sq0 > 0 else 0.0)

    def __len__(self):
        return len(self.times)


class _Kahan:
    """Compensated accumulator."""

    def __init__(self):
        self.total = 0.0
        self._c = 0.0

    def add(self, x):
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


# ---------------------------------------------------------------------------
# Monitors


@dataclass(frozen=True)
class SmallDataCheck:
    ok: bool
    margin: float
    threshold: float
    norm: float


def small_data_check(theta0, p, c_cal):
    """Is the initial Gevrey norm below the global-existence threshold
    1/(2 sqrt(c_cal))? margin is norm/threshold."""
    norm = gevrey_norm(theta0, p)
    threshold = 1.0 / (2.0 * math.sqrt(c_cal))
    return SmallDataCheck(ok=norm < threshold, margin=norm / threshold,
                          threshold=threshold, norm=norm)


def energy_inequality_audit(ledger):
    """Max over t of (E(t) + D(t) - E(0)) / E(0) for the Gevrey energy
    E = hs_gevrey^2 and the accumulated Gevrey dissipation D.

    Nonpositive values mean the small-data energy inequality held; a positive
    value is a finding (expected on large-data runs), not an error.
    """
    if not ledger.times:
        raise EmptyLedger("energy audit needs at least one recorded time")
    e0 = ledger.hs_gevrey_sq[0]
    worst = max(e + d - e0 for e, d in zip(ledger.hs_gevrey_sq, ledger.diss_accum))
    return worst / e0 if e0 > 0 else worst


@dataclass(frozen=True)
class DecayReport:
    crossing_time: float | None
    monotone_tail: bool
    peak_time: float


def decay_report(ledger, eps):
    """First ledger time with hs_gevrey < eps (None if never), plus whether
    the series is non-increasing after its global max (tiny relative upticks
    from rounding are tolerated)."""
    if not ledger.times:
        raise EmptyLedger("decay report needs at least one recorded time")
    series = ledger.hs_gevrey
    crossing = None
    for t, v in zip(ledger.times, series):
        if v < eps:
            crossing = t
            break
    peak = int(np.argmax(series))
    scale = max(series[peak], 1.0)
    monotone = all(series[i + 1] <= series[i] + 1e-12 * scale
                   for i in range(peak, len(series) - 1))
    return DecayReport(crossing_time=crossing, monotone_tail=monotone,
                       peak_time=ledger.times[peak])


@dataclass(frozen=True)
class BlowupEnvelope:
    """Constants of the lower bound c1/(T*-t)^2 * exp(2 a c2 / (T*-t)^(alpha/s))
    that any blowing-up squared Gevrey norm must dominate."""

    c1: float
    c2: float
    a: float
    alpha: float
    s: float

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("envelope constants c1, c2 must be positive")


def _log_envelope(env, remaining):
    return (math.log(env.c1) - 2.0 * math.log(remaining)
            + 2.0 * env.a * env.c2 / remaining ** (env.alpha / env.s))


def blowup_envelope_eval(env, remaining):
    """Envelope value at time-to-blow-up ``remaining``; overflows to inf for
    very small remaining rather than raising."""
    if remaining <= 0:
        raise NonPositiveRemaining(f"remaining must be > 0, got {remaining}")
    lv = _log_envelope(env, remaining)
    if lv > 709.0:
        return math.inf
    return math.exp(lv)


def no_blowup_before(ledger, env, rel_tol=1e-9):
    """Infimum of hypothetical blow-up times T* consistent with the observed
    hs_gevrey^2 series, i.e. with obs(t) >= envelope(T* - t) at every sample.

    Blow-up under the calibrated constants cannot occur before the returned
    time. Returns inf when even arbitrarily late blow-up is inconsistent
    (e.g. an identically small ledger). Computed by bisection; consistency is
    monotone in T*.
    """
    if not ledger.times:
        raise EmptyLedger("envelope inversion needs at least one recorded time")
    ts = np.asarray(ledger.times)
    obs = np.asarray(ledger.hs_gevrey_sq)
    t_max = float(ts[-1])

    def consistent(T):
        rem = T - ts
        if np.any(rem <= 0):
            return False
        log_env = (math.log(env.c1) - 2.0 * np.log(rem)
                   + 2.0 * env.a * env.c2 / rem ** (env.alpha / env.s))
        with np.errstate(divide="ignore"):
            log_obs = np.where(obs > 0, np.log(obs), -np.inf)
        return bool(np.all(log_obs >= log_env))

    span = max(1.0, t_max)
    hi = t_max + span
    while not consistent(hi):
        span *= 2.0
        hi = t_max + span
        if span > 1e18:
            return math.inf
    lo = t_max
    while hi - lo > rel_tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if consistent(mid):
            hi = mid
        else:
            lo = mid
    return hi


def bkm_integral(ledger):
    """Accumulated int ||F(exp(a alpha |D|^alpha) grad theta)||_L1^2 dt; a
    finite value at the end of a run is a regularity indicator."""
    if not ledger.times:
        raise EmptyLedger("bkm integral needs at least one recorded time")
    return ledger.x1w_sq_accum[-1]


@dataclass(frozen=True)
class RunReport:
    """Summary record for one completed run."""

    t_final: float
    initial: NormReport
    final: NormReport
    max_budget_residual: float
    energy_violation: float
    decay: DecayReport | None
    bkm: float
    small_data: SmallDataCheck | None = None
    existence_time: float | None = None
    no_blowup_before_time: float | None = None

    def to_dict(self):
        d = {
            "t_final": self.t_final,
            "initial": self.initial.to_dict(),
            "final": self.final.to_dict(),
            "max_budget_residual": self.max_budget_residual,
            "energy_violation": self.energy_violation,
            "bkm_integral": self.bkm,
        }
        if self.decay is not None:
            d["decay"] = {
                "crossing_time": self.decay.crossing_time,
                "monotone_tail": self.decay.monotone_tail,
                "peak_time": self.decay.peak_time,
            }
        if self.small_data is not None:
            d["small_data"] = {
                "ok": self.small_data.ok,
                "margin": self.small_data.margin,
                "threshold": self.small_data.threshold,
                "norm": self.small_data.norm,
            }
        if self.existence_time is not None:
            d["existence_time_estimate"] = self.existence_time
        if self.no_blowup_before_time is not None:
            d["no_blowup_before"] = self.no_blowup_before_time
        return d


# ---------------------------------------------------------------------------
# Assert-class probe: pointwise facts behind the commutator estimates


@dataclass(frozen=True)
class PointwiseProbeReport:
    samples: int
    seed: int
    alpha_fixed: float | None
    min_slack_power: float
    min_slack_exp: float
    violations: int = 0

    def to_json_entries(self):
        return [
            {"inequality_id": "power_split", "trials": self.samples,
             "violations": self.violations, "min_slack": self.min_slack_power,
             "seed": self.seed},
            {"inequality_id": "exp_triangle", "trials": self.samples,
             "violations": self.violations, "min_slack": self.min_slack_exp,
             "seed": self.seed},
        ]


def pointwise_inequality_probe(samples, alpha=None, a=1.0, seed=0):
    """Probe the two pointwise facts used by the commutator estimates:

    * |xi|^alpha <= max(|xi-eta|, |eta|)^alpha + alpha * min(...)^alpha
    * exp(a|xi|^alpha) <= exp(a|xi-eta|^alpha) exp(a|eta|^alpha)
      (checked in log form, a * (|xi-eta|^alpha + |eta|^alpha - |xi|^alpha) >= 0)

    These are theorems for alpha in (0, 1); any violation beyond floating
    point rounding raises InequalityViolated. Pairs (xi, eta) mix integer grid
    modes and continuum points; alpha is drawn per sample when None.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    half = samples // 2
    xi_int = rng.integers(-64, 65, size=(half, 2)).astype(float)
    eta_int = rng.integers(-64, 65, size=(half, 2)).astype(float)
    rest = samples - half
    scale = np.exp(rng.normal(0.0, 1.5, size=(rest, 1)))
    xi_c = rng.normal(size=(rest, 2)) * scale
    eta_c = rng.normal(size=(rest, 2)) * np.exp(rng.normal(0.0, 1.5, size=(rest, 1)))
    xi = np.vstack([xi_int, xi_c])
    eta = np.vstack([eta_int, eta_c])
    if alpha is None:
        al = rng.uniform(0.005, 0.995, size=samples)
    else:
        if not 0 < alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        al = np.full(samples, float(alpha))

    nxi = np.hypot(xi[:, 0], xi[:, 1])
    neta = np.hypot(eta[:, 0], eta[:, 1])
    ndiff = np.hypot(xi[:, 0] - eta[:, 0], xi[:, 1] - eta[:, 1])
    big = np.maximum(ndiff, neta)
    small = np.minimum(ndiff, neta)

    lhs = nxi**al
    slack_power = big**al + al * small**al - lhs
    slack_exp = a * (ndiff**al + neta**al - lhs)

    guard = -1e-14 * np.maximum(1.0, np.maximum(lhs, big**al))
    bad = (slack_power < guard) | (slack_exp < a * guard)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise InequalityViolated(
            f"pointwise inequality failed at xi={xi[i]}, eta={eta[i]}, "
            f"alpha={al[i]}: slacks {slack_power[i]:.3e}, {slack_exp[i]:.3e}")
    return PointwiseProbeReport(
        samples=samples, seed=seed, alpha_fixed=alpha,
        min_slack_power=float(np.min(slack_power)),
        min_slack_exp=float(np.min(slack_exp)))


# ---------------------------------------------------------------------------
# Exact convolution oracle (independent of the FFT path) and the
# estimation-class product/trilinear ratio probe


def convolve_centered(a, b):
    """Direct (non-FFT) convolution of two centered coefficient arrays.

    Input squares indexed k in [-K, K]^2; output indexed [-2K, 2K]^2. This is
    the O(n^4) oracle the pseudo-spectral nonlinear term is checked against.
    """
    return convolve2d(a, b, mode="full")


def _centered_wavenumbers(half):
    k = np.arange(-half, half + 1)
    return np.meshgrid(k, k, indexing="ij")


def _centered_from_field(theta):
    """Extract the dealiased band of a field into a centered square."""
    g = theta.grid
    cut = g.dealias_cutoff
    idx = np.arange(-cut, cut + 1) % g.n
    return theta.coeffs[np.ix_(idx, idx)], cut


def nonlinear_term_direct(theta):
    """Direct-convolution twin of spectral.nonlinear_term (same truncation
    convention), for cross-checking on small grids."""
    from .spectral import SpectralField

    g = theta.grid
    c, cut = _centered_from_field(theta)
    k1, k2 = _centered_wavenumbers(cut)
    kmag = np.sqrt((k1**2 + k2**2).astype(float))
    kmag[cut, cut] = 1.0
    m = c / kmag
    m[cut, cut] = 0.0
    u1 = -1j * k2 * m
    u2 = 1j * k1 * m
    t1 = 1j * k1 * c
    t2 = 1j * k2 * c
    prod = convolve_centered(u1, t1) + convolve_centered(u2, t2)
    out = np.zeros((g.n, g.n), dtype=np.complex128)
    kk1, kk2 = _centered_wavenumbers(2 * cut)
    keep = (np.abs(kk1) <= cut) & (np.abs(kk2) <= cut)
    out[kk1[keep] % g.n, kk2[keep] % g.n] = prod[keep]
    out[0, 0] = 0.0
    return SpectralField(g, out)


def _centered_sq_weight(kmag, s, a, alpha, homogeneous):
    if homogeneous:
        safe = np.where(kmag > 0, kmag, 1.0)
        w = np.where(kmag > 0, safe ** (2.0 * s), 0.0)
    else:
        w = (1.0 + kmag**2) ** s
    if a != 0.0:
        w = w * np.exp(2.0 * a * kmag**alpha)
    return w


def _centered_norm(c, kmag, s, a, alpha, homogeneous=False):
    w = _centered_sq_weight(kmag, s, a, alpha, homogeneous)
    return float(np.sqrt(np.sum(w * np.abs(c) ** 2)))


def _centered_x1w(c, kmag, a, alpha):
    return float(np.sum(kmag * np.exp(a * alpha * kmag**alpha) * np.abs(c)))


def _random_centered_hermitian(rng, half):
    c = rng.standard_normal((2 * half + 1,) * 2) + 1j * rng.standard_normal(
        (2 * half + 1,) * 2)
    c = 0.5 * (c + np.conj(c[::-1, ::-1]))
    c[half, half] = 0.0
    return c


@dataclass(frozen=True)
class RatioEntry:
    inequality_id: str
    trials: int
    skipped: int
    sup_ratio: float
    seed: int

    def to_json_entry(self):
        return {"inequality_id": self.inequality_id, "trials": self.trials,
                "violations": 0, "sup_ratio": self.sup_ratio,
                "skipped": self.skipped, "seed": self.seed}


def product_ratio_probe(trials, p, band=5, seed=0):
    """Empirical supremum ratios for the algebra-product and transport
    trilinear inequalities, with the bilinear products computed by the exact
    convolution oracle on a small centered spectrum.

    The constants on the right-hand sides are unspecified by the theory, so
    no bound is asserted here; callers check finiteness and seed stability.
    Returns a dict inequality_id -> RatioEntry.
    """
    rng = np.random.default_rng(seed)
    half = band
    k1s, k2s = _centered_wavenumbers(half)
    kmag_s = np.sqrt((k1s**2 + k2s**2).astype(float))
    k1b, k2b = _centered_wavenumbers(2 * half)
    kmag_b = np.sqrt((k1b**2 + k2b**2).astype(float))
    s, a, al = p.s, p.a, p.alpha

    sup = {key: 0.0 for key in
           ("algebra_product", "transport_mixed_symmetric",
            "transport_x1_dissipation", "transport_homogeneous_sq",
            "transport_plain_pair", "transport_dissipation_sq")}
    skipped = {key: 0 for key in sup}

    def transport(theta_c, omega_c):
        kmag_safe = np.where(kmag_s > 0, kmag_s, 1.0)
        m = theta_c / kmag_safe
        m[half, half] = 0.0
        u1 = -1j * k2s * m
        u2 = 1j * k1s * m
        return (convolve_centered(u1, 1j * k1s * omega_c)
                + convolve_centered(u2, 1j * k2s * omega_c))

    def pad(c):
        out = np.zeros_like(kmag_b, dtype=np.complex128)
        out[half:3 * half + 1, half:3 * half + 1] = c
        return out

    w_inner = _centered_sq_weight(kmag_b, s, a, al, homogeneous=False)

    for _ in range(trials):
        th = _random_centered_hermitian(rng, half)
        om = _random_centered_hermitian(rng, half)

        # algebra: ||fg|| <= C ||f|| ||g||
        fg = convolve_centered(th, om)
        nf = _centered_norm(th, kmag_s, s, a, al)
        ng = _centered_norm(om, kmag_s, s, a, al)
        if nf == 0 or ng == 0:
            skipped["algebra_product"] += 1
        else:
            sup["algebra_product"] = max(
                sup["algebra_product"],
                _centered_norm(fg, kmag_b, s, a, al) / (nf * ng))

        n_th = _centered_norm(th, kmag_s, s, a, al)
        n_om = _centered_norm(om, kmag_s, s, a, al)
        nd_th = _centered_norm(th, kmag_s, s, a, al, homogeneous=True)
        d_th = _centered_norm(kmag_s**al * th, kmag_s, s, a, al)
        d_om = _centered_norm(kmag_s**al * om, kmag_s, s, a, al)
        x1_th = _centered_x1w(th, kmag_s, a, al)
        x1_om = _centered_x1w(om, kmag_s, a, al)

        t_om = transport(th, om)
        ip_om = abs(np.sum(w_inner * t_om * np.conj(pad(om))))
        t_th = transport(th, th)
        ip_th = abs(np.sum(w_inner * t_th * np.conj(pad(th))))

        pairs = (
            ("transport_mixed_symmetric", ip_om,
             (x1_th * d_om + d_th * x1_om) * n_om),
            ("transport_x1_dissipation", ip_th, x1_th * d_th * n_th),
            ("transport_homogeneous_sq", ip_th, d_th * nd_th**2),
            ("transport_plain_pair", ip_om, n_th * d_om * n_om),
            ("transport_dissipation_sq", ip_th, n_th * d_th**2),
        )
        for key, num, den in pairs:
            if den == 0:
                skipped[key] += 1
            else:
                sup[key] = max(sup[key], num / den)

    return {key: RatioEntry(inequality_id=key, trials=trials,
                            skipped=skipped[key], sup_ratio=sup[key], seed=seed)
            for key in sup}
