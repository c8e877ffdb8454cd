"""Discrete Gevrey-Sobolev norms.

All norms are plain sums over the integer spectrum (matching the Parseval
convention of :mod:`sqgev.spectral`):

* ``H^s`` weight: (1 + |k|^2)^s
* ``H^s_{a,1/alpha}`` weight: (1 + |k|^2)^s * exp(2 a |k|^alpha)
* homogeneous variants replace (1 + |k|^2)^s by |k|^(2s)
* ``X^sigma`` norm: sum_k |k|^sigma exp(w_a |k|^w_alpha) |c(k)|

Weights are accumulated in log space with a scaled summation so that large
analyticity radii raise WeightOverflow instead of silently returning inf.
"""

from dataclasses import dataclass

import numpy as np

from .errors import WeightOverflow

LOG_DBL_MAX = 709.78
_DIRECT_PATH_LIMIT = 600.0


@dataclass(frozen=True)
class GevreyParams:
    """The triple (a, s, alpha) governing every weighted norm.

    a > 0 is the analyticity radius, s > 2 the Sobolev index, and
    alpha in (0, 1/2) the dissipation order; sigma = 1/alpha.
    """

    a: float
    s: float
    alpha: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if not self.s > 2:
            raise ValueError(f"s must be > 2, got {self.s}")
        # (0, 1/2) is the supercritical range of the theory; the critical
        # endpoint 1/2 is admitted so the exact linear-sector checks can run.
        if not 0 < self.alpha <= 0.5:
            raise ValueError(f"alpha must be in (0, 1/2], got {self.alpha}")

    @property
    def sigma(self):
        return 1.0 / self.alpha


@dataclass(frozen=True)
class NormReport:
    """Per-field diagnostics computed in one pass over the spectrum."""

    l2: float
    hs: float
    hs_gevrey: float
    hs_dot_gevrey: float
    x1_weighted: float

    CSV_COLUMNS = ("l2", "hs", "hs_gevrey", "hs_dot_gevrey", "x1_weighted")

    def to_csv_row(self):
        return ",".join(repr(getattr(self, c)) for c in self.CSV_COLUMNS)

    def to_dict(self):
        return {c: getattr(self, c) for c in self.CSV_COLUMNS}


def _log_sq_weight(grid, s, a, alpha, homogeneous):
    kmag = grid.kmag
    safe = np.where(kmag > 0, kmag, 1.0)
    if homogeneous:
        lw = 2.0 * s * np.log(safe)
    else:
        lw = s * np.log1p(kmag * kmag)
    if a != 0.0:
        lw = lw + 2.0 * a * kmag**alpha
    return lw


def _weighted_sum(values, log_weight, active, what):
    """sum(exp(log_weight) * values) over active modes, overflow-checked.

    ``values`` must be nonnegative; returns a finite float or raises
    WeightOverflow.
    """
    sel = active & (values != 0)
    if not np.any(sel):
        return 0.0
    lw = log_weight[sel]
    if np.any(lw > LOG_DBL_MAX):
        k = int(np.argmax(lw))
        raise WeightOverflow(
            f"{what}: weight exponent {lw[k]:.1f} exceeds float range "
            f"on a mode with nonzero coefficient")
    t = lw + np.log(values[sel])
    m = float(np.max(t))
    if m == -np.inf:
        return 0.0
    if m < _DIRECT_PATH_LIMIT:
        total = float(np.sum(np.exp(lw) * values[sel]))
        if np.isfinite(total):
            return total
    log_total = m + np.log(np.sum(np.exp(t - m)))
    if log_total > LOG_DBL_MAX:
        raise WeightOverflow(f"{what}: sum exceeds float range (log={log_total:.1f})")
    return float(np.exp(log_total))


def spectral_norm(theta, s=0.0, a=0.0, alpha=0.5, homogeneous=False):
    """Weighted-l2 norm sqrt(sum w(k) |c(k)|^2) with the H^s_{a,1/alpha} weight.

    a = 0 recovers the plain (homogeneous) Sobolev norm; no validation of the
    Gevrey parameter ranges is done here, see gevrey_norm for that.
    """
    lw = _log_sq_weight(theta.grid, s, a, alpha, homogeneous)
    sq = _weighted_sum(np.abs(theta.coeffs) ** 2, lw, theta.grid.active_mask,
                       "spectral_norm")
    return float(np.sqrt(sq))


def gevrey_norm(theta, p, homogeneous=False):
    """The H^s_{a,1/alpha} norm of a field (homogeneous variant optional)."""
    return spectral_norm(theta, s=p.s, a=p.a, alpha=p.alpha, homogeneous=homogeneous)


def xsigma_norm(theta, sigma_x, weight_a=0.0, weight_alpha=1.0):
    """X^sigma norm sum_k |k|^sigma exp(weight_a |k|^weight_alpha) |c(k)|.

    weight_a = 0 is the plain X^sigma norm; pass weight_a = a*alpha,
    weight_alpha = alpha for the exp(a alpha |D|^alpha)-weighted variant.
    """
    g = theta.grid
    kmag = g.kmag
    safe = np.where(kmag > 0, kmag, 1.0)
    lw = sigma_x * np.log(safe)
    if weight_a != 0.0:
        lw = lw + weight_a * safe**weight_alpha
    return _weighted_sum(np.abs(theta.coeffs), lw, g.active_mask, "xsigma_norm")


def norm_report(theta, p):
    """All NormReport fields from one pass over the spectrum."""
    return NormReport(
        l2=theta.l2_norm(),
        hs=spectral_norm(theta, s=p.s),
        hs_gevrey=gevrey_norm(theta, p),
        hs_dot_gevrey=gevrey_norm(theta, p, homogeneous=True),
        x1_weighted=xsigma_norm(theta, 1.0, weight_a=p.a * p.alpha,
                                weight_alpha=p.alpha),
    )


def bridge_constant(grid, p):
    """Discrete Cauchy-Schwarz constant linking x1_weighted to hs_gevrey.

    C^2 = sum over the active spectrum of
    exp(-2a(1-alpha)|k|^alpha) |k|^2 (1+|k|^2)^(-s),
    so that xsigma_norm(theta, 1, a*alpha, alpha) <= C * gevrey_norm(theta).
    """
    act = grid.active_mask
    kmag = grid.kmag[act]
    c_sq = np.sum(np.exp(-2.0 * p.a * (1.0 - p.alpha) * kmag**p.alpha)
                  * kmag**2 * (1.0 + kmag**2) ** (-p.s))
    return float(np.sqrt(c_sq))
