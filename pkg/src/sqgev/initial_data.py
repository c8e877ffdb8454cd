"""Deterministic initial-data generators.

All kinds produce mean-zero, Hermitian fields supported inside the dealiased
band (band-limited data lies in every Gevrey class, so any of these is
admissible initial data for the weighted-norm theory).

amplitude semantics: for the deterministic kinds (single_mode, two_mode) it
multiplies the cosine profile; for the seeded kinds (x1_profile, random_band)
the field is rescaled so its l2 norm equals |amplitude|, which makes
amplitude sweeps and threshold bisections well defined.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BandOutOfRange
from .spectral import SpectralField

KINDS = ("single_mode", "x1_profile", "random_band", "two_mode")


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str
    amplitude: float = 1.0
    band: tuple = (1, 4)
    mode: tuple = (1, 0)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


def _check_band(band, cut):
    lo, hi = band
    if not (1 <= lo <= hi):
        raise BandOutOfRange(f"band ({lo}, {hi}) must satisfy 1 <= lo <= hi")
    if hi > cut:
        raise BandOutOfRange(
            f"band ({lo}, {hi}) exceeds the dealiased region |k| <= {cut}")


def generate_initial_data(spec, grid):
    """Realize the spec on the grid; deterministic for a given seed."""
    n = grid.n
    cut = grid.dealias_cutoff
    c = np.zeros((n, n), dtype=np.complex128)

    if spec.kind == "single_mode":
        m1, m2 = spec.mode
        if (m1, m2) == (0, 0) or max(abs(m1), abs(m2)) > cut:
            raise BandOutOfRange(
                f"mode ({m1}, {m2}) outside the dealiased region |k| <= {cut}")
        c[m1 % n, m2 % n] = 0.5 * spec.amplitude
        c[(-m1) % n, (-m2) % n] = 0.5 * spec.amplitude
        return SpectralField(grid, c)

    if spec.kind == "two_mode":
        p, q = spec.band
        _check_band((min(p, q), max(p, q)), cut)
        c[p % n, 0] = 0.5 * spec.amplitude
        c[(-p) % n, 0] = 0.5 * spec.amplitude
        c[0, q % n] = 0.5 * spec.amplitude
        c[0, (-q) % n] = 0.5 * spec.amplitude
        return SpectralField(grid, c)

    lo, hi = spec.band
    _check_band(spec.band, cut)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "x1_profile":
        for k in range(lo, hi + 1):
            z = complex(rng.standard_normal(), rng.standard_normal())
            c[k % n, 0] = z
            c[(-k) % n, 0] = np.conj(z)
    else:  # random_band
        k1, k2 = grid.k1, grid.k2
        sup = np.maximum(np.abs(k1), np.abs(k2))
        mask = (sup >= lo) & (sup <= hi)
        z = rng.standard_normal(int(mask.sum())) + 1j * rng.standard_normal(
            int(mask.sum()))
        c[mask] = z
        from .spectral import hermitianize

        c = hermitianize(c)
        c[~grid.active_mask] = 0.0
    field = SpectralField(grid, c)
    norm = field.l2_norm()
    if norm > 0:
        field = field * (abs(spec.amplitude) / norm)
    return field
