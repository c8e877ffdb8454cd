"""Periodic spectral fields on [0, 2pi)^2 and the Fourier-side operators of the
quasi-geostrophic system: fractional |D|^beta multipliers, the Riesz velocity,
and the dealiased transport term.

Conventions (fixed once for the whole package):

* theta(x) = sum_k theta_hat(k) exp(i k.x) with integer wavevectors k.
  Physical samples on the n x n grid are ``ifft2(coeffs) * n**2``.
* All norms downstream are plain sums over k (no 2pi factors), so the
  physical-space mean square equals ``sum_k |theta_hat(k)|**2``.
* Real fields: coeff(-k) = conj(coeff(k)); the Nyquist row/column (|k_i| = n/2)
  is forced to zero so the pairing is unambiguous.
* Mean-zero: coeff(0,0) = 0, which makes |D|^beta total for every beta.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonEvenSymbol, ParseError


@dataclass(frozen=True)
class GridSpec:
    """Square n x n spectral grid on the 2pi-periodic torus."""

    n: int

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n}")

    @property
    def dealias_cutoff(self):
        """Largest retained |k_i| under the 2/3 rule.

        floor((n-1)/3) rather than floor(n/3): for n divisible by 3 the literal
        n/3 cutoff lets quadratic products alias back onto the boundary modes,
        which would spoil the exact L2 cancellation of the transport term.
        """
        return (self.n - 1) // 3

    @property
    def k1(self):
        return _wavenumbers(self.n)[0]

    @property
    def k2(self):
        return _wavenumbers(self.n)[1]

    @property
    def kmag(self):
        return _wavenumbers(self.n)[2]

    @property
    def dealias_mask(self):
        return _masks(self.n)[0]

    @property
    def active_mask(self):
        """Modes allowed to carry coefficients: no mean, no Nyquist."""
        return _masks(self.n)[1]


@lru_cache(maxsize=None)
def _wavenumbers(n):
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    kmag = np.sqrt((k1 * k1 + k2 * k2).astype(np.float64))
    for arr in (k1, k2, kmag):
        arr.setflags(write=False)
    return k1, k2, kmag


@lru_cache(maxsize=None)
def _masks(n):
    k1, k2, _ = _wavenumbers(n)
    cut = (n - 1) // 3
    dealias = (np.abs(k1) <= cut) & (np.abs(k2) <= cut)
    active = (np.abs(k1) != n // 2) & (np.abs(k2) != n // 2)
    active = active & ~((k1 == 0) & (k2 == 0))
    dealias = dealias & active
    for arr in (dealias, active):
        arr.setflags(write=False)
    return dealias, active


def reflect(coeffs):
    """Index map k -> -k in numpy fft layout."""
    return np.roll(coeffs[::-1, ::-1], 1, axis=(0, 1))


def hermitianize(coeffs):
    """Project onto Hermitian-symmetric arrays; output is bitwise symmetric."""
    return 0.5 * (coeffs + np.conj(reflect(coeffs)))


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a real, mean-zero scalar on a GridSpec.

    Instances are immutable: the coefficient array is read-only and every
    operation returns a new field.
    """

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"coefficient shape {c.shape} != grid {self.grid.n}")
        object.__setattr__(self, "coeffs", c)
        c.setflags(write=False)

    @classmethod
    def from_coeffs(cls, grid, coeffs):
        """Build a valid field: masks Nyquist/mean and enforces symmetry."""
        c = np.array(coeffs, dtype=np.complex128)
        c[~grid.active_mask] = 0.0
        c = hermitianize(c)
        c[~grid.active_mask] = 0.0
        return cls(grid, c)

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros((grid.n, grid.n), dtype=np.complex128))

    @classmethod
    def from_physical(cls, grid, values):
        """Sample a real field on the grid x_j = 2pi j / n and transform."""
        values = np.asarray(values, dtype=np.float64)
        c = np.fft.fft2(values) / (grid.n * grid.n)
        return cls.from_coeffs(grid, c)

    def to_physical(self):
        return np.real(np.fft.ifft2(self.coeffs)) * (self.grid.n * self.grid.n)

    def validate(self):
        """Raise AssertionError if any structural invariant is broken."""
        c = self.coeffs
        assert np.all(np.isfinite(c.view(np.float64))), "non-finite coefficient"
        assert np.array_equal(c, np.conj(reflect(c))), "Hermitian symmetry broken"
        assert c[0, 0] == 0, "mean mode not zero"
        assert np.all(c[~self.grid.active_mask] == 0), "Nyquist modes not zero"

    def is_band_limited(self):
        return bool(np.all(self.coeffs[~self.grid.dealias_mask] == 0))

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def truncated(self):
        """Projection onto the dealiased band."""
        c = np.where(self.grid.dealias_mask, self.coeffs, 0.0)
        return SpectralField(self.grid, c)

    def __add__(self, other):
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__


def _check_same_grid(a, b):
    if a.grid.n != b.grid.n:
        raise ValueError(f"grid mismatch: {a.grid.n} vs {b.grid.n}")


@dataclass(frozen=True)
class VelocityField:
    """Divergence-free velocity recovered from the scalar via Riesz transforms."""

    u1: SpectralField
    u2: SpectralField

    def divergence_coeffs(self):
        g = self.u1.grid
        return g.k1 * self.u1.coeffs + g.k2 * self.u2.coeffs


def fractional_symbol(k, beta):
    """|k|^beta with the zero-mode convention |0|^beta = 0 for every beta."""
    k1, k2 = k
    mag_sq = float(k1) * k1 + float(k2) * k2
    if mag_sq == 0.0:
        return 0.0
    return mag_sq ** (beta / 2.0)


def fractional_symbol_array(grid, beta):
    """Vectorized |k|^beta over the whole grid, zero at the origin.

    Computed as (k1^2 + k2^2)^(beta/2) so it agrees with fractional_symbol
    to the last bit.
    """
    mag_sq = (grid.k1 * grid.k1 + grid.k2 * grid.k2).astype(np.float64)
    out = np.zeros_like(mag_sq)
    nz = mag_sq > 0
    out[nz] = mag_sq[nz] ** (beta / 2.0)
    return out


def apply_operator(theta, symbol):
    """Coefficient-wise product with a real, even Fourier multiplier.

    Evenness symbol(k) == symbol(-k) is required so Hermitian symmetry is
    preserved; raises NonEvenSymbol otherwise. The multiplier must be finite
    on every mode carrying a nonzero coefficient.
    """
    symbol = np.asarray(symbol, dtype=np.float64)
    if symbol.shape != theta.coeffs.shape:
        raise ValueError(f"symbol shape {symbol.shape} != field {theta.coeffs.shape}")
    if not np.array_equal(symbol[theta.grid.active_mask],
                          reflect(symbol)[theta.grid.active_mask]):
        raise NonEvenSymbol("multiplier differs between k and -k")
    active = theta.coeffs != 0
    if not np.all(np.isfinite(symbol[active])):
        raise ValueError("multiplier not finite on an active mode")
    c = symbol * theta.coeffs
    c[~theta.grid.active_mask] = 0.0
    c[~active & ~np.isfinite(symbol)] = 0.0
    return SpectralField(theta.grid, c)


def riesz_velocity(theta):
    """u = (-d2 |D|^-1 theta, d1 |D|^-1 theta), built mode by mode.

    Both components share the single rounding of theta_hat/|k|, so the
    spectral divergence k1*u1 + k2*u2 cancels to within one or two ulp per
    mode and |u_hat(k)| = |theta_hat(k)| to a few ulp.
    """
    g = theta.grid
    kmag = g.kmag.copy()
    kmag[0, 0] = 1.0
    m = theta.coeffs / kmag
    m[0, 0] = 0.0
    u1 = -1j * g.k2 * m
    u2 = 1j * g.k1 * m
    return VelocityField(SpectralField(g, u1), SpectralField(g, u2))


def nonlinear_term(theta):
    """Dealiased spectral coefficients of the transport term u_theta . grad(theta).

    The input is first projected onto the dealiased band (a Galerkin
    truncation; a no-op for band-limited fields), so the retained modes of the
    physical-space product are alias-free and the L2 cancellation
    <u.grad(theta), theta> = 0 holds to rounding for every valid input.
    """
    g = theta.grid
    c = np.where(g.dealias_mask, theta.coeffs, 0.0)

    kmag = g.kmag.copy()
    kmag[0, 0] = 1.0
    m = c / kmag
    m[0, 0] = 0.0
    u1 = -1j * g.k2 * m
    u2 = 1j * g.k1 * m
    t1 = 1j * g.k1 * c
    t2 = 1j * g.k2 * c

    scale = g.n * g.n
    prod = (np.real(np.fft.ifft2(u1)) * np.real(np.fft.ifft2(t1))
            + np.real(np.fft.ifft2(u2)) * np.real(np.fft.ifft2(t2))) * scale

    out = np.fft.fft2(prod)
    out = hermitianize(out)
    out[~g.dealias_mask] = 0.0
    return SpectralField(g, out)


FIELD_FILE_MAGIC = "# sqgev spectral field v1"


def save_field(theta, path):
    """Write the canonical half-plane table (k1, k2, re, im).

    Layout: the magic line, ``# n=<n>``, a ``k1,k2,re,im`` header, then one
    row per mode with nonzero coefficient and k2 > 0 or (k2 == 0, k1 >= 0).
    Hermitian completion of the other half-plane is implied.
    """
    g = theta.grid
    half = (g.k2 > 0) | ((g.k2 == 0) & (g.k1 >= 0))
    rows = np.argwhere(half & (theta.coeffs != 0))
    lines = [FIELD_FILE_MAGIC, f"# n={g.n}", "k1,k2,re,im"]
    for i, j in rows:
        k1 = int(g.k1[i, j])
        k2 = int(g.k2[i, j])
        v = theta.coeffs[i, j]
        lines.append(f"{k1},{k2},{float(v.real)!r},{float(v.imag)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path):
    """Read a field table written by save_field and Hermitian-complete it."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FIELD_FILE_MAGIC:
        raise ParseError("missing field-file magic line", line=1)
    n = None
    start = None
    for idx, line in enumerate(lines[1:], start=2):
        if line.startswith("# n="):
            n = int(line[4:])
        elif line == "k1,k2,re,im":
            start = idx + 1
            break
        elif not line.startswith("#"):
            raise ParseError(f"unexpected line before header: {line!r}", line=idx)
    if n is None or start is None:
        raise ParseError("missing n record or column header")
    grid = GridSpec(n)
    c = np.zeros((n, n), dtype=np.complex128)
    for idx, line in enumerate(lines[start - 1:], start=start):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, got {len(parts)}", line=idx)
        try:
            k1, k2 = int(parts[0]), int(parts[1])
            re, im = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise ParseError(str(exc), line=idx) from None
        if not (k2 > 0 or (k2 == 0 and k1 >= 0)):
            raise ParseError(f"mode ({k1},{k2}) outside the canonical half-plane",
                             line=idx)
        if max(abs(k1), abs(k2)) >= n // 2:
            raise ParseError(f"mode ({k1},{k2}) out of range for n={n}", line=idx)
        c[k1 % n, k2 % n] = complex(re, im)
        c[(-k1) % n, (-k2) % n] = complex(re, -im)
    c[0, 0] = 0.0
    return SpectralField(grid, c)
