"""Periodic fields on the torus R/2piZ and their Fourier-multiplier calculus.

Coefficients follow the ``1/(2*pi)`` convention,

    f_hat(k) = (1/2pi) * integral f(x) exp(-ikx) dx,

so that ``||f||_{L2}^2 = 2pi * sum |f_hat(k)|^2`` and the Sobolev norm is
``||f||_{H^s}^2 = 2pi * sum <k>^{2s} |f_hat(k)|^2`` with ``<k> = sqrt(1 + k^2)``.

A grid of ``n`` points retains the modes ``|k| <= K = n/2 - 1``; the Nyquist
mode is dropped so every retained mode has its Hermitian partner.

Coefficient arrays are stored densely in ascending order ``k = -K..K``
(index ``k + K``) and every array helper acts on the last axis, so batches of
fields can be processed at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi

# relative Hermitian defect tolerated by synthesize()
SYMMETRY_TOL = 1e-10


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class InconsistentSpectrumError(ValueError):
    """A spectrum that cannot come from a real-valued field."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_j = 2*pi*j/n`` on the torus."""

    n_points: int

    def __post_init__(self):
        n = self.n_points
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise TypeError(f"n_points must be an integer, got {n!r}")
        if n < 8 or n % 2:
            raise ValueError(f"n_points must be even and >= 8, got {n}")
        object.__setattr__(self, "n_points", int(n))

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n_points

    @property
    def max_mode(self) -> int:
        return self.n_points // 2 - 1

    @property
    def size(self) -> int:
        """Number of retained modes, ``2K + 1``."""
        return 2 * self.max_mode + 1

    @cached_property
    def x(self) -> np.ndarray:
        x = self.spacing * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = np.arange(-self.max_mode, self.max_mode + 1)
        k.flags.writeable = False
        return k

    def dealias_cutoff(self, fraction: float) -> int:
        """Largest retained ``|k|`` under a cutoff ``fraction * K``."""
        if not 0 < fraction <= 1:
            raise ValueError(f"dealias fraction must lie in (0, 1], got {fraction}")
        return int(np.floor(fraction * self.max_mode + 1e-9))


# ---------------------------------------------------------------------------
# array-level transforms (last axis)
# ---------------------------------------------------------------------------

def _check_size(c: np.ndarray, K: int) -> None:
    if c.shape[-1] != 2 * K + 1:
        raise ValueError(f"expected {2 * K + 1} coefficients, got {c.shape[-1]}")


def samples_to_coeffs(samples: np.ndarray, K: int) -> np.ndarray:
    """Real samples on ``n`` points -> Hermitian coefficients ``k = -K..K``."""
    n = samples.shape[-1]
    half = np.fft.rfft(samples, axis=-1)[..., : K + 1] / n
    neg = np.conj(half[..., :0:-1])
    return np.concatenate([neg, half], axis=-1)


def coeffs_to_samples(c: np.ndarray, n: int) -> np.ndarray:
    """Hermitian coefficients -> real samples on ``n`` points.

    Only the ``k >= 0`` half is read; the caller is responsible for symmetry.
    """
    K = (c.shape[-1] - 1) // 2
    half = np.zeros(c.shape[:-1] + (n // 2 + 1,), dtype=complex)
    half[..., : K + 1] = c[..., K:]
    return np.fft.irfft(half * n, n=n, axis=-1)


def hermitian_defect(c: np.ndarray) -> float:
    """``max |c(-k) - conj c(k)|`` over the retained modes."""
    return float(np.max(np.abs(c - np.conj(c[..., ::-1])), initial=0.0))


def truncate(c: np.ndarray, cutoff: int) -> np.ndarray:
    """Zero every mode with ``|k| > cutoff``."""
    K = (c.shape[-1] - 1) // 2
    out = c.copy()
    if cutoff < K:
        out[..., : K - cutoff] = 0
        out[..., K + cutoff + 1 :] = 0
    return out


def derivative_coeffs(c: np.ndarray, p: int = 1) -> np.ndarray:
    K = (c.shape[-1] - 1) // 2
    k = np.arange(-K, K + 1)
    return c * (1j * k) ** p


def hilbert_coeffs(c: np.ndarray) -> np.ndarray:
    K = (c.shape[-1] - 1) // 2
    k = np.arange(-K, K + 1)
    return c * (-1j * np.sign(k))


def bracket_coeffs(c: np.ndarray, r: float) -> np.ndarray:
    """Apply ``<d_x>^r``, the multiplier with symbol ``(1 + k^2)^(r/2)``."""
    K = (c.shape[-1] - 1) // 2
    k = np.arange(-K, K + 1)
    return c * (1.0 + k * k) ** (0.5 * r)


def sobolev_norm_coeffs(c: np.ndarray, s: float) -> np.ndarray:
    K = (c.shape[-1] - 1) // 2
    k = np.arange(-K, K + 1)
    w = (1.0 + k * k) ** s
    return np.sqrt(TWO_PI * np.sum(w * np.abs(c) ** 2, axis=-1))


def product_coeffs(a: np.ndarray, b: np.ndarray, n: int, fraction: float = 2 / 3) -> np.ndarray:
    """Dealiased pseudo-spectral product.

    Both factors are cut to ``|k| <= fraction*K`` before the grid product and
    the result is cut again; for ``fraction <= 2/3`` the retained modes are
    exactly those of the product of the cut factors.
    """
    K = (a.shape[-1] - 1) // 2
    cutoff = Grid(n).dealias_cutoff(fraction)
    ua = coeffs_to_samples(truncate(a, cutoff), n)
    ub = coeffs_to_samples(truncate(b, cutoff), n)
    return truncate(samples_to_coeffs(ua * ub, K), cutoff)


def product_coeffs_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product projected onto ``|k| <= K`` without aliasing (zero padding)."""
    K = (a.shape[-1] - 1) // 2
    m = 4 * (K + 1)
    ua = coeffs_to_samples(a, m)
    ub = coeffs_to_samples(b, m)
    return samples_to_coeffs(ua * ub, K)


def convolve_coeffs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Direct discrete convolution ``sum_l a(k-l) b(l)`` for ``|k| <= K``.

    O(K^2) reference used to check the FFT products.
    """
    K = (a.shape[-1] - 1) // 2
    full = np.convolve(a, b)  # indices -2K..2K
    return full[K : 3 * K + 1]


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients ``f_hat(k)`` for ``|k| <= K`` in ascending ``k``."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        _check_size(c, self.grid.max_mode)
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def from_modes(cls, grid: Grid, modes: dict[int, complex]) -> "Spectrum":
        c = np.zeros(grid.size, dtype=complex)
        K = grid.max_mode
        for k, v in modes.items():
            if abs(k) > K:
                raise ValueError(f"mode {k} outside retained band |k| <= {K}")
            c[k + K] = v
        return cls(grid, c)

    def __getitem__(self, k: int) -> complex:
        K = self.grid.max_mode
        if abs(k) > K:
            return 0j
        return complex(self.coeffs[k + K])

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.grid.wavenumbers

    def hermitian_defect(self) -> float:
        return hermitian_defect(self.coeffs)

    def to_text(self) -> str:
        """Snapshot format: ``k re im`` per line, ascending ``k``, 17 digits."""
        lines = [
            f"{k:d} {c.real:.17g} {c.imag:.17g}"
            for k, c in zip(self.grid.wavenumbers.tolist(), self.coeffs)
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Spectrum":
        rows = [line.split() for line in text.splitlines() if line.strip()]
        if not rows:
            raise ValueError("empty spectrum snapshot")
        ks = [int(r[0]) for r in rows]
        K = max(abs(k) for k in ks)
        if ks != list(range(-K, K + 1)):
            raise ValueError("snapshot modes must be consecutive and ascending from -K to K")
        c = np.array([complex(float(r[1]), float(r[2])) for r in rows])
        return cls(Grid(2 * K + 2), c)


@dataclass(frozen=True, eq=False)
class PeriodicField:
    """Real samples of a periodic function plus its cached spectrum."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if np.iscomplexobj(s):
            raise TypeError("PeriodicField samples must be real")
        s = s.astype(float)
        if s.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} samples, got shape {s.shape}")
        object.__setattr__(self, "samples", _frozen(s))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray]) -> "PeriodicField":
        return cls(grid, np.broadcast_to(func(grid.x), grid.x.shape))

    @classmethod
    def from_spectrum(cls, spectrum: Spectrum) -> "PeriodicField":
        return synthesize(spectrum)

    @classmethod
    def zeros(cls, grid: Grid) -> "PeriodicField":
        return cls(grid, np.zeros(grid.n_points))

    @cached_property
    def spectrum(self) -> Spectrum:
        return analyze(self)

    @property
    def coeffs(self) -> np.ndarray:
        return self.spectrum.coeffs

    def __add__(self, other: "PeriodicField") -> "PeriodicField":
        _same_grid(self, other)
        return _from_coeffs(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "PeriodicField") -> "PeriodicField":
        _same_grid(self, other)
        return _from_coeffs(self.grid, self.coeffs - other.coeffs)

    def __neg__(self) -> "PeriodicField":
        return _from_coeffs(self.grid, -self.coeffs)

    def __mul__(self, a: float) -> "PeriodicField":
        if isinstance(a, PeriodicField):
            raise TypeError("use multiply() for products of fields")
        return _from_coeffs(self.grid, a * self.coeffs)

    __rmul__ = __mul__

    def derivative(self, p: int = 1) -> "PeriodicField":
        return _from_coeffs(self.grid, derivative_coeffs(self.coeffs, p))

    def norm(self, s: float = 0.0) -> float:
        return sobolev_norm(self, s)


def _same_grid(*fields) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid {f.grid.n_points} != {grid.n_points}")
    return grid


def _from_coeffs(grid: Grid, c: np.ndarray) -> PeriodicField:
    """Build a field whose cached spectrum is exactly ``c`` (assumed Hermitian)."""
    f = PeriodicField(grid, coeffs_to_samples(c, grid.n_points))
    f.__dict__["spectrum"] = Spectrum(grid, c)
    return f


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def analyze(field: PeriodicField) -> Spectrum:
    """Fourier coefficients of the retained modes.

    Raises
    ------
    ValueError
        If a sample is NaN or infinite.
    """
    if not np.all(np.isfinite(field.samples)):
        raise ValueError("cannot analyze a field with non-finite samples")
    return Spectrum(field.grid, samples_to_coeffs(field.samples, field.grid.max_mode))


def synthesize(spectrum: Spectrum) -> PeriodicField:
    """Real field with the given coefficients.

    Raises
    ------
    InconsistentSpectrumError
        If ``f_hat(-k) != conj(f_hat(k))`` beyond ``1e-10`` relative to the
        largest coefficient.
    """
    c = spectrum.coeffs
    scale = float(np.max(np.abs(c), initial=0.0))
    defect = hermitian_defect(c)
    if defect > SYMMETRY_TOL * max(scale, np.finfo(float).tiny):
        raise InconsistentSpectrumError(
            f"Hermitian symmetry violated: defect {defect:.3e} vs scale {scale:.3e}"
        )
    sym = 0.5 * (c + np.conj(c[::-1]))
    field = PeriodicField(spectrum.grid, coeffs_to_samples(sym, spectrum.grid.n_points))
    field.__dict__["spectrum"] = Spectrum(spectrum.grid, sym)
    return field


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """Symbol ``A(k)`` of a Fourier multiplier of order ``order``.

    ``bound`` is the smallest ``C`` with ``<k>^(-order) |A(k)| <= C`` over the
    retained modes.
    """

    grid: Grid
    order: float
    values: np.ndarray
    bound: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        _check_size(v, self.grid.max_mode)
        object.__setattr__(self, "values", _frozen(v))
        k = self.grid.wavenumbers
        weight = (1.0 + k * k) ** (-0.5 * self.order)
        object.__setattr__(self, "bound", float(np.max(weight * np.abs(v))))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray], order: float) -> "MultiplierSymbol":
        return cls(grid, order, np.broadcast_to(func(grid.wavenumbers), grid.wavenumbers.shape))

    @classmethod
    def identity(cls, grid: Grid) -> "MultiplierSymbol":
        return cls.from_function(grid, lambda k: np.ones_like(k), 0)

    @classmethod
    def derivative(cls, grid: Grid, p: int = 1) -> "MultiplierSymbol":
        return cls.from_function(grid, lambda k: (1j * k) ** p, p)

    @classmethod
    def bracket(cls, grid: Grid, r: float) -> "MultiplierSymbol":
        """``<d_x>^r`` with symbol ``<k>^r``."""
        return cls.from_function(grid, lambda k: (1.0 + k * k) ** (0.5 * r), r)

    @classmethod
    def hilbert(cls, grid: Grid) -> "MultiplierSymbol":
        return cls.from_function(grid, lambda k: -1j * np.sign(k), 0)

    def compose(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        if other.grid != self.grid:
            raise GridMismatchError("symbols live on different grids")
        return MultiplierSymbol(self.grid, self.order + other.order, self.values * other.values)

    def __call__(self, field: PeriodicField) -> PeriodicField:
        return apply_multiplier(self, field)


def apply_multiplier(symbol: MultiplierSymbol, field: PeriodicField) -> PeriodicField:
    if symbol.grid != field.grid:
        raise GridMismatchError(
            f"symbol grid {symbol.grid.n_points} != field grid {field.grid.n_points}"
        )
    out = symbol.values * field.coeffs
    if hermitian_defect(out) > SYMMETRY_TOL * max(float(np.max(np.abs(out), initial=0.0)), 1e-300):
        raise InconsistentSpectrumError("symbol does not map real fields to real fields")
    return _from_coeffs(field.grid, out)


def sobolev_norm(field: PeriodicField, s: float) -> float:
    return float(sobolev_norm_coeffs(field.coeffs, s))


def mean(field: PeriodicField) -> float:
    """Spatial average, which equals ``f_hat(0)``."""
    return float(field.coeffs[field.grid.max_mode].real)


def enforce_zero_mean(field: PeriodicField) -> PeriodicField:
    c = field.coeffs.copy()
    c[field.grid.max_mode] = 0
    return _from_coeffs(field.grid, c)


def dealias(spectrum: Spectrum, fraction: float = 2 / 3) -> Spectrum:
    cutoff = spectrum.grid.dealias_cutoff(fraction)
    return Spectrum(spectrum.grid, truncate(spectrum.coeffs, cutoff))


def multiply(f: PeriodicField, g: PeriodicField, fraction: float = 2 / 3) -> PeriodicField:
    """Pointwise product with the cutoff rule of :func:`product_coeffs`."""
    grid = _same_grid(f, g)
    return _from_coeffs(grid, product_coeffs(f.coeffs, g.coeffs, grid.n_points, fraction))


def multiply_exact(f: PeriodicField, g: PeriodicField) -> PeriodicField:
    """Product projected on the retained modes, computed on a padded grid."""
    grid = _same_grid(f, g)
    return _from_coeffs(grid, product_coeffs_exact(f.coeffs, g.coeffs))


def inner_product(f: PeriodicField, g: PeriodicField) -> float:
    """``(f, g)_{L2} = 2pi * sum f_hat(k) conj(g_hat(k))`` for real fields."""
    _same_grid(f, g)
    return float(TWO_PI * np.sum(f.coeffs * np.conj(g.coeffs)).real)


def quadrature(field: PeriodicField) -> float:
    """Trapezoidal integral over one period."""
    return float(field.grid.spacing * np.sum(field.samples))
