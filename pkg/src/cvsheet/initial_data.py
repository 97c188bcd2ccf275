"""Initial-data catalog and seeded random spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .rng import SplitMix64, derive_seed
from .spectral import Grid, PeriodicField, _from_coeffs, derivative_coeffs, sobolev_norm

KINDS = ("single_mode", "multi_mode", "random_band")
VELOCITIES = ("zero", "right", "left", "growing")


ENSEMBLE_BAND = (1, 20)


def ensemble_band(grid: Grid, band: tuple[int, int] | None = None) -> tuple[int, int]:
    """``band`` or :data:`ENSEMBLE_BAND` clipped to the dealiased band of ``grid``."""
    if band is not None:
        return band
    lo, hi = ENSEMBLE_BAND
    return lo, min(hi, grid.dealias_cutoff(2 / 3))


def random_coeff_batch(
    grid: Grid,
    trials: int,
    seed: int = 0,
    decay: float = 2.0,
    band: tuple[int, int] | None = None,
    stream: int = 0,
    fraction: float = 2 / 3,
) -> np.ndarray:
    """Batch of random real zero-mean spectra, shape ``(trials, 2K+1)``.

    Mode ``k`` in ``band`` (default ``[1, fraction*K]``) gets
    ``<k>^-decay * 10^(-2u) * exp(2 pi i v)`` with ``u, v`` uniform, i.e. a
    log-uniform magnitude over two decades below the decay envelope.
    """
    K = grid.max_mode
    lo, hi = band if band is not None else (1, grid.dealias_cutoff(fraction))
    if not 1 <= lo <= hi <= K:
        raise ValueError(f"band [{lo}, {hi}] must satisfy 1 <= k_min <= k_max <= {K}")
    ks = np.arange(lo, hi + 1)
    rng = SplitMix64(derive_seed(seed, stream))
    u = rng.uniform(2 * trials * ks.size).reshape(trials, ks.size, 2)
    mag = (1.0 + ks * ks) ** (-0.5 * decay) * 10.0 ** (-2.0 * u[..., 0])
    pos = mag * np.exp(2j * np.pi * u[..., 1])
    c = np.zeros((trials, 2 * K + 1), dtype=complex)
    c[:, K + ks] = pos
    c[:, K - ks] = np.conj(pos)
    return c


def random_field(grid: Grid, seed: int = 0, decay: float = 2.0, band=None, stream: int = 0) -> PeriodicField:
    return _from_coeffs(grid, random_coeff_batch(grid, 1, seed, decay, band, stream)[0])


@dataclass(frozen=True)
class InitialDataSpec:
    """Catalog entry for ``(phi(0), phi_t(0))``.

    ``velocity`` selects ``phi_t(0)``: ``zero``; ``right``/``left`` for waves
    travelling at speed ``sqrt(mu)`` (``mu > 0``); ``growing`` for the unstable
    linear modes ``phi_t_hat = sqrt(|mu|) |k| phi_hat`` (``mu < 0``).
    """

    kind: str = "single_mode"
    amplitudes: tuple[float, ...] = (0.01,)
    modes: tuple[int, ...] = (1,)
    phases: tuple[float, ...] = (0.0,)
    seed: int = 0
    band: tuple[int, int] = (1, 10)
    decay_exponent: float = 2.0
    velocity: str = "zero"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown initial data kind {self.kind!r}; expected one of {KINDS}")
        if self.velocity not in VELOCITIES:
            raise ValueError(f"unknown velocity {self.velocity!r}; expected one of {VELOCITIES}")
        if any(m <= 0 for m in self.modes):
            raise ValueError("modes must be positive integers")
        if self.kind == "multi_mode" and not (len(self.amplitudes) == len(self.modes)):
            raise ValueError("multi_mode needs one amplitude per mode")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


class InitialData(NamedTuple):
    phi0: PeriodicField
    phi1: PeriodicField

    @property
    def smallness(self) -> float:
        """``||phi0_x||_{H^2}^2 + ||phi1||_{H^2}^2``."""
        return sobolev_norm(self.phi0.derivative(), 2) ** 2 + sobolev_norm(self.phi1, 2) ** 2


def materialize_initial_data(spec: InitialDataSpec, grid: Grid, mu: float | None = None) -> InitialData:
    """Build the zero-mean real pair ``(phi0, phi1)`` on ``grid``.

    Raises
    ------
    ValueError
        If a mode is ``>= K`` or the velocity option does not fit ``mu``.
    """
    K = grid.max_mode
    c = np.zeros(grid.size, dtype=complex)
    if spec.kind == "random_band":
        lo, hi = spec.band
        if hi >= K:
            raise ValueError(f"band upper mode {hi} must be below K = {K}")
        c = random_coeff_batch(grid, 1, spec.seed, spec.decay_exponent, (lo, hi))[0]
        c *= 0.5 * spec.amplitudes[0]
    else:
        modes = spec.modes[:1] if spec.kind == "single_mode" else spec.modes
        amps = spec.amplitudes[: len(modes)]
        phases = tuple(spec.phases) + (0.0,) * (len(modes) - len(spec.phases))
        for a, k, ph in zip(amps, modes, phases):
            if k >= K:
                raise ValueError(f"mode {k} must be below K = {K}")
            # a cos(kx + ph) = (a/2) e^{i ph} e^{ikx} + c.c.
            c[K + k] += 0.5 * a * np.exp(1j * ph)
            c[K - k] += 0.5 * a * np.exp(-1j * ph)

    k = grid.wavenumbers
    if spec.velocity == "zero":
        c1 = np.zeros_like(c)
    elif spec.velocity in ("right", "left"):
        if mu is None or mu <= 0:
            raise ValueError("travelling-wave velocity needs mu > 0")
        speed = np.sqrt(mu) if spec.velocity == "right" else -np.sqrt(mu)
        c1 = -speed * derivative_coeffs(c, 1)
    else:
        if mu is None or mu >= 0:
            raise ValueError("growing-mode velocity needs mu < 0")
        c1 = np.sqrt(-mu) * np.abs(k) * c
    return InitialData(_from_coeffs(grid, c), _from_coeffs(grid, c1))
