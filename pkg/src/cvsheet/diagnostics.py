"""Weighted energy, Riccati-type growth check, and planar stability margins."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    TWO_PI,
    bracket_coeffs,
    coeffs_to_samples,
    derivative_coeffs,
    hilbert_coeffs,
    sobolev_norm_coeffs,
)


@dataclass(frozen=True)
class EnergyReport:
    t: float
    energy: float
    y: float
    h_r_norms: tuple[float, float]  # (||phi_x||_{H^r}, ||phi_t||_{H^r})
    margin: float


def margin_samples(c: np.ndarray, mu: float, n: int) -> np.ndarray:
    """``mu - 2 H[phi]_x`` on the grid."""
    return mu - 2.0 * coeffs_to_samples(derivative_coeffs(hilbert_coeffs(c), 1), n)


def energy_coeffs(c0: np.ndarray, c1: np.ndarray, mu: float, r: float) -> float:
    """``||phi_t||_{H^r}^2 + integral (mu - 2 phi~_x) |<d>^r phi_x|^2 dx``.

    The cubic integral is a trapezoid sum on a grid of ``4(K+1)`` points,
    which is exact for the retained band.
    """
    K = (c0.shape[-1] - 1) // 2
    m = 4 * (K + 1)
    g = bracket_coeffs(derivative_coeffs(c0, 1), r)
    w = coeffs_to_samples(derivative_coeffs(hilbert_coeffs(c0), 1), m)
    gs = coeffs_to_samples(g, m)
    weighted = mu * sobolev_norm_coeffs(g, 0) ** 2 - 2.0 * TWO_PI / m * np.sum(w * gs * gs, axis=-1)
    return float(sobolev_norm_coeffs(c1, r) ** 2 + weighted)


def energy(state, mu: float, r: float = 2.0) -> EnergyReport:
    """Energy report for a state with fields ``phi``, ``phi_t`` and time ``t``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    c0, c1 = state.phi.coeffs, state.phi_t.coeffs
    e = energy_coeffs(c0, c1, mu, r)
    norms = (float(sobolev_norm_coeffs(derivative_coeffs(c0, 1), r)), float(sobolev_norm_coeffs(c1, r)))
    margin = float(np.min(margin_samples(c0, mu, state.phi.grid.n_points)))
    return EnergyReport(float(state.t), e, float(np.sqrt(max(e, 0.0))), norms, margin)


# ---------------------------------------------------------------------------
# Riccati check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiReport:
    """Outcome of fitting ``dy/dt <= C y^2`` to a sampled trajectory.

    ``bound`` holds ``y(0) / (1 - C t y(0))`` (``inf`` past the pole) and
    ``checked`` marks the samples inside the window ``1 - C t y(0) >= 1/2``.
    """

    c_hat: float
    holds: bool
    skipped: bool
    reason: str
    t: np.ndarray
    y: np.ndarray
    dydt: np.ndarray
    bound: np.ndarray
    checked: np.ndarray
    bound_ok: np.ndarray


MIN_SAMPLES = 100


def riccati_check(t, y, margin=None, delta: float | None = None, rtol: float = 1e-6) -> RiccatiReport:
    """Fit the smallest ``C`` with ``dy/dt <= C y^2`` at every sample.

    ``dy/dt`` uses centred differences inside and one-sided differences at
    the end points. The check is skipped when the margin drops below
    ``delta`` anywhere.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-D arrays of equal length")
    if t.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {t.size}")
    empty = np.zeros(0)
    if margin is not None and delta is not None and np.min(margin) < delta:
        return RiccatiReport(np.nan, False, True, "margin below delta", t, y, empty, empty, empty, empty)

    dydt = np.gradient(y, t, edge_order=1)
    pos = y > 0
    growth = np.zeros_like(y)
    growth[pos] = dydt[pos] / y[pos] ** 2
    c_hat = float(max(np.max(growth), 0.0))

    y0 = y[0]
    denom = 1.0 - c_hat * (t - t[0]) * y0
    with np.errstate(divide="ignore"):
        bound = np.where(denom > 0, y0 / np.where(denom > 0, denom, 1.0), np.inf)
    checked = denom >= 0.5
    bound_ok = ~checked | (y <= bound * (1.0 + rtol) + 1e-300)
    reason = "zero trajectory" if y0 == 0 and not np.any(y) else ""
    return RiccatiReport(c_hat, bool(np.all(bound_ok)), False, reason, t, y, dydt, bound, checked, bound_ok)


# ---------------------------------------------------------------------------
# planar current-vortex sheet
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanarState:
    """Constant states ``u = (U, 0)``, ``B = (B, 0)`` on each side of the sheet."""

    U_plus: float
    U_minus: float
    B_plus: float
    B_minus: float


def syrovatskii_delta(state: PlanarState) -> float:
    """``(|B+|^2 + |B-|^2)/2 - |U+ - U-|^2/4``; positive means linearly stable."""
    return 0.5 * (state.B_plus**2 + state.B_minus**2) - 0.25 * (state.U_plus - state.U_minus) ** 2


def bifurcation_mu(zeroth: PlanarState, first: PlanarState, tol: float = 1e-9) -> float:
    """First-order coefficient of the margin along ``state0 + eps*state1``.

    Raises
    ------
    ValueError
        If ``zeroth`` is not on the transition manifold ``delta = 0``.
    """
    d0 = syrovatskii_delta(zeroth)
    if abs(d0) > tol:
        raise ValueError(f"zeroth-order state is off the transition manifold: delta = {d0:.6g}")
    return (
        zeroth.B_plus * first.B_plus
        + zeroth.B_minus * first.B_minus
        - 0.5 * (zeroth.U_plus - zeroth.U_minus) * (first.U_plus - first.U_minus)
    )
