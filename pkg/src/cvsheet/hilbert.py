"""Periodic Hilbert transform, its commutators, and identity/estimate checks."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .spectral import (
    TWO_PI,
    Grid,
    PeriodicField,
    _from_coeffs,
    _same_grid,
    bracket_coeffs,
    coeffs_to_samples,
    derivative_coeffs,
    hilbert_coeffs,
    product_coeffs,
    product_coeffs_exact,
    sobolev_norm_coeffs,
)


def hilbert(field: PeriodicField) -> PeriodicField:
    """``H[f]`` with symbol ``-i sgn k`` (``sgn 0 = 0``)."""
    return _from_coeffs(field.grid, hilbert_coeffs(field.coeffs))


def _l2(c: np.ndarray) -> np.ndarray:
    return sobolev_norm_coeffs(c, 0.0)


def hilbert_squared_check(field: PeriodicField) -> float:
    """L2 norm of ``H^2[f] + f - f_hat(0)``."""
    c = field.coeffs
    K = field.grid.max_mode
    resid = hilbert_coeffs(hilbert_coeffs(c)) + c
    resid[K] -= c[K]
    return float(_l2(resid))


# ---------------------------------------------------------------------------
# commutators
# ---------------------------------------------------------------------------

def commutator_h_coeffs(v: np.ndarray, u: np.ndarray, n: int, fraction: float | None = 2 / 3) -> np.ndarray:
    """Coefficients of ``[H; v]u = H[v u] - v H[u]``.

    ``fraction=None`` selects the alias-free padded product.
    """
    if fraction is None:
        vu = product_coeffs_exact(v, u)
        vhu = product_coeffs_exact(v, hilbert_coeffs(u))
    else:
        vu = product_coeffs(v, u, n, fraction)
        vhu = product_coeffs(v, hilbert_coeffs(u), n, fraction)
    return hilbert_coeffs(vu) - vhu


def commutator_h_spectral_coeffs(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Direct sum ``-sum_l i (sgn k - sgn l) v_hat(k-l) u_hat(l)``, ``|k| <= K``."""
    K = (v.shape[-1] - 1) // 2
    k = np.arange(-K, K + 1)
    out = np.zeros(2 * K + 1, dtype=complex)
    for i, kk in enumerate(k):
        # l ranges over modes with |k - l| <= K
        lo, hi = max(-K, kk - K), min(K, kk + K)
        ls = np.arange(lo, hi + 1)
        w = np.sign(kk) - np.sign(ls)
        out[i] = -1j * np.sum(w * v[kk - ls + K] * u[ls + K])
    return out


def commutator_h(v: PeriodicField, f: PeriodicField, p: int = 0, fraction: float | None = 2 / 3) -> PeriodicField:
    """``[H; v] d_x^p f``, with products dealiased at ``fraction``.

    Pass ``fraction=None`` for the exact zero-padded products.
    """
    grid = _same_grid(v, f)
    u = derivative_coeffs(f.coeffs, p)
    return _from_coeffs(grid, commutator_h_coeffs(v.coeffs, u, grid.n_points, fraction))


def commutator_h_spectral(v: PeriodicField, f: PeriodicField, p: int = 0) -> PeriodicField:
    """Same operator evaluated by the explicit convolution sum."""
    grid = _same_grid(v, f)
    u = derivative_coeffs(f.coeffs, p)
    return _from_coeffs(grid, commutator_h_spectral_coeffs(v.coeffs, u))


@dataclass(frozen=True)
class CommutatorOp:
    """The operator ``f -> [H; v] d_x^p f`` for a fixed modulating field."""

    modulating_field: PeriodicField
    derivative_order: int = 0

    def __post_init__(self):
        if self.derivative_order < 0:
            raise ValueError("derivative_order must be nonnegative")

    def __call__(self, f: PeriodicField, fraction: float | None = 2 / 3) -> PeriodicField:
        return commutator_h(self.modulating_field, f, self.derivative_order, fraction)


def bracket_commutator_coeffs(v: np.ndarray, f: np.ndarray, r: float, n: int, fraction: float | None = 2 / 3) -> np.ndarray:
    """Coefficients of ``[<d_x>^r; v] f = <d_x>^r (v f) - v <d_x>^r f``."""
    if fraction is None:
        vf = product_coeffs_exact(v, f)
        vbf = product_coeffs_exact(v, bracket_coeffs(f, r))
    else:
        vf = product_coeffs(v, f, n, fraction)
        vbf = product_coeffs(v, bracket_coeffs(f, r), n, fraction)
    return bracket_coeffs(vf, r) - vbf


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------

def product_identity_check(f: PeriodicField, g: PeriodicField, fraction: float | None = None) -> float:
    """L2 residual of ``H[fg - H[f]H[g]] - (f H[g] + H[f] g)``.

    Products are alias-free by default; the identity is then exact on the
    retained modes whenever ``f`` and ``g`` are band-limited to ``K/2``.
    """
    grid = _same_grid(f, g)
    mul = (lambda a, b: product_coeffs_exact(a, b)) if fraction is None else (
        lambda a, b: product_coeffs(a, b, grid.n_points, fraction)
    )
    a, b = f.coeffs, g.coeffs
    ha, hb = hilbert_coeffs(a), hilbert_coeffs(b)
    lhs = hilbert_coeffs(mul(a, b) - mul(ha, hb))
    rhs = mul(a, hb) + mul(ha, b)
    return float(_l2(lhs - rhs))


def _trapezoid_inner(a: np.ndarray, b: np.ndarray, n: int) -> float:
    """Grid quadrature of ``a * b`` on a padded grid (exact for the retained modes)."""
    K = (a.shape[-1] - 1) // 2
    m = max(n, 2 * (K + 1)) * 2
    ua, ub = coeffs_to_samples(a, m), coeffs_to_samples(b, m)
    return float(TWO_PI / m * np.sum(ua * ub))


def adjoint_check(f: PeriodicField, g: PeriodicField) -> float:
    """``|(H f, g) + (f, H g)|`` with inner products by quadrature."""
    grid = _same_grid(f, g)
    n = grid.n_points
    a, b = f.coeffs, g.coeffs
    return abs(_trapezoid_inner(hilbert_coeffs(a), b, n) + _trapezoid_inner(a, hilbert_coeffs(b), n))


def commutator_self_adjoint_check(h: PeriodicField, f: PeriodicField, g: PeriodicField) -> float:
    """``|([h; H] f, g) - (f, [h; H] g)|``, products alias-free."""
    grid = _same_grid(h, f, g)
    n = grid.n_points
    # [h; H] = -[H; h]
    cf = -commutator_h_coeffs(h.coeffs, f.coeffs, n, None)
    cg = -commutator_h_coeffs(h.coeffs, g.coeffs, n, None)
    return abs(_trapezoid_inner(cf, g.coeffs, n) - _trapezoid_inner(f.coeffs, cg, n))


# ---------------------------------------------------------------------------
# empirical commutator constants
# ---------------------------------------------------------------------------

ESTIMATES = ("commutator_l2", "commutator_dx_l2", "commutator_dp_h1", "commutator_dp_l2", "bracket_r")

REPORT_HEADER = ("lemma", "sigma", "p", "n_points", "trials", "max_ratio", "mean_ratio")


@dataclass(frozen=True)
class EstimateRow:
    lemma: str
    sigma: float
    p: int
    n_points: int
    trials: int
    max_ratio: float
    mean_ratio: float

    def as_tuple(self):
        return (self.lemma, self.sigma, self.p, self.n_points, self.trials, self.max_ratio, self.mean_ratio)


def _ratios(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    keep = den > 0
    return num[keep] / den[keep]


def commutator_ratios(lemma: str, v: np.ndarray, f: np.ndarray, n: int, sigma: float, p: int) -> np.ndarray:
    """Per-trial ratio of left side to the bracketed right side of an estimate.

    ``v`` and ``f`` are coefficient batches of shape ``(trials, 2K+1)``;
    products use the 2/3 rule, so inputs should be band-limited to it.
    Trials with a vanishing right side (e.g. all-zero members) are dropped.

    ============  =====================================================================
    ``commutator_l2``      ``||[H;v] f||_L2 / (||v||_{H^s} ||f||_L2)``, s > 1/2
    ``commutator_dx_l2``      ``||[H;v] f_x||_L2 / (||v_x||_{H^s} ||f||_L2)``, s > 1/2
    ``commutator_dp_h1``      ``||[H;v] d^p f||_{H^s} / (||d^p v||_{H^s} ||f||_{H^1})``
    ``commutator_dp_l2``      ``||[H;v] d^p f||_{H^s} / (||d^p v||_{H^{s+1}} ||f||_L2)``
    ``bracket_r``        ``||[<d>^r; v] f||_L2 / (||v||_{H^r}||f||_{H^1} + ||v_x||_{H^1}||f||_{H^{r-1}})``
    ============  =====================================================================
    """
    norm = sobolev_norm_coeffs
    if lemma == "commutator_l2":
        if sigma <= 0.5:
            raise ValueError("L2 commutator estimates need sigma > 1/2")
        num = norm(commutator_h_coeffs(v, f, n), 0)
        den = norm(v, sigma) * norm(f, 0)
    elif lemma == "commutator_dx_l2":
        if sigma <= 0.5:
            raise ValueError("L2 commutator estimates need sigma > 1/2")
        num = norm(commutator_h_coeffs(v, derivative_coeffs(f, 1), n), 0)
        den = norm(derivative_coeffs(v, 1), sigma) * norm(f, 0)
    elif lemma in ("commutator_dp_h1", "commutator_dp_l2"):
        if sigma < 0 or p < 0:
            raise ValueError("derivative commutator estimates need sigma >= 0 and p >= 0")
        num = norm(commutator_h_coeffs(v, derivative_coeffs(f, p), n), sigma)
        dpv = derivative_coeffs(v, p)
        if lemma == "commutator_dp_h1":
            den = norm(dpv, sigma) * norm(f, 1)
        else:
            den = norm(dpv, sigma + 1) * norm(f, 0)
    elif lemma == "bracket_r":
        r = sigma
        if r < 1:
            raise ValueError("bracket estimate needs r >= 1")
        num = norm(bracket_commutator_coeffs(v, f, r, n), 0)
        den = norm(v, r) * norm(f, 1) + norm(derivative_coeffs(v, 1), 1) * norm(f, r - 1)
    else:
        raise ValueError(f"unknown estimate {lemma!r}; expected one of {ESTIMATES}")
    return _ratios(num, den)


def commutator_estimate_report(
    trials: int,
    sigma: float,
    p: int = 0,
    lemma: str = "commutator_dp_h1",
    n_points: int = 128,
    seed: int = 0,
    decay: float = 2.0,
    band: tuple[int, int] | None = None,
) -> EstimateRow:
    """Max and mean of the ratio over a seeded random ensemble.

    The ensemble draws ``v`` and ``f`` independently from
    :func:`cvsheet.initial_data.random_coeff_batch`. The default band is
    ``[1, 20]`` (clipped to the dealiased band on coarse grids), so the same
    seed gives the same functions on every grid with ``n >= 64``.
    """
    from .initial_data import ensemble_band, random_coeff_batch

    grid = Grid(n_points)
    band = ensemble_band(grid, band)
    v = random_coeff_batch(grid, trials, seed=seed, decay=decay, band=band, stream=1)
    f = random_coeff_batch(grid, trials, seed=seed, decay=decay, band=band, stream=2)
    ratios = commutator_ratios(lemma, v, f, n_points, sigma, p)
    if ratios.size == 0:
        raise ValueError("degenerate ensemble: every member has a vanishing right-hand side")
    return EstimateRow(lemma, sigma, p, n_points, int(ratios.size), float(ratios.max()), float(ratios.mean()))


def report_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for row in rows:
        w.writerow(row.as_tuple())
    return buf.getvalue()
