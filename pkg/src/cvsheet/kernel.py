"""The quadratic term ``Q[phi]`` and its frequency-space kernel.

``Q[phi] = -3 [H; phi~_x] phi~_xx - [H; phi~] phi~_xxx`` with ``phi~ = H[phi]``.
On the Fourier side ``Q_hat(k) = sum_l L(k-l, l) phi_hat(k-l) phi_hat(l)``
with the symmetric kernel ``L = lambda_sym`` below, which vanishes unless the
two frequencies have opposite signs. Three evaluations are provided:

* :func:`q_spectral` - the reduced one-sided sum over ``l > k`` mirrored to
  ``k < 0`` by conjugation, with the ``k = 0`` coefficient treated apart;
* :func:`q_commutator` - FFT products in physical space (the fast path);
* :func:`q_from_flux` - reconstruction from the conservative flux form of
  the equation.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .hilbert import commutator_h_coeffs
from .spectral import (
    Grid,
    PeriodicField,
    _from_coeffs,
    derivative_coeffs,
    hilbert_coeffs,
    product_coeffs,
    product_coeffs_exact,
    sobolev_norm_coeffs,
)

# relative |phi_hat(0)| accepted as zero mean
ZERO_MEAN_TOL = 1e-12


class Region(str, Enum):
    F_I = "F_I"
    F_II = "F_II"
    F_III = "F_III"
    F_IV = "F_IV"
    ZERO = "ZERO"


def _sgn(a: int) -> int:
    return (a > 0) - (a < 0)


def kernel_lambda_int(m: int, l: int) -> int:
    """``-(sgn(m+l) - sgn l) l^2 (3m + l) sgn m sgn l`` in exact integers."""
    return -(_sgn(m + l) - _sgn(l)) * l * l * (3 * m + l) * _sgn(m) * _sgn(l)


def kernel_lambda(m: int, l: int) -> float:
    return float(kernel_lambda_int(m, l))


def kernel_lambda_sym_int(m: int, l: int) -> int:
    twice = kernel_lambda_int(m, l) + kernel_lambda_int(l, m)
    if twice % 2:
        raise ArithmeticError(f"odd symmetrised kernel at ({m}, {l})")
    return twice // 2


def kernel_lambda_sym(m: int, l: int) -> float:
    return float(kernel_lambda_sym_int(m, l))


def region_classify(m: int, l: int) -> Region:
    if m * l >= 0:
        return Region.ZERO
    if m < 0:
        return Region.F_I if m + l > 0 else Region.F_II
    return Region.F_IV if m + l > 0 else Region.F_III


@dataclass(frozen=True)
class KernelPoint:
    m: int
    l: int
    region: Region
    lambda_: float
    lambda_sym: float

    @classmethod
    def at(cls, m: int, l: int) -> "KernelPoint":
        return cls(m, l, region_classify(m, l), kernel_lambda(m, l), kernel_lambda_sym(m, l))


# vectorised integer versions, int64 throughout

def kernel_lambda_array(m: np.ndarray, l: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    l = np.asarray(l, dtype=np.int64)
    return -(np.sign(m + l) - np.sign(l)) * l * l * (3 * m + l) * np.sign(m) * np.sign(l)


def kernel_lambda_sym_array(m: np.ndarray, l: np.ndarray) -> np.ndarray:
    twice = kernel_lambda_array(m, l) + kernel_lambda_array(l, m)
    if np.any(twice % 2):
        raise ArithmeticError("odd symmetrised kernel value")
    return twice // 2


def region_array(m: np.ndarray, l: np.ndarray) -> np.ndarray:
    """Region codes: 0 = ZERO, 1..4 = F_I..F_IV."""
    m = np.asarray(m)
    l = np.asarray(l)
    code = np.zeros(np.broadcast(m, l).shape, dtype=np.int8)
    opp = m * l < 0
    code[opp & (m < 0) & (m + l > 0)] = 1
    code[opp & (m < 0) & (m + l <= 0)] = 2
    code[opp & (m > 0) & (m + l <= 0)] = 3
    code[opp & (m > 0) & (m + l > 0)] = 4
    return code


_REGION_BY_CODE = (Region.ZERO, Region.F_I, Region.F_II, Region.F_III, Region.F_IV)


def kernel_dump_csv(m_range: tuple[int, int], l_range: tuple[int, int]) -> str:
    """Rows ``m,l,region,lambda,lambda_sym`` for inclusive ranges."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("m", "l", "region", "lambda", "lambda_sym"))
    for m in range(m_range[0], m_range[1] + 1):
        for l in range(l_range[0], l_range[1] + 1):
            w.writerow((m, l, region_classify(m, l).value, kernel_lambda_int(m, l), kernel_lambda_sym_int(m, l)))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Q[phi]
# ---------------------------------------------------------------------------

def _require_zero_mean(c: np.ndarray) -> None:
    K = (c.shape[-1] - 1) // 2
    scale = max(float(np.max(np.abs(c), initial=0.0)), 1e-300)
    if np.max(np.abs(c[..., K]), initial=0.0) > ZERO_MEAN_TOL * scale:
        raise ValueError("Q[phi] is defined here for zero-mean fields only")


def q_spectral_coeffs(c: np.ndarray) -> np.ndarray:
    """One-sided kernel sum; accepts batches of shape ``(..., 2K+1)``.

    ``Q_hat(k) = 2 sum_{k < l <= K} (k-l)^2 (k+2l) phi_hat(k-l) phi_hat(l)``
    for ``k > 0``, ``Q_hat(-k) = conj(Q_hat(k))`` and
    ``Q_hat(0) = 2 sum_l |l|^3 phi_hat(-l) phi_hat(l)``.
    """
    K = (c.shape[-1] - 1) // 2
    out = np.zeros_like(c, dtype=complex)
    for k in range(1, K):
        ls = np.arange(k + 1, K + 1)
        w = (k - ls) ** 2 * (k + 2 * ls)
        out[..., K + k] = 2.0 * np.sum(w * c[..., K + k - ls] * c[..., K + ls], axis=-1)
    out[..., :K] = np.conj(out[..., : K : -1])
    ls = np.arange(1, K + 1)
    # the l and -l terms are complex conjugates
    out[..., K] = 4.0 * np.sum(ls**3 * np.abs(c[..., K + ls]) ** 2, axis=-1)
    return out


def q_kernel_coeffs(c: np.ndarray) -> np.ndarray:
    """Unreduced two-sided sum ``sum_l L(k-l, l) phi_hat(k-l) phi_hat(l)``.

    O(K^2) oracle for a single coefficient vector.
    """
    K = (c.shape[-1] - 1) // 2
    out = np.zeros(2 * K + 1, dtype=complex)
    for k in range(-K, K + 1):
        ls = np.arange(max(-K, k - K), min(K, k + K) + 1)
        lam = kernel_lambda_sym_array(k - ls, ls).astype(float)
        out[k + K] = np.sum(lam * c[K + k - ls] * c[K + ls])
    return out


def q_commutator_coeffs(c: np.ndarray, n: int, fraction: float | None = 2 / 3) -> np.ndarray:
    ht = hilbert_coeffs(c)
    ht_x = derivative_coeffs(ht, 1)
    ht_xx = derivative_coeffs(ht, 2)
    ht_xxx = derivative_coeffs(ht, 3)
    return -3.0 * commutator_h_coeffs(ht_x, ht_xx, n, fraction) - commutator_h_coeffs(ht, ht_xxx, n, fraction)


def _mul(a, b, n, fraction):
    if fraction is None:
        return product_coeffs_exact(a, b)
    return product_coeffs(a, b, n, fraction)


def flux_rhs_coeffs(c: np.ndarray, n: int, fraction: float | None = 2 / 3) -> np.ndarray:
    """``(1/2 H[phi~^2]_xx + phi~ phi_xx)_x``."""
    ht = hilbert_coeffs(c)
    inner = 0.5 * derivative_coeffs(hilbert_coeffs(_mul(ht, ht, n, fraction)), 2)
    inner = inner + _mul(ht, derivative_coeffs(c, 2), n, fraction)
    return derivative_coeffs(inner, 1)


def strain_term_coeffs(c: np.ndarray, n: int, fraction: float | None = 2 / 3) -> np.ndarray:
    """``-2 phi~_x phi_xx``."""
    ht_x = derivative_coeffs(hilbert_coeffs(c), 1)
    return -2.0 * _mul(ht_x, derivative_coeffs(c, 2), n, fraction)


def q_spectral(field: PeriodicField) -> PeriodicField:
    """``Q[phi]`` from the reduced kernel sum.

    Raises
    ------
    ValueError
        If ``phi`` does not have zero mean.
    """
    _require_zero_mean(field.coeffs)
    return _from_coeffs(field.grid, q_spectral_coeffs(field.coeffs))


def q_commutator(field: PeriodicField, fraction: float | None = 2 / 3) -> PeriodicField:
    """``Q[phi]`` from FFT products; ``fraction=None`` uses padded products."""
    _require_zero_mean(field.coeffs)
    return _from_coeffs(field.grid, q_commutator_coeffs(field.coeffs, field.grid.n_points, fraction))


def flux_rhs(field: PeriodicField, mu: float = 0.0, fraction: float | None = 2 / 3) -> PeriodicField:
    """Right side of ``phi_tt - mu phi_xx = (1/2 H[phi~^2]_xx + phi~ phi_xx)_x``.

    ``mu`` does not enter the flux; it is accepted for signature symmetry with
    :func:`cvsheet.evolution.acceleration`.
    """
    _require_zero_mean(field.coeffs)
    return _from_coeffs(field.grid, flux_rhs_coeffs(field.coeffs, field.grid.n_points, fraction))


def q_from_flux(field: PeriodicField, fraction: float | None = 2 / 3) -> PeriodicField:
    """``Q = -flux - 2 phi~_x phi_xx``, since ``flux = -2 phi~_x phi_xx - Q``."""
    _require_zero_mean(field.coeffs)
    n = field.grid.n_points
    c = field.coeffs
    return _from_coeffs(field.grid, -flux_rhs_coeffs(c, n, fraction) + strain_term_coeffs(c, n, fraction))


def q_bound_ratios(c: np.ndarray, r: float, n: int) -> np.ndarray:
    """``||Q||_{H^r} / (||phi_x||_{H^2} ||phi_x||_{H^r})`` per batch member."""
    q = q_commutator_coeffs(c, n)
    cx = derivative_coeffs(c, 1)
    num = sobolev_norm_coeffs(q, r)
    den = sobolev_norm_coeffs(cx, 2) * sobolev_norm_coeffs(cx, r)
    keep = den > 0
    return num[keep] / den[keep]


@dataclass(frozen=True)
class QBoundRow:
    r: float
    n_points: int
    trials: int
    max_ratio: float
    mean_ratio: float


def q_norm_bound_report(
    trials: int, r: float, n_points: int = 128, seed: int = 0, decay: float = 2.0, band=None
) -> QBoundRow:
    """Empirical constant in ``||Q||_{H^r} <= C ||phi_x||_{H^2} ||phi_x||_{H^r}``.

    The ensemble band defaults as in
    :func:`cvsheet.hilbert.commutator_estimate_report`.
    """
    from .initial_data import ensemble_band, random_coeff_batch

    if r < 0:
        raise ValueError("r must be nonnegative")
    grid = Grid(n_points)
    c = random_coeff_batch(grid, trials, seed=seed, decay=decay, band=ensemble_band(grid, band), stream=3)
    ratios = q_bound_ratios(c, r, n_points)
    if ratios.size == 0:
        raise ValueError("degenerate ensemble")
    return QBoundRow(r, n_points, int(ratios.size), float(ratios.max()), float(ratios.mean()))


def kernel_identity_violations(bound: int) -> dict[str, int]:
    """Count failures of the exact kernel identities over ``|m|, |l| <= bound``.

    Keys: ``symmetry`` (swap of arguments), ``reality`` (joint sign flip),
    ``support`` (vanishing when ``m l >= 0``) and ``f1_closed_form``
    (``m^2 (3l + m)`` on ``F_I``). All arithmetic is int64.
    """
    r = np.arange(-bound, bound + 1, dtype=np.int64)
    m, l = np.meshgrid(r, r, indexing="ij")
    lam = kernel_lambda_sym_array(m, l)
    region = region_array(m, l)
    # lam[i, j] is at (r[i], r[j]); reversing both axes flips both signs
    f1 = region == 1
    return {
        "symmetry": int(np.count_nonzero(lam != lam.T)),
        "reality": int(np.count_nonzero(lam != lam[::-1, ::-1])),
        "support": int(np.count_nonzero(lam[m * l >= 0])),
        "f1_closed_form": int(np.count_nonzero(lam[f1] != (m * m * (3 * l + m))[f1])),
    }
