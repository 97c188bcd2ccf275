"""Time integration of the amplitude equation.

The second-order equation is integrated in the form

    phi_tt = (mu - 2 phi~_x) phi_xx - Q[phi],    phi~ = H[phi],

as a first-order system for ``(phi, phi_t)`` with the classical four-stage
Runge-Kutta scheme. Two further modes share the machinery: ``first_order``
(``phi_t = -1/2 H[phi~^2]_xx - phi~ phi_xx``) and ``linearized``
(``phi_tt = mu phi_xx``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

import numpy as np

from .diagnostics import energy_coeffs, margin_samples
from .initial_data import InitialDataSpec, materialize_initial_data
from .kernel import _mul, q_commutator_coeffs, strain_term_coeffs
from .spectral import (
    Grid,
    PeriodicField,
    _from_coeffs,
    derivative_coeffs,
    hilbert_coeffs,
    sobolev_norm_coeffs,
)

log = logging.getLogger(__name__)

MODES = ("second_order", "first_order", "linearized")
MODE_ALIASES = {"second": "second_order", "first": "first_order", "linear": "linearized"}

DEFAULT_BLOWUP_FACTOR = 1e6


class BlowupError(RuntimeError):
    """Non-finite values appeared during a step."""


@dataclass(frozen=True)
class SolverState:
    t: float
    phi: PeriodicField
    phi_t: PeriodicField

    @property
    def grid(self) -> Grid:
        return self.phi.grid


@dataclass(frozen=True)
class RunConfig:
    mu: float
    delta: float
    n_points: int
    t_end: float
    dt: float | None = None  # None: chosen from the initial data
    dealias: float = 2 / 3
    mode: str = "second_order"
    blowup_threshold: float | None = None  # None: 1e6 x initial H^3 norm
    initial_data: InitialDataSpec = field(default_factory=InitialDataSpec)
    enforce_stability: bool = True
    halt_on_violation: bool = False
    snapshot_every: int = 0

    def __post_init__(self):
        mode = MODE_ALIASES.get(self.mode, self.mode)
        if mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        Grid(self.n_points)
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.blowup_threshold is not None and not self.blowup_threshold > 0:
            raise ValueError("blowup_threshold must be positive")
        if not 0 < self.dealias <= 1:
            raise ValueError("dealias must lie in (0, 1]")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be nonnegative")
        if self.enforce_stability and mode == "second_order" and not 0 < self.delta < self.mu:
            raise ValueError(f"stable runs need 0 < delta < mu (delta={self.delta}, mu={self.mu})")

    @property
    def grid(self) -> Grid:
        return Grid(self.n_points)


@dataclass(frozen=True)
class StabilityReport:
    """Minimum over the grid of ``mu - 2 H[phi]_x`` and its location."""

    margin: float
    margin_location: int
    violated: bool
    ill_posed: bool


def stability_report(phi: PeriodicField, mu: float, delta: float) -> StabilityReport:
    m = margin_samples(phi.coeffs, mu, phi.grid.n_points)
    j = int(np.argmin(m))
    return StabilityReport(float(m[j]), j, bool(m[j] < delta), bool(m[j] < 0))


# ---------------------------------------------------------------------------
# right-hand sides (coefficient arrays)
# ---------------------------------------------------------------------------

def acceleration_coeffs(c: np.ndarray, mu: float, n: int, fraction: float = 2 / 3) -> np.ndarray:
    """``mu phi_xx - 2 phi~_x phi_xx - Q[phi]``."""
    return mu * derivative_coeffs(c, 2) + strain_term_coeffs(c, n, fraction) - q_commutator_coeffs(c, n, fraction)


def first_order_rhs_coeffs(c: np.ndarray, n: int, fraction: float = 2 / 3) -> np.ndarray:
    ht = hilbert_coeffs(c)
    out = -0.5 * derivative_coeffs(hilbert_coeffs(_mul(ht, ht, n, fraction)), 2)
    return out - _mul(ht, derivative_coeffs(c, 2), n, fraction)


def acceleration(state: SolverState, mu: float, fraction: float = 2 / 3) -> PeriodicField:
    """``(mu - 2 phi~_x) phi_xx - Q[phi]``; its mean is zero up to roundoff."""
    grid = state.grid
    return _from_coeffs(grid, acceleration_coeffs(state.phi.coeffs, mu, grid.n_points, fraction))


def first_order_rhs(field: PeriodicField, fraction: float = 2 / 3) -> PeriodicField:
    return _from_coeffs(field.grid, first_order_rhs_coeffs(field.coeffs, field.grid.n_points, fraction))


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def _rk4(f: Callable, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _system(mode: str, mu: float, n: int, fraction: float) -> Callable:
    if mode == "first_order":
        return lambda c: first_order_rhs_coeffs(c, n, fraction)
    if mode == "linearized":
        accel = lambda c: mu * derivative_coeffs(c, 2)  # noqa: E731
    else:
        accel = lambda c: acceleration_coeffs(c, mu, n, fraction)  # noqa: E731
    return lambda y: np.stack([y[1], accel(y[0])])


def _zero_mean(c: np.ndarray) -> np.ndarray:
    K = (c.shape[-1] - 1) // 2
    c[..., K] = 0
    return c


def step_coeffs(y: np.ndarray, dt: float, mode: str, mu: float, n: int, fraction: float = 2 / 3) -> np.ndarray:
    """One RK4 step; ``y`` is ``(2, 2K+1)`` for second-order modes, ``(2K+1,)`` for ``first_order``."""
    # overflow is reported below as a blowup rather than as warnings
    with np.errstate(over="ignore", invalid="ignore"):
        out = _zero_mean(_rk4(_system(mode, mu, n, fraction), y, dt))
    if not np.all(np.isfinite(out)):
        raise BlowupError("non-finite coefficients after step")
    return out


def step(state: SolverState, dt: float, config: RunConfig) -> SolverState:
    """Advance by ``dt``; zero mean is re-imposed afterwards.

    Raises
    ------
    BlowupError
        If the step produces NaN or infinite values.
    """
    grid = state.grid
    n = grid.n_points
    if config.mode == "first_order":
        c = step_coeffs(state.phi.coeffs, dt, config.mode, config.mu, n, config.dealias)
        ct = first_order_rhs_coeffs(c, n, config.dealias)
    else:
        y = np.stack([state.phi.coeffs, state.phi_t.coeffs])
        c, ct = step_coeffs(y, dt, config.mode, config.mu, n, config.dealias)
    return SolverState(state.t + dt, _from_coeffs(grid, c), _from_coeffs(grid, ct))


def default_dt(phi: PeriodicField, mu: float, mode: str = "second_order") -> float:
    """``0.5 / (K * speed)`` with the local wave speed of the initial data."""
    K = phi.grid.max_mode
    n = phi.grid.n_points
    ht_x = np.max(np.abs(margin_samples(phi.coeffs, 0.0, n))) / 2.0
    if mode == "first_order":
        phi_x = np.max(np.abs(phi.derivative().samples))
        speed = 2.0 * (ht_x + phi_x)
    elif mode == "linearized":
        speed = math.sqrt(abs(mu))
    else:
        speed = math.sqrt(abs(mu) + 2.0 * ht_x)
    if speed == 0:
        speed = 1.0
    return 0.5 / (K * speed)


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------

TIMESERIES_COLUMNS = ("t", "h3_norm", "h2_norm_phit", "energy_r2", "margin_min", "q_l2", "zero_mode_defect")


@dataclass(frozen=True)
class Event:
    kind: str  # "margin_violation", "ill_posed", "blowup", "margin_halt"
    t: float
    step: int
    detail: str = ""


@dataclass(frozen=True)
class StepRecord:
    step: int
    state: SolverState
    stability: StabilityReport
    row: dict


def diagnostics_row(state: SolverState, mu: float, fraction: float = 2 / 3) -> dict:
    c0, c1 = state.phi.coeffs, state.phi_t.coeffs
    n = state.grid.n_points
    K = state.grid.max_mode
    q = q_commutator_coeffs(c0, n, fraction)
    accel0 = (strain_term_coeffs(c0, n, fraction) - q)[K]
    return {
        "t": state.t,
        "h3_norm": float(sobolev_norm_coeffs(c0, 3)),
        "h2_norm_phit": float(sobolev_norm_coeffs(c1, 2)),
        "energy_r2": energy_coeffs(c0, c1, mu, 2.0),
        "margin_min": float(np.min(margin_samples(c0, mu, n))),
        "q_l2": float(sobolev_norm_coeffs(q, 0)),
        "zero_mode_defect": float(abs(accel0)),
    }


@dataclass
class RunResult:
    config: RunConfig
    status: str  # "completed", "blowup", "margin_halt"
    final_state: SolverState
    dt: float
    steps: int
    events: list[Event]
    rows: list[dict]
    states: list[SolverState]


def initial_state(config: RunConfig) -> SolverState:
    data = materialize_initial_data(config.initial_data, config.grid, config.mu)
    phi1 = data.phi1
    if config.mode == "first_order":
        phi1 = first_order_rhs(data.phi0, config.dealias)
    return SolverState(0.0, data.phi0, phi1)


def integrate(config: RunConfig, state: SolverState | None = None, events: list | None = None) -> Iterator[StepRecord]:
    """Yield one record per step, starting with the initial state.

    Stops at ``t_end``, on blowup, or on a margin violation when
    ``halt_on_violation`` is set; events are appended to ``events``.

    Raises
    ------
    ValueError
        If stability enforcement is on and the initial margin is below delta.
    """
    if events is None:
        events = []
    if state is None:
        state = initial_state(config)
    mu, delta = config.mu, config.delta
    stab = stability_report(state.phi, mu, delta)
    if config.enforce_stability and config.mode == "second_order" and stab.margin < delta:
        raise ValueError(
            f"initial data violate the stability condition: min(mu - 2 H[phi]_x) = {stab.margin:.6g} < delta = {delta}"
        )
    dt_target = config.dt if config.dt is not None else default_dt(state.phi, mu, config.mode)
    nsteps = max(1, math.ceil(config.t_end / dt_target - 1e-9))
    dt = config.t_end / nsteps
    h3_0 = sobolev_norm_coeffs(state.phi.coeffs, 3)
    threshold = config.blowup_threshold
    if threshold is None:
        threshold = DEFAULT_BLOWUP_FACTOR * h3_0 if h3_0 > 0 else math.inf

    t0 = state.t
    seen = set()
    for i in range(nsteps + 1):
        if i > 0:
            try:
                state = step(state, dt, config)
            except BlowupError as exc:
                events.append(Event("blowup", state.t, i, str(exc)))
                log.warning("blowup at t=%g: %s", state.t, exc)
                return
            # keep t exact on the step lattice
            state = replace(state, t=t0 + i * dt)
            stab = stability_report(state.phi, mu, delta)
        row = diagnostics_row(state, mu, config.dealias)
        for kind, flag in (("margin_violation", stab.violated), ("ill_posed", stab.ill_posed)):
            if flag and kind not in seen:
                seen.add(kind)
                events.append(Event(kind, state.t, i, f"margin {stab.margin:.6g} at index {stab.margin_location}"))
                log.info("%s at t=%g (margin %g)", kind, state.t, stab.margin)
        yield StepRecord(i, state, stab, row)
        if row["h3_norm"] > threshold:
            events.append(Event("blowup", state.t, i, f"H^3 norm {row['h3_norm']:.6g} exceeds {threshold:.6g}"))
            return
        if config.halt_on_violation and stab.violated:
            events.append(Event("margin_halt", state.t, i, ""))
            return


def run(config: RunConfig, keep_states: int = 0, state: SolverState | None = None) -> RunResult:
    """Integrate to ``t_end`` and collect diagnostics.

    ``keep_states`` > 0 stores every ``keep_states``-th state (plus the last).
    """
    events: list[Event] = []
    rows, states = [], []
    last = None
    for rec in integrate(config, state, events):
        rows.append(rec.row)
        if keep_states and rec.step % keep_states == 0:
            states.append(rec.state)
        last = rec
    if keep_states and (not states or states[-1] is not last.state):
        states.append(last.state)
    status = "completed"
    for ev in events:
        if ev.kind in ("blowup", "margin_halt"):
            status = ev.kind
    dt = rows[1]["t"] - rows[0]["t"] if len(rows) > 1 else 0.0
    return RunResult(config, status, last.state, dt, last.step, events, rows, states)


# ---------------------------------------------------------------------------
# lifespan and smallness helpers
# ---------------------------------------------------------------------------

def t0_estimate(phi0: PeriodicField, phi1: PeriodicField, c1: float) -> float:
    """``C1 / sqrt(||phi0_x||_{H^2}^2 + ||phi1||_{H^2}^2)``; ``inf`` for zero data."""
    if not c1 > 0:
        raise ValueError("C1 must be positive")
    size = sobolev_norm_coeffs(derivative_coeffs(phi0.coeffs, 1), 2) ** 2 + sobolev_norm_coeffs(phi1.coeffs, 2) ** 2
    if size == 0:
        return math.inf
    return float(c1 / math.sqrt(size))


def t0_from_norms(phi0_x_h2: float, phi1_h2: float, c1: float) -> float:
    size = phi0_x_h2**2 + phi1_h2**2
    return math.inf if size == 0 else c1 / math.sqrt(size)


@dataclass(frozen=True)
class SmallnessReport:
    linf_norm: float  # ||H[phi0]_x||_inf
    threshold: float  # (mu - delta) / 2
    passed: bool
    margin: float  # min(mu - 2 H[phi0]_x)


def smallness_check(phi0: PeriodicField, mu: float, delta: float) -> SmallnessReport:
    if not 0 < delta < mu:
        raise ValueError(f"need 0 < delta < mu, got delta={delta}, mu={mu}")
    n = phi0.grid.n_points
    ht_x = (mu - margin_samples(phi0.coeffs, mu, n)) / 2.0
    linf = float(np.max(np.abs(ht_x)))
    thr = 0.5 * (mu - delta)
    return SmallnessReport(linf, thr, linf <= thr, float(mu - 2.0 * np.max(ht_x)))
