"""Run orchestration behind the command-line tool."""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import format_config, parse_config
from .diagnostics import riccati_check
from .evolution import RunConfig, integrate
from .hilbert import adjoint_check, commutator_self_adjoint_check, hilbert_squared_check, product_identity_check
from .initial_data import random_coeff_batch
from .io import ENERGY_REPORT_COLUMNS, OutputError, emit_snapshot, emit_timeseries, read_csv, write_csv
from .kernel import (
    flux_rhs_coeffs,
    kernel_identity_violations,
    q_commutator_coeffs,
    q_spectral_coeffs,
    strain_term_coeffs,
)
from .spectral import Grid, PeriodicField, _from_coeffs


@dataclass(frozen=True)
class RunSummary:
    out_dir: Path
    status: str
    steps: int
    t_final: float
    events: tuple


def run_to_directory(config: RunConfig, out_dir: Path) -> RunSummary:
    """Integrate ``config`` and write its outputs under ``out_dir``.

    Files: ``config.txt``, ``timeseries.csv`` (one row per step, including
    ``t = 0``), ``events.csv``, and with ``snapshot_every > 0`` the spectra
    in ``snapshots/`` plus ``snapshots/index.csv``.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.txt").write_text(format_config(config))
    except OSError as exc:
        raise OutputError(f"cannot write {out_dir}: {exc.strerror or exc}") from exc

    events: list = []
    index: list[tuple[int, float]] = []
    snap_dir = out_dir / "snapshots"
    last = None

    def rows():
        nonlocal last
        for rec in integrate(config, events=events):
            last = rec
            if config.snapshot_every and rec.step % config.snapshot_every == 0:
                emit_snapshot(snap_dir, rec.step, rec.state)
                index.append((rec.step, rec.state.t))
            yield rec.row

    emit_timeseries(out_dir / "timeseries.csv", rows())
    if config.snapshot_every and last is not None and (not index or index[-1][0] != last.step):
        emit_snapshot(snap_dir, last.step, last.state)
        index.append((last.step, last.state.t))
    if index:
        with open(snap_dir / "index.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("step", "t"))
            w.writerows((s, repr(t)) for s, t in index)
    with open(out_dir / "events.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("kind", "t", "step", "detail"))
        w.writerows((e.kind, repr(e.t), e.step, e.detail) for e in events)

    status = "completed"
    for e in events:
        if e.kind in ("blowup", "margin_halt"):
            status = e.kind
    return RunSummary(out_dir, status, last.step, last.state.t, tuple(events))


def diagnose_directory(run_dir: Path, config: RunConfig | None = None) -> dict:
    """Write ``energy_report.csv`` for a finished run and return the fit.

    ``riccati_lhs`` is ``y = sqrt(E)`` and ``riccati_rhs`` the fitted bound
    ``y(0) / (1 - C t y(0))``; ``bound_ok`` is 1 where the bound holds or
    lies outside the checked window.
    """
    run_dir = Path(run_dir)
    if config is None:
        config = parse_config((run_dir / "config.txt").read_text())
    ts = read_csv(run_dir / "timeseries.csv")
    t, e, margin = ts["t"], ts["energy_r2"], ts["margin_min"]
    y = np.sqrt(np.maximum(e, 0.0))
    if t.size >= 100:
        rep = riccati_check(t, y, margin, config.delta)
    else:
        rep = None
    if rep is None or rep.skipped:
        lhs, rhs, ok = y, np.full_like(y, np.nan), np.zeros_like(y, dtype=bool)
    else:
        lhs, rhs, ok = y, rep.bound, rep.bound_ok
    rows = zip(t, e, y, margin, lhs, rhs, ok)
    write_csv(run_dir / "energy_report.csv", ENERGY_REPORT_COLUMNS, rows)
    if rep is None:
        return {"c_hat": float("nan"), "holds": False, "skipped": True, "reason": f"only {t.size} samples"}
    return {"c_hat": rep.c_hat, "holds": rep.holds, "skipped": rep.skipped, "reason": rep.reason}


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def identity_suite(trials: int = 100, n_points: int = 128, seed: int = 0, kernel_bound: int = 512) -> list[CheckResult]:
    """Seeded operator identity checks; residuals are maxima over the ensemble."""
    grid = Grid(n_points)
    n = n_points
    K = grid.max_mode
    half = (1, max(1, K // 2 - 1))
    a = random_coeff_batch(grid, trials, seed, band=half, stream=11)
    b = random_coeff_batch(grid, trials, seed, band=half, stream=12)
    h = random_coeff_batch(grid, trials, seed, band=half, stream=13)
    fields = [(_from_coeffs(grid, x), _from_coeffs(grid, y), _from_coeffs(grid, z)) for x, y, z in zip(a, b, h)]
    out = []

    def scale(c):
        return np.linalg.norm(c, axis=-1)

    out.append(CheckResult("hilbert_squared", max(hilbert_squared_check(f) / scale(f.coeffs) for f, _, _ in fields), 1e-10))
    out.append(CheckResult(
        "product_identity",
        max(product_identity_check(f, g) / (scale(f.coeffs) * scale(g.coeffs)) for f, g, _ in fields), 1e-10))
    out.append(CheckResult(
        "hilbert_adjoint", max(adjoint_check(f, g) / (scale(f.coeffs) * scale(g.coeffs)) for f, g, _ in fields), 1e-10))
    out.append(CheckResult(
        "commutator_self_adjoint",
        max(commutator_self_adjoint_check(hh, f, g) / (scale(hh.coeffs) * scale(f.coeffs) * scale(g.coeffs))
            for f, g, hh in fields), 1e-10))

    c = random_coeff_batch(grid, trials, seed, stream=14)
    qs = q_spectral_coeffs(c)
    ref = np.max(np.abs(qs), axis=-1, keepdims=True)
    qc = q_commutator_coeffs(c, n)
    qf = -flux_rhs_coeffs(c, n) + strain_term_coeffs(c, n)
    out.append(CheckResult("q_commutator_vs_spectral", float(np.max(np.abs(qc - qs) / ref)), 1e-10))
    out.append(CheckResult("q_flux_vs_spectral", float(np.max(np.abs(qf - qs) / ref)), 1e-10))

    worst = 0.0
    for k in range(1, 9):
        for amp in (0.5, 1.0, 2.0):
            f = PeriodicField.from_function(grid, lambda x: amp * np.cos(k * x))
            q = q_commutator_coeffs(f.coeffs, n)
            target = np.zeros_like(q)
            target[K] = amp * amp * k**3
            worst = max(worst, float(np.max(np.abs(q - target))) / (amp * amp * k**3))
    out.append(CheckResult("q_closed_form_cos", worst, 1e-12))

    # zero mode of (mu - 2 phi~_x) phi_xx - Q; mu phi_xx has no mean
    zero = strain_term_coeffs(c, n)[:, K] - qc[:, K]
    out.append(CheckResult("zero_mode_cancellation", float(np.max(np.abs(zero))), 1e-12))

    for name, count in kernel_identity_violations(kernel_bound).items():
        out.append(CheckResult(f"kernel_{name}", float(count), 0.0))
    return out


def format_check_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'residual':>10}  {'tol':>8}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.residual:10.3e}  {r.tolerance:8.1e}  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _sweep_cell(args):
    config, out_dir = args
    try:
        s = run_to_directory(config, out_dir)
        return (config.mu, config.initial_data.amplitudes[0], s.status, s.t_final, str(out_dir))
    except ValueError as exc:
        return (config.mu, config.initial_data.amplitudes[0], f"rejected: {exc}", 0.0, str(out_dir))


def sweep(base: RunConfig, mus, amplitudes, out_root: Path, threads: int = 1) -> list[tuple]:
    """Run every ``(mu, amplitude)`` cell in its own directory.

    The first initial-data amplitude is replaced; ``delta`` is kept unless
    it is not below ``mu``, in which case it is set to ``mu / 2`` (only for
    positive ``mu``). Cells run in separate processes when ``threads > 1``.
    """
    out_root = Path(out_root)
    jobs = []
    for mu, amp in itertools.product(mus, amplitudes):
        amps = (amp,) + tuple(base.initial_data.amplitudes[1:])
        delta = base.delta if base.delta < mu or mu <= 0 else mu / 2
        cfg = replace(base, mu=mu, delta=delta, initial_data=replace(base.initial_data, amplitudes=amps),
                      enforce_stability=base.enforce_stability and mu > 0)
        jobs.append((cfg, out_root / f"mu_{mu:g}_amp_{amp:g}"))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    else:
        results = [_sweep_cell(j) for j in jobs]
    _write_sweep_index(out_root / "sweep.csv", results)
    return results


def _write_sweep_index(path: Path, results) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("mu", "amplitude", "status", "t_final", "out_dir"))
        w.writerows((repr(mu), repr(a), st, repr(t), d) for mu, a, st, t, d in results)
