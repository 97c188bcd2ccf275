"""``cvsheet`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, parse_config, with_overrides
from .io import OUTPUT_ROOT_ENV, OutputError, resolve_out_dir
from .kernel import kernel_dump_csv
from .runner import diagnose_directory, format_check_table, identity_suite, run_to_directory, sweep


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text)


def _range(s: str) -> tuple[int, int]:
    lo, _, hi = s.partition(":")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {s!r}") from None


def _floats(s: str) -> list[float]:
    try:
        return [float(x) for x in s.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def cmd_run(args) -> int:
    config = _load(args.config)
    changes = {}
    if args.mode:
        changes["mode"] = args.mode
    if args.seed is not None:
        changes["seed"] = args.seed
    if changes:
        config = with_overrides(config, **changes)
    out = resolve_out_dir(args.out, Path(args.config).stem)
    s = run_to_directory(config, out)
    print(f"{s.status}: {s.steps} steps to t = {s.t_final:.6g}, output in {s.out_dir}")
    for e in s.events:
        print(f"  event {e.kind} at t = {e.t:.6g} (step {e.step}) {e.detail}")
    return 0 if s.status == "completed" else 2


def cmd_diagnose(args) -> int:
    run_dir = Path(args.run_dir)
    config = _load(args.config) if args.config else None
    fit = diagnose_directory(run_dir, config)
    if fit["skipped"]:
        print(f"riccati check skipped: {fit['reason']}")
        return 0
    print(f"C_hat = {fit['c_hat']:.6g}, bound {'holds' if fit['holds'] else 'VIOLATED'}")
    return 0 if fit["holds"] else 1


def cmd_kernel_dump(args) -> int:
    sys.stdout.write(kernel_dump_csv(args.m, args.l))
    return 0


def cmd_check_identities(args) -> int:
    results = identity_suite(args.trials, args.n_points, args.seed)
    print(format_check_table(results))
    return 0 if all(r.passed for r in results) else 1


def cmd_sweep(args) -> int:
    base = _load(args.config)
    out = resolve_out_dir(args.out, "sweep")
    results = sweep(base, args.mu, args.amplitude, out, args.threads)
    for mu, amp, status, t, d in results:
        print(f"mu={mu:g} amplitude={amp:g}: {status} (t = {t:.6g}) -> {d}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvsheet", description="Amplitude-equation solver and diagnostics.")
    p.add_argument("-v", "--verbose", action="store_true", help="log events while running")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate one configuration")
    r.add_argument("--config", required=True)
    r.add_argument("--mode", choices=("second", "first", "linear"))
    r.add_argument("--seed", type=lambda s: int(s, 0), help="seed for random_band initial data")
    r.add_argument("--out", help=f"output directory (default ${OUTPUT_ROOT_ENV}/<config name>)")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("diagnose", help="energy report and Riccati fit for a finished run")
    d.add_argument("run_dir")
    d.add_argument("--config", help="defaults to <run_dir>/config.txt")
    d.set_defaults(func=cmd_diagnose)

    k = sub.add_parser("kernel-dump", help="print kernel values as CSV")
    k.add_argument("--m", type=_range, default=(-4, 4), metavar="LO:HI")
    k.add_argument("--l", type=_range, default=(-4, 4), metavar="LO:HI")
    k.set_defaults(func=cmd_kernel_dump)

    c = sub.add_parser("check-identities", help="run the operator identity checks")
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--n-points", type=int, default=128)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check_identities)

    s = sub.add_parser("sweep", help="grid of runs over mu and amplitude")
    s.add_argument("--config", required=True)
    s.add_argument("--mu", type=_floats, required=True)
    s.add_argument("--amplitude", type=_floats, required=True)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OutputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
