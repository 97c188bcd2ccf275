"""Flat ``key = value`` run configuration.

Example::

    mu = 1.0
    delta = 0.5
    n_points = 128
    t_end = 1.0          # dt defaults to auto
    initial.kind = single_mode
    initial.amplitude = 0.01
    initial.mode = 1
"""

from __future__ import annotations

import re
from dataclasses import fields, replace
from fractions import Fraction

from .evolution import MODE_ALIASES, MODES, RunConfig
from .initial_data import InitialDataSpec


class ConfigError(ValueError):
    """A configuration problem tied to a key and, when known, a line."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


def _float(s: str) -> float:
    return float(s)


def _fraction(s: str) -> float:
    return float(Fraction(s.strip()))


def _int(s: str) -> int:
    return int(s, 0)


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _optional(conv):
    def parse(s: str):
        return None if s.strip().lower() in ("auto", "none") else conv(s)

    return parse


def _tuple(conv):
    def parse(s: str):
        items = [p for p in s.replace(",", " ").split() if p]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(p) for p in items)

    return parse


def _mode(s: str) -> str:
    v = MODE_ALIASES.get(s.strip(), s.strip())
    if v not in MODES:
        raise ValueError(f"expected one of {MODES}")
    return v


# key -> (RunConfig / InitialDataSpec field, converter)
RUN_KEYS = {
    "mu": ("mu", _float),
    "delta": ("delta", _float),
    "n_points": ("n_points", _int),
    "dt": ("dt", _optional(_float)),
    "t_end": ("t_end", _float),
    "dealias": ("dealias", _fraction),
    "mode": ("mode", _mode),
    "blowup_threshold": ("blowup_threshold", _optional(_float)),
    "enforce_stability": ("enforce_stability", _bool),
    "halt_on_violation": ("halt_on_violation", _bool),
    "snapshot_every": ("snapshot_every", _int),
}
INITIAL_KEYS = {
    "initial.kind": ("kind", str.strip),
    "initial.amplitude": ("amplitudes", _tuple(_float)),
    "initial.amplitudes": ("amplitudes", _tuple(_float)),
    "initial.mode": ("modes", _tuple(_int)),
    "initial.modes": ("modes", _tuple(_int)),
    "initial.phase": ("phases", _tuple(_float)),
    "initial.phases": ("phases", _tuple(_float)),
    "initial.seed": ("seed", _int),
    "initial.band": ("band", _tuple(_int)),
    "initial.decay": ("decay_exponent", _float),
    "initial.velocity": ("velocity", str.strip),
}
REQUIRED = ("mu", "delta", "n_points", "t_end", "initial.kind")


def read_pairs(text: str) -> dict[str, tuple[str, int]]:
    """``key -> (raw value, line number)``; rejects malformed and duplicate lines."""
    seen: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError("missing key", line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key (first on line {seen[key][1]}, again on line {lineno})", key, lineno)
        seen[key] = (value, lineno)
    return seen


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration text.

    Raises
    ------
    ConfigError
        For unknown, missing or duplicate keys, unparsable values, and
        constraint violations such as ``delta >= mu`` on a stable run.
    """
    pairs = read_pairs(text)
    for key, (_, lineno) in pairs.items():
        if key not in RUN_KEYS and key not in INITIAL_KEYS:
            raise ConfigError("unknown key", key, lineno)
    for key in REQUIRED:
        if key not in pairs:
            raise ConfigError("missing required key", key)

    run_kw, init_kw, origin = {}, {}, {}
    for key, (value, lineno) in pairs.items():
        table, target = (RUN_KEYS, run_kw) if key in RUN_KEYS else (INITIAL_KEYS, init_kw)
        name, conv = table[key]
        if name in target:
            raise ConfigError(f"conflicts with key on line {origin[name][1]}", key, lineno)
        try:
            target[name] = conv(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse {value!r}: {exc}", key, lineno) from None
        origin[name] = (key, lineno)

    if "band" in init_kw and len(init_kw["band"]) != 2:
        raise ConfigError("band needs two integers k_min k_max", *origin["band"])
    try:
        init = InitialDataSpec(**init_kw)
    except ValueError as exc:
        raise _blame(exc, origin, [f.name for f in fields(InitialDataSpec)]) from None
    try:
        return RunConfig(initial_data=init, **run_kw)
    except ValueError as exc:
        raise _blame(exc, origin, [f.name for f in fields(RunConfig)]) from None


def _blame(exc: ValueError, origin: dict, names: list[str]) -> ConfigError:
    """Attach the first field named in the message to the error."""
    msg = str(exc)
    # "delta" before "mu": the stability message mentions both
    order = sorted(names, key=lambda n: (n != "delta", -len(n)))
    for name in order:
        if re.search(rf"\b{name}\b", msg) and name in origin:
            return ConfigError(msg, *origin[name])
    return ConfigError(msg)


def format_config(config: RunConfig) -> str:
    """Inverse of :func:`parse_config` (values written with ``repr``)."""
    lines = []
    for key, (name, _) in RUN_KEYS.items():
        v = getattr(config, name)
        lines.append(f"{key} = {'auto' if v is None else _fmt(v)}")
    init = config.initial_data
    for key in ("initial.kind", "initial.amplitudes", "initial.modes", "initial.phases",
                "initial.seed", "initial.band", "initial.decay", "initial.velocity"):
        lines.append(f"{key} = {_fmt(getattr(init, INITIAL_KEYS[key][0]))}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return " ".join(_fmt(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def with_overrides(config: RunConfig, **changes) -> RunConfig:
    """``dataclasses.replace`` that also accepts ``seed`` for the initial data."""
    seed = changes.pop("seed", None)
    if seed is not None:
        changes["initial_data"] = replace(config.initial_data, seed=seed)
    return replace(config, **changes)
