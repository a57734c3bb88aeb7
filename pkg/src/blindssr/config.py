"""Plain-text configuration for simulation runs.

Format: one ``key = value`` per line, ``#`` starts a comment, blank
lines ignored.  List values are comma-separated; numeric items may use
the inclusive range shorthand ``start:stop:step``.  ``inf`` (or
``infinity``) is the unbounded upper ratio.  Unknown or duplicate keys
are errors: a typo must never silently fall back to a default.  The
master seed is mandatory so no run ever depends on the wall clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

from .engine import GridSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_number_list"]


class ConfigError(ValueError):
    """A configuration file or flag set that cannot be used as given."""


def _parse_float(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def _parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None


def _expand_range(item: str) -> list[float]:
    parts = item.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must be start:stop:step, got {item!r}")
    start, stop, step = (_parse_float(p) for p in parts)
    if step <= 0 or not all(map(math.isfinite, (start, stop, step))):
        raise ConfigError(f"bad range bounds in {item!r}")
    count = round((stop - start) / step)
    if count < 0 or abs(start + count * step - stop) > 1e-9:
        raise ConfigError(f"step does not divide the range in {item!r}")
    # re-round each point so 0.05-grids come out as exact short decimals
    return [round(start + i * step, 10) for i in range(count + 1)]


def parse_number_list(text: str) -> tuple[float, ...]:
    """Comma-separated numbers, each item a literal or a start:stop:step."""
    out: list[float] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise ConfigError(f"empty item in list {text!r}")
        if ":" in item:
            out.extend(_expand_range(item))
        else:
            out.append(_parse_float(item))
    return tuple(out)


def _parse_int_list(text: str) -> tuple[int, ...]:
    values = parse_number_list(text)
    for v in values:
        if not (math.isfinite(v) and float(v).is_integer()):
            raise ConfigError(f"expected integers, got {text!r}")
    return tuple(int(v) for v in values)


@dataclass(frozen=True)
class RunConfig:
    """Merged file-plus-flag settings for a grid run."""

    n_stage1: Optional[tuple[int, ...]] = None
    n_min_ratios: Optional[tuple[float, ...]] = None
    n_max_ratios: Optional[tuple[float, ...]] = None
    delta0: Optional[tuple[float, ...]] = None
    replications: Optional[int] = None
    master_seed: Optional[int] = None
    sigma: float = 1.0
    alpha: float = 0.05
    beta: float = 0.10
    workers: int = 1
    out_dir: str = "."

    def grid_spec(self) -> GridSpec:
        missing = [name for name in
                   ("n_stage1", "n_min_ratios", "n_max_ratios", "delta0",
                    "replications", "master_seed")
                   if getattr(self, name) is None]
        if missing:
            raise ConfigError(
                "grid run needs " + ", ".join(missing)
                + "; set them in the config file or on the command line")
        try:
            return GridSpec(
                n_stage1=self.n_stage1, n_min_ratios=self.n_min_ratios,
                n_max_ratios=self.n_max_ratios, delta0=self.delta0,
                replications=self.replications, master_seed=self.master_seed,
                sigma=self.sigma, alpha=self.alpha, beta=self.beta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_KEY_PARSERS = {
    "n_stage1": _parse_int_list,
    "n_min_ratios": parse_number_list,
    "n_max_ratios": parse_number_list,
    "delta0": parse_number_list,
    "replications": _parse_int,
    "master_seed": _parse_int,
    "sigma": _parse_float,
    "alpha": _parse_float,
    "beta": _parse_float,
    "workers": _parse_int,
    "out_dir": str.strip,
}


def _read_kv_file(path: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in pairs:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            pairs[key] = value
    return pairs


def parse_config(path: Optional[str] = None,
                 overrides: Optional[dict] = None) -> RunConfig:
    """Build a RunConfig from an optional file plus flag overrides.

    Overrides win over file values.  Keys outside the documented set are
    rejected in both sources.
    """
    def parsed(key, raw):
        if key not in _KEY_PARSERS:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            return _KEY_PARSERS[key](raw)
        except ConfigError as exc:
            raise ConfigError(f"{key}: {exc}") from None

    settings: dict = {}
    if path is not None:
        for key, raw in _read_kv_file(path).items():
            settings[key] = parsed(key, raw)
    for key, value in (overrides or {}).items():
        if key not in _KEY_PARSERS:
            raise ConfigError(f"unknown configuration key {key!r}")
        if value is None:
            continue
        # flags arrive either pre-typed from argparse or as raw strings
        settings[key] = parsed(key, value) if isinstance(value, str) else value
    config = RunConfig(**settings)
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    if config.replications is not None and config.replications < 1:
        raise ConfigError("replications must be >= 1")
    if config.master_seed is not None and not 0 <= config.master_seed < 2 ** 64:
        raise ConfigError("master_seed must be a 64-bit unsigned integer")
    return config


# the field names of RunConfig and the parser table must stay in sync
assert set(_KEY_PARSERS) == {f.name for f in fields(RunConfig)}
