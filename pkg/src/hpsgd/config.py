"""INI-style experiment configs.

Sections and keys mirror :class:`~hpsgd.harness.ExperimentConfig`::

    [experiment]
    mu = 0.5
    form = classic
    x1 = default
    T = 1000
    T_grid = 256, 512, 1024
    n_trials = 100
    delta = 0.05
    base_seed = 2020

    [objective]
    kind = quadratic
    d = 10
    spectrum = logspace

    [noise]
    kind = gaussian
    sigma = 1.0

    [schedule]
    kind = inv_sqrt
    c = auto

An optional ``[concentration]`` section configures the ``concentration``
subcommand. Missing sections and keys take the dataclass defaults.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Optional

from .harness import ConfigError, ExperimentConfig, NoiseSpec, ObjectiveSpec, ScheduleSpec

__all__ = ["ConcentrationConfig", "parse_config", "parse_text", "apply_overrides", "format_config",
           "format_float", "load"]


@dataclass
class ConcentrationConfig:
    T: int = 50
    lam: float = 1.0
    deltas: tuple = (0.1, 0.01)
    n_trials: int = 10_000
    understate: float = 1.0
    max_T: int = 100
    max_d: tuple = (1, 10)
    max_delta: float = 0.05
    sigma: float = 1.0
    seed: int = 2020


def format_float(x) -> str:
    return format(float(x), ".17g")


def _list(raw: str, conv) -> list:
    return [conv(v) for v in raw.replace(",", " ").split()]


def _int(raw: str) -> int:
    value = float(raw)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {raw!r}")
    return int(value)


def _auto_float(raw: str):
    return "auto" if raw.strip().lower() == "auto" else float(raw)


def _x1(raw: str):
    raw = raw.strip()
    if raw in ("default", "equal_energy"):
        return raw
    return _list(raw, float)


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


_PARSERS = {
    "experiment": {
        "mu": float, "form": str.strip, "x1": _x1, "T": _int,
        "T_grid": lambda r: _list(r, _int) if r.strip() else None,
        "n_trials": _int, "delta": float, "base_seed": _int, "force": _bool,
    },
    "objective": {
        "kind": str.strip, "d": _int, "diag": lambda r: _list(r, float) if r.strip() else None,
        "spectrum": str.strip, "lambda_min": float, "a": float,
    },
    "noise": {"kind": str.strip, "sigma": float},
    "schedule": {"kind": str.strip, "c": _auto_float, "alpha": _auto_float, "beta": float},
    "concentration": {
        "T": _int, "lam": float, "deltas": lambda r: tuple(_list(r, float)), "n_trials": _int,
        "understate": float, "max_T": _int, "max_d": lambda r: tuple(_list(r, _int)),
        "max_delta": float, "sigma": float, "seed": _int,
    },
}


def _new_parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (T, T_grid)
    return cp


def apply_overrides(cp: configparser.ConfigParser, overrides: Iterable[str]) -> None:
    """Apply ``section.key=value`` strings on top of a parsed file."""
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not name:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        if section not in _PARSERS:
            raise ConfigError(f"unknown config section {section!r} in override {item!r}")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, name, value.strip())


def _build(cp: configparser.ConfigParser) -> tuple[ExperimentConfig, ConcentrationConfig]:
    values = {}
    for section in cp.sections():
        if section not in _PARSERS:
            raise ConfigError(f"unknown config section [{section}]")
        table = _PARSERS[section]
        values[section] = {}
        for key, raw in cp.items(section):
            if key not in table:
                raise ConfigError(f"unknown config key {section}.{key}")
            try:
                values[section][key] = table[key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {exc}") from None
    try:
        cfg = ExperimentConfig(
            objective=ObjectiveSpec(**values.get("objective", {})),
            noise=NoiseSpec(**values.get("noise", {})),
            schedule=ScheduleSpec(**values.get("schedule", {})),
            **values.get("experiment", {}),
        )
        conc = ConcentrationConfig(**values.get("concentration", {}))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.validate()
    return cfg, conc


def parse_text(text: str, overrides: Iterable[str] = (), force: Optional[bool] = None
               ) -> tuple[ExperimentConfig, ConcentrationConfig]:
    cp = _new_parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    apply_overrides(cp, overrides)
    cfg, conc = _build(cp)
    if force is not None:
        cfg.force = force
    return cfg, conc


def load(path, overrides: Iterable[str] = (), force: Optional[bool] = None
         ) -> tuple[ExperimentConfig, ConcentrationConfig]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_text(text, overrides, force)


def parse_config(path, overrides: Iterable[str] = (), force: bool = False) -> ExperimentConfig:
    """Parse, validate and resolve ``auto`` step sizes (at ``T``)."""
    cfg, _ = load(path, overrides, force)
    resolved, _notes = cfg.resolve()
    return resolved


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value) if math.isfinite(value) else repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def format_config(cfg: ExperimentConfig, conc: Optional[ConcentrationConfig] = None) -> str:
    """Render a config in the same format :func:`parse_text` reads."""
    cp = _new_parser()
    cp["experiment"] = {f.name: _fmt(getattr(cfg, f.name)) for f in fields(cfg)
                        if f.name not in ("objective", "noise", "schedule")}
    for name in ("objective", "noise", "schedule"):
        spec = getattr(cfg, name)
        cp[name] = {f.name: _fmt(getattr(spec, f.name)) for f in fields(spec)}
    if conc is not None:
        cp["concentration"] = {f.name: _fmt(getattr(conc, f.name)) for f in fields(conc)}
    from io import StringIO

    buf = StringIO()
    cp.write(buf)
    return buf.getvalue()
