"""Run configuration: defaults, JSON config file and command-line overrides."""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigurationError
from .shockfit import INDICATORS


@dataclass(frozen=True)
class RunConfig:
    mach: float = 1.5
    shock_pos: float = 0.55
    interface_init: float = 0.57
    domain: tuple[float, float] = (0.0, 1.0)
    cells: int = 10
    degree: int = 2
    smoothing: float = 1.0
    dt: float = 0.1
    indicator: str = "p0"
    tol_x: float = 1e-4
    max_pseudo_steps: int = 40
    delta_agg: float = 0.3
    sample_points: int = 20
    init: str = "smoothed"
    p0_mode: str = "zeroth_mode"
    out: str = "xdgshock-out"

    def validate(self) -> "RunConfig":
        lo, hi = self.domain
        problems = []
        if not lo < hi:
            problems.append(f"domain {self.domain} is empty")
        if self.cells < 1:
            problems.append(f"--cells must be >= 1, got {self.cells}")
        if self.degree < 0:
            problems.append(f"--degree must be >= 0, got {self.degree}")
        if not self.mach >= 1.0:
            problems.append(f"--mach must be >= 1, got {self.mach}")
        if not lo < self.interface_init < hi:
            problems.append(f"--interface-init {self.interface_init} outside the domain")
        if not lo < self.shock_pos < hi:
            problems.append(f"--shock-pos {self.shock_pos} outside the domain")
        if not (self.smoothing > 0 and self.dt > 0 and self.tol_x > 0):
            problems.append("--smoothing, --dt and --tol-x must be positive")
        if self.max_pseudo_steps < 1 or self.sample_points < 2:
            problems.append("--max-pseudo-steps must be >= 1 and --sample-points >= 2")
        if not 0.0 <= self.delta_agg < 0.5:
            problems.append(f"--delta-agg must lie in [0, 0.5), got {self.delta_agg}")
        if self.indicator not in INDICATORS:
            problems.append(f"--indicator must be one of {INDICATORS}")
        if self.init not in ("smoothed", "exact"):
            problems.append("--init must be 'smoothed' or 'exact'")
        if self.p0_mode not in ("zeroth_mode", "cut_mean"):
            problems.append("--p0-mode must be 'zeroth_mode' or 'cut_mean'")
        if problems:
            raise ConfigurationError("; ".join(problems))
        return self

    def to_json(self) -> dict:
        d = asdict(self)
        d["domain"] = list(self.domain)
        return {k.replace("_", "-"): v for k, v in d.items()}


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_domain(value) -> tuple[float, float]:
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 2:
        raise ConfigurationError(f"domain must be 'LO,HI', got {value!r}")
    try:
        return float(parts[0]), float(parts[1])
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"domain must be 'LO,HI', got {value!r}") from exc


def _coerce(key: str, value):
    kind = FIELD_TYPES[key]
    try:
        if key == "domain":
            return _parse_domain(value)
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid value {value!r} for {key}") from exc


def load_config_file(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config file must hold a flat JSON object")
    out = {}
    for key, value in raw.items():
        name = key.replace("-", "_")
        if name not in FIELD_TYPES:
            raise ConfigurationError(f"unknown config key {key!r}")
        out[name] = _coerce(name, value)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="xdgshock",
        description="Sub-cell shock fitting of a stationary normal shock with a 1D XDG solver.",
        argument_default=argparse.SUPPRESS,
    )
    ap.add_argument("--mach", type=float, help="shock Mach number (default 1.5)")
    ap.add_argument("--shock-pos", type=float, help="exact shock position x_s (default 0.55)")
    ap.add_argument("--interface-init", type=float, help="initial interface position (default 0.57)")
    ap.add_argument("--domain", type=str, metavar="LO,HI", help="domain bounds (default 0,1)")
    ap.add_argument("--cells", type=int, help="number of background cells (default 10)")
    ap.add_argument("--degree", type=int, help="polynomial degree P (default 2)")
    ap.add_argument("--smoothing", type=float, help="smoothing factor of the initial ramp (default 1.0)")
    ap.add_argument("--dt", type=float, help="implicit Euler step size (default 0.1)")
    ap.add_argument("--indicator", choices=INDICATORS, help="driving indicator (default p0)")
    ap.add_argument("--tol-x", type=float, help="interface position tolerance (default 1e-4)")
    ap.add_argument("--max-pseudo-steps", type=int, help="pseudo-step cap (default 40)")
    ap.add_argument("--delta-agg", type=float, help="volume fraction threshold (default 0.3)")
    ap.add_argument("--sample-points", type=int, help="output samples per cut-cell (default 20)")
    ap.add_argument("--init", choices=("smoothed", "exact"), help="initial condition (default smoothed)")
    ap.add_argument("--p0-mode", choices=("zeroth_mode", "cut_mean"),
                    help="P0 value of a cut-cell for the P0 indicator (default zeroth_mode)")
    ap.add_argument("--out", type=str, metavar="DIR", help="output directory (default xdgshock-out)")
    ap.add_argument("--config", type=str, metavar="FILE", help="flat JSON file with the same keys")
    ap.add_argument("-v", "--verbose", action="count", help="log pseudo-steps (-vv for Euler steps)")
    return ap


def parse_config(argv=None, parser: argparse.ArgumentParser | None = None) -> tuple[RunConfig, int]:
    """Defaults < config file < flags.  Returns the config and the verbosity level."""
    parser = parser or build_parser()
    ns = vars(parser.parse_args(argv))
    verbose = ns.pop("verbose", 0)
    values = {}
    config_file = ns.pop("config", None)
    if config_file is not None:
        values.update(load_config_file(config_file))
    for key, value in ns.items():
        values[key] = _coerce(key, value)
    return RunConfig(**values).validate(), verbose
