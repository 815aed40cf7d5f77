"""Run configuration: precision policy, tolerances, CLI/config-file plumbing.

Precedence is flags over config file over defaults.  The config file is a
flat ``key = value`` text format; the default path can be set through the
PELLSERIES_CONFIG environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from mpmath import workprec

# Regulators and series sums are carried well beyond double precision; the
# identity tolerances (1e-9 .. 1e-12) leave a wide margin at 128 bits.
DEFAULT_PRECISION_BITS = 128

# Constant c in the truncation tail bound c * sqrt(d) * ln(d) / T of the
# character sum; 2.0 dominates the exactly computed partial-sum bound for
# every admissible d (asserted in the test suite).
DEFAULT_TAIL_CONSTANT = 2.0

# Truncation length for class-number-formula cross-checks.
DEFAULT_CROSSCHECK_T = 10**6

ENV_CONFIG_PATH = "PELLSERIES_CONFIG"


def working(precision_bits: int | None = None):
    """mpmath working-precision context for all extended-precision math."""
    return workprec(precision_bits or DEFAULT_PRECISION_BITS)


@dataclass
class RunConfig:
    level: int = 1                     # N
    cutoff: int = 1000                 # abscissa cutoff X
    inner_cutoff: int = 3              # U, inner solution count (LN family)
    sigma_min: float = 0.6
    sigma_max: float = 2.0
    t_min: float = -5.0
    t_max: float = 5.0
    grid_steps: int = 5
    precision: int = DEFAULT_PRECISION_BITS
    workers: int = 1
    out: str = "."
    crosscheck: bool = True
    tail_constant: float = DEFAULT_TAIL_CONSTANT

    def validate(self) -> None:
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")
        if self.cutoff < 5:
            raise ValueError(f"cutoff must be >= 5, got {self.cutoff}")
        if self.inner_cutoff < 1:
            raise ValueError(f"inner-cutoff must be >= 1, got {self.inner_cutoff}")
        if self.sigma_min <= 0.5:
            raise ValueError(f"sigma range must stay right of 1/2, got "
                             f"sigma_min={self.sigma_min}")
        if self.sigma_max < self.sigma_min:
            raise ValueError("sigma_max < sigma_min")
        if self.t_max < self.t_min:
            raise ValueError("t_max < t_min")
        if self.grid_steps < 1:
            raise ValueError("grid-steps must be >= 1")
        if self.precision < 64:
            raise ValueError(f"precision must be >= 64 bits, got {self.precision}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.tail_constant <= 0:
            raise ValueError("tail-constant must be positive")

    def s_grid(self) -> list[tuple[float, float]]:
        """Deterministic (sigma, t) grid, row-major, sigma then t ascending."""
        n = self.grid_steps
        if n == 1:
            sigmas = [self.sigma_min]
            ts = [self.t_min]
        else:
            sigmas = [self.sigma_min + i * (self.sigma_max - self.sigma_min) / (n - 1)
                      for i in range(n)]
            ts = [self.t_min + i * (self.t_max - self.t_min) / (n - 1)
                  for i in range(n)]
        return [(s, t) for s in sigmas for t in ts]


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Flat key=value file; '#' starts a comment; blank lines ignored."""
    out: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def config_from_sources(overrides: dict[str, object],
                        config_path: str | Path | None = None) -> RunConfig:
    """Build a RunConfig: defaults, then config file, then explicit overrides."""
    cfg = RunConfig()
    path = config_path or os.environ.get(ENV_CONFIG_PATH)
    if path:
        raw = parse_config_file(path)
        valid = {f.name: f.type for f in fields(RunConfig)}
        parsed: dict[str, object] = {}
        for key, value in raw.items():
            if key not in valid:
                raise ValueError(f"unknown config key {key!r} in {path}")
            parsed[key] = _coerce(key, value, getattr(cfg, key))
        cfg = replace(cfg, **parsed)
    clean = {k: v for k, v in overrides.items() if v is not None}
    cfg = replace(cfg, **clean)
    cfg.validate()
    return cfg


def _coerce(key: str, value: str, default: object) -> object:
    if isinstance(default, bool):
        low = value.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValueError(f"config key {key!r}: expected boolean, got {value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value
