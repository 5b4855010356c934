"""Scenario configuration: strict JSON parsing with documented defaults."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

SCENARIOS = (
    "static-pair",
    "brownian-ensemble",
    "chi-distribution",
    "esd-compare",
    "s2-channels",
    "witness-scatter",
)

_CLASSICAL = {
    "delta": 100.0,
    "g0": 1.0,
    "L": 1.0,
    "dt": None,
    "t_end": None,
    "epsilon": 0.1,
    "burn_in_fraction": 0.1,
}
_DECAY = {
    "alpha": 3 / math.sqrt(10),
    "gamma": 1.0,
    "interacting": True,
    "dt": None,
}

# Scenario parameter defaults; ``None`` means "derived", see the engines.
DEFAULTS: dict[str, dict[str, Any]] = {
    "static-pair": {"delta": 0.0, "g0": 1.0, "periods": 1, "n_points": 100_000},
    "brownian-ensemble": {
        **_CLASSICAL,
        "D": 100.0,
        "D_grid": [0.1, 1.0, 10.0, 100.0, 1000.0],
        "record_every": 100,
        "n_paths": 2,
    },
    "chi-distribution": {**_CLASSICAL, "D": 100.0, "bin_width": 0.02},
    "esd-compare": {**_DECAY, "t_end": 4.0, "n_points": 41, "subensembles": [2, 5, 50]},
    "s2-channels": {**_DECAY, "t_measure": None},
    "witness-scatter": {},
}

DEFAULT_TRAJECTORIES = {
    "static-pair": 1,
    "brownian-ensemble": 1000,
    "chi-distribution": 50_000,
    "esd-compare": 50_000,
    "s2-channels": 50_000,
    "witness-scatter": 10_000,
}

TOP_LEVEL_KEYS = ("scenario", "seed", "n_traj", "output_dir", "format", "parameters")


class ConfigError(ValueError):
    """Invalid scenario configuration; ``key`` names the offending entry."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int = 0
    n_traj: Optional[int] = None
    output_dir: str = "."
    format: str = "csv"
    parameters: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}", "scenario")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}", "seed")
        if self.n_traj is None:
            self.n_traj = DEFAULT_TRAJECTORIES[self.scenario]
        if isinstance(self.n_traj, bool) or not isinstance(self.n_traj, int) or self.n_traj < 1:
            raise ConfigError(f"n_traj must be a positive integer, got {self.n_traj!r}", "n_traj")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be 'csv' or 'json', got {self.format!r}", "format")
        if not isinstance(self.parameters, dict):
            raise ConfigError("parameters must be a JSON object", "parameters")
        known = DEFAULTS[self.scenario]
        for key in self.parameters:
            if key not in known:
                raise ConfigError(f"unknown parameter {key!r} for scenario {self.scenario}", key)
        self.parameters = {**known, **self.parameters}

    def resolved(self) -> dict[str, Any]:
        """Plain-data view used in the run manifest."""
        return asdict(self)


def parse_config(source: str | os.PathLike | dict, **overrides) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from a JSON file path, JSON text or a dict.

    Keyword ``overrides`` (e.g. from command-line flags) replace top-level
    entries when not ``None``.
    """
    if isinstance(source, dict):
        doc = dict(source)
    else:
        text = str(source)
        if os.path.exists(text):
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        if not text.strip():
            raise ConfigError("empty configuration")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    for key in doc:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"unknown configuration key {key!r}", key)
    for key, value in overrides.items():
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"unknown configuration key {key!r}", key)
        if value is not None:
            doc[key] = value
    if "scenario" not in doc:
        raise ConfigError("missing required key 'scenario'", "scenario")
    return ScenarioConfig(**doc)
