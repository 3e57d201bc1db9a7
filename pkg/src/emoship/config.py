"""Flat key = value configuration with file, env, and CLI override layers.

Precedence (lowest to highest): built-in defaults, file named by the
EMOSHIP_CONFIG env var, file passed via --config, individual --set overrides.
"""

from __future__ import annotations

import os
from typing import Dict, Optional

from .errors import InputError

# The single place every tunable default lives.  Keys are dotted; values are
# ints, floats, or strings.  `emoship --help` enumerates this table.
DEFAULT_QUESTION = (
    "What object makes people feel happy/surprised/sad/angry/feared/disgusted?"
)

DEFAULTS: Dict[str, object] = {
    # gaze movement classification (normalized units, units/second, ms)
    "gaze.rho_fix": 0.02,
    "gaze.rho_sp": 0.05,
    "gaze.v_fix": 0.05,
    "gaze.v_sp": 0.5,
    "gaze.min_duration_ms": 200,
    "gaze.window": 10,
    # world-camera trigger
    "trigger.theta": 0.5,
    # RoI selection
    "roi.max_candidates": 10,
    "roi.question": DEFAULT_QUESTION,
    # fusion head dimensions
    "fusion.d_vis": 2048,
    "fusion.d_eye": 130,
    "fusion.r_max": 10,
    "fusion.se_reduction": 4,
    # head training
    "train.lr": 0.001,
    "train.batch": 512,
    "train.epochs": 500,
    "train.seed": 0,
    # provider transport
    "provider.timeout_s": 5.0,
    # pipeline capture policy
    "pipeline.off_streak": 15,
}


class Config:
    """Immutable-ish view over layered key = value settings."""

    def __init__(self, values: Optional[Dict[str, object]] = None):
        self._values = dict(DEFAULTS)
        if values:
            for key, val in values.items():
                self.set(key, val)

    def set(self, key: str, value) -> None:
        if key not in DEFAULTS:
            raise InputError(f"unknown config key {key!r}")
        default = DEFAULTS[key]
        try:
            if isinstance(default, int) and not isinstance(default, bool):
                self._values[key] = int(value)
            elif isinstance(default, float):
                self._values[key] = float(value)
            else:
                self._values[key] = str(value)
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad value {value!r} for config key {key!r}") from exc

    def __getitem__(self, key: str):
        if key not in self._values:
            raise InputError(f"unknown config key {key!r}")
        return self._values[key]

    def items(self):
        return self._values.items()

    def update_from_file(self, path: str) -> None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                lines = f.readlines()
        except OSError as exc:
            raise InputError(f"cannot read config file {path}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise InputError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            self.set(key.strip(), value.strip())


def load_config(path: Optional[str] = None,
                overrides: Optional[Dict[str, object]] = None) -> Config:
    """Build a Config applying the documented precedence order."""
    cfg = Config()
    env_path = os.environ.get("EMOSHIP_CONFIG")
    if env_path:
        cfg.update_from_file(env_path)
    if path:
        cfg.update_from_file(path)
    if overrides:
        for key, value in overrides.items():
            cfg.set(key, value)
    return cfg
