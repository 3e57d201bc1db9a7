"""Duty-cycle energy model: per-stage operation time accounting and battery
life under a measured power profile.

E = T_on * (P_eye_cam + P_eye_track) + T_eye_net * P_eye_net + T_cap * P_world

The record-everything comparison point keeps only the two cameras on
(eye camera + world camera, no eye-network term).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict

from .errors import DataError, InputError

# Measured on the target wearable platform.
PAPER_PROFILE_VALUES = {
    "p_eye_camera": 0.07,
    "p_eye_tracking": 0.1,
    "p_world_camera": 1.3,
    "p_neye": 1.1,
    "battery_wh": 2.1,
}

MS_PER_HOUR = 3_600_000.0


@dataclass(frozen=True)
class PowerProfile:
    p_eye_camera: float  # W
    p_eye_tracking: float
    p_world_camera: float
    p_neye: float
    battery_wh: float

    def __post_init__(self):
        for name in ("p_eye_camera", "p_eye_tracking", "p_world_camera",
                     "p_neye", "battery_wh"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be >= 0")

    @classmethod
    def paper_defaults(cls) -> "PowerProfile":
        return cls(**PAPER_PROFILE_VALUES)

    @classmethod
    def load(cls, path) -> "PowerProfile":
        values: Dict[str, float] = {}
        try:
            with open(path, "r", encoding="utf-8") as f:
                for lineno, line in enumerate(f, start=1):
                    stripped = line.strip()
                    if not stripped or stripped.startswith("#"):
                        continue
                    if "=" not in stripped:
                        raise InputError(f"{path}:{lineno}: expected 'key = value'")
                    key, _, val = stripped.partition("=")
                    key = key.strip()
                    if key not in PAPER_PROFILE_VALUES:
                        raise InputError(f"{path}:{lineno}: unknown key {key!r}")
                    try:
                        values[key] = float(val)
                    except ValueError as exc:
                        raise InputError(f"{path}:{lineno}: bad number {val!r}") from exc
        except OSError as exc:
            raise InputError(f"cannot read power profile {path}: {exc}") from exc
        missing = [k for k in PAPER_PROFILE_VALUES if k not in values]
        if missing:
            raise InputError(f"{path}: missing keys {missing}")
        return cls(**values)


class UsageLedger:
    """Per-stage operation times, accumulated in milliseconds during replay."""

    def __init__(self):
        self.t_always_on_ms = 0
        self.t_neye_ms = 0
        self.t_captured_ms = 0

    def accrue(self, dt_ms: int, neye_active: bool, capturing: bool) -> None:
        if dt_ms < 0:
            raise DataError("cannot accrue negative time")
        self.t_always_on_ms += dt_ms
        if neye_active:
            self.t_neye_ms += dt_ms
        if capturing:
            self.t_captured_ms += dt_ms
        self._check()

    def _check(self) -> None:
        if not (0 <= self.t_neye_ms <= self.t_always_on_ms):
            raise DataError("ledger invariant violated: t_neye outside [0, t_on]")
        if not (0 <= self.t_captured_ms <= self.t_always_on_ms):
            raise DataError("ledger invariant violated: t_captured outside [0, t_on]")

    # hour views for the energy formula
    @property
    def t_always_on_h(self) -> float:
        return self.t_always_on_ms / MS_PER_HOUR

    @property
    def t_neye_h(self) -> float:
        return self.t_neye_ms / MS_PER_HOUR

    @property
    def t_captured_h(self) -> float:
        return self.t_captured_ms / MS_PER_HOUR

    def to_text(self) -> str:
        lines = [
            f"t_always_on_ms = {self.t_always_on_ms}",
            f"t_neye_ms = {self.t_neye_ms}",
            f"t_captured_ms = {self.t_captured_ms}",
            f"t_always_on_min = {self.t_always_on_ms / 60000.0!r}",
            f"t_neye_min = {self.t_neye_ms / 60000.0!r}",
            f"t_captured_min = {self.t_captured_ms / 60000.0!r}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "UsageLedger":
        ledger = cls()
        values = {}
        for line in text.splitlines():
            stripped = line.strip()
            if not stripped:
                continue
            key, _, val = stripped.partition("=")
            values[key.strip()] = val.strip()
        try:
            ledger.t_always_on_ms = int(values["t_always_on_ms"])
            ledger.t_neye_ms = int(values["t_neye_ms"])
            ledger.t_captured_ms = int(values["t_captured_ms"])
        except (KeyError, ValueError) as exc:
            raise InputError(f"malformed ledger text: {exc}") from exc
        ledger._check()
        return ledger


def energy_wh(ledger: UsageLedger, profile: PowerProfile) -> float:
    """Consumed energy in watt-hours for an accumulated ledger."""
    return (ledger.t_always_on_h * (profile.p_eye_camera + profile.p_eye_tracking)
            + ledger.t_neye_h * profile.p_neye
            + ledger.t_captured_h * profile.p_world_camera)


def average_power_w(profile: PowerProfile, duty_neye: float,
                    duty_capture: float) -> float:
    if not (0.0 <= duty_neye <= 1.0 and 0.0 <= duty_capture <= 1.0):
        raise DataError("duty factors must lie in [0,1]")
    return (profile.p_eye_camera + profile.p_eye_tracking
            + duty_neye * profile.p_neye
            + duty_capture * profile.p_world_camera)


def battery_life_h(profile: PowerProfile, duty_neye: float,
                   duty_capture: float) -> float:
    """Hours of continuous operation; inf when the implied power is zero."""
    power = average_power_w(profile, duty_neye, duty_capture)
    if power == 0.0:
        return math.inf
    return profile.battery_wh / power


def record_everything_life_h(profile: PowerProfile) -> float:
    """Both cameras always on, no eye-network term."""
    power = profile.p_eye_camera + profile.p_world_camera
    if power == 0.0:
        return math.inf
    return profile.battery_wh / power
