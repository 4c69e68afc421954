"""Programmable-communicating-thermostat logic on the quantized measurement grid.

The thermostat measures temperature with integer resolution R over a range of
twice the deadband, centered on the setpoint: grid index m in [0, R] maps to

    theta(m) = theta_s - deadband * (1 - 2m/R)

so m = 0 is theta_s - deadband, m = R/2 is the setpoint, m = R is
theta_s + deadband. The hysteresis switching boundaries sit a quarter of the
grid (deadband/2 in temperature) on either side of the broadcast set-point
index m_s, and the set-point offset itself is limited to R/8 index units
(deadband/4). R must be a multiple of 8 so both offsets are exact integers.

All functions accept numpy arrays in place of scalar n/m/theta arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .building import BuildingParams, BuildingState

__all__ = [
    "ThermostatConfig",
    "PowerStateVector",
    "quantize",
    "measurement_temperature",
    "hysteresis_update",
    "report_power_state",
]


@dataclass(frozen=True)
class ThermostatConfig:
    """Group-wide setpoint (degC), deadband (degC) and grid resolution."""

    setpoint: float = 20.0
    deadband: float = 1.0
    resolution: int = 1000

    def __post_init__(self) -> None:
        if not (math.isfinite(self.setpoint) and math.isfinite(self.deadband)):
            raise ValueError("setpoint and deadband must be finite")
        if self.deadband <= 0.0:
            raise ValueError(f"deadband must be > 0, got {self.deadband!r}")
        if self.resolution < 8 or self.resolution % 8 != 0:
            raise ValueError(
                f"resolution must be >= 8 and divisible by 8, got {self.resolution}"
            )

    @property
    def grid_step(self) -> float:
        """Temperature increment per index unit (degC): 2*deadband / R."""
        return 2.0 * self.deadband / self.resolution

    @property
    def measurement_range(self) -> float:
        """Total measured span (degC), twice the deadband."""
        return 2.0 * self.deadband

    @property
    def switch_offset(self) -> int:
        """Index distance from the set-point index to a switching boundary (R/4)."""
        return self.resolution // 4

    @property
    def ms_min(self) -> int:
        """Lowest admissible set-point index (3R/8), i.e. offset -deadband/4."""
        return 3 * self.resolution // 8

    @property
    def ms_max(self) -> int:
        """Highest admissible set-point index (5R/8), i.e. offset +deadband/4."""
        return 5 * self.resolution // 8


@dataclass(frozen=True)
class PowerStateVector:
    """One unit's report: machine state, quantized temperature index, rated kW."""

    machine_state: int
    temperature_index: int
    rated_power: float

    def __post_init__(self) -> None:
        if self.machine_state not in (0, 1):
            raise ValueError(f"machine_state must be 0 or 1, got {self.machine_state!r}")
        if self.temperature_index < 0:
            raise ValueError(f"temperature_index must be >= 0, got {self.temperature_index}")
        if not (math.isfinite(self.rated_power) and self.rated_power > 0.0):
            raise ValueError(f"rated_power must be finite and > 0, got {self.rated_power!r}")


def quantize(theta_a, cfg: ThermostatConfig):
    """Map temperature(s) to the nearest grid index, clamped to [0, R].

    Rounding is half away from zero (symmetric about the setpoint);
    out-of-range temperatures saturate at the grid ends.
    """
    x = (np.asarray(theta_a, dtype=float) - cfg.setpoint + cfg.deadband) / cfg.grid_step
    m = np.where(x >= 0.0, np.floor(x + 0.5), np.ceil(x - 0.5))
    m = np.clip(m, 0, cfg.resolution).astype(np.int64)
    return int(m) if np.ndim(theta_a) == 0 else m


def measurement_temperature(m: int, cfg: ThermostatConfig) -> float:
    """Grid temperature of index m: theta_s + deadband*(2m/R - 1)."""
    if not 0 <= m <= cfg.resolution:
        raise ValueError(f"index {m} outside [0, {cfg.resolution}]")
    return cfg.setpoint + cfg.deadband * (2.0 * m / cfg.resolution - 1.0)


def hysteresis_update(n, m, m_s: int, cfg: ThermostatConfig):
    """Heating-mode deadband switch evaluated on the measurement grid.

    Switch on at or below m_s - R/4, off at or above m_s + R/4, hold in
    between. Boundary equality switches. m_s must lie in the admissible
    interval [3R/8, 5R/8].
    """
    if not cfg.ms_min <= m_s <= cfg.ms_max:
        raise ValueError(
            f"set-point index {m_s} outside admissible [{cfg.ms_min}, {cfg.ms_max}]"
        )
    lower = m_s - cfg.switch_offset
    upper = m_s + cfg.switch_offset
    m_arr = np.asarray(m)
    n_new = np.where(m_arr <= lower, 1, np.where(m_arr >= upper, 0, n))
    return int(n_new) if np.ndim(m) == 0 else n_new.astype(np.int8)


def report_power_state(state: BuildingState, params: BuildingParams,
                       cfg: ThermostatConfig) -> PowerStateVector:
    """Assemble the unit's report [n, quantize(theta_a), P_h]."""
    return PowerStateVector(
        machine_state=state.machine_state,
        temperature_index=quantize(state.indoor_temp, cfg),
        rated_power=params.rated_power,
    )
