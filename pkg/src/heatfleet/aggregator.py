"""Central controller: power-density distributions and set-point selection.

Reports are folded into one power-weighted histogram per machine state over
the thermostat grid (the power density distribution functions phi0, phi1).
Because every thermostat switches on the same quantized measurement it
reported, the next-interval capacity factor is an exact function of the
candidate set-point index m_s:

    Phi(k+1, m_s) = sum_{m <= m_s - R/4} phi0(m) dtheta
                  + sum_{m <  m_s + R/4} phi1(m) dtheta

The off-state sum includes its boundary (units at the switch-on threshold
turn on); the on-state sum excludes its boundary (units at the switch-off
threshold turn off). Both follow the <=/>= switching of the deadband rule;
with this convention the prediction matches the realized capacity factor to
floating-point roundoff.

The capacity-factor function is nondecreasing in m_s, so the deviation
minimization over the admissible integer interval is solved by monotone
bisection; equal-deviation ties resolve to the index closest to R/2
(least set-point disturbance).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .thermostat import PowerStateVector, ThermostatConfig

__all__ = [
    "PowerDensityPair",
    "FeasibleRegion",
    "ControlDecision",
    "build_pddf",
    "build_pddf_from_arrays",
    "capacity_factor",
    "cff",
    "feasible_region",
    "max_cff_increment",
    "select_setpoint",
    "verify_boundary_condition",
]


@dataclass(frozen=True)
class PowerDensityPair:
    """Discrete PDDFs over the measurement grid.

    phi0/phi1 are densities per degC for the inactive/active states, indexed
    by m in [0, R]; phi * grid_step is the fraction of installed capacity in
    that bin. installed_capacity is the sum of all rated powers (kW).
    """

    phi0: np.ndarray
    phi1: np.ndarray
    grid_step: float
    installed_capacity: float
    # cumulative capacity fractions, cached for O(1) CFF evaluation
    _cum0: np.ndarray = field(init=False, repr=False, compare=False)
    _cum1: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        phi0 = np.asarray(self.phi0, dtype=float)
        phi1 = np.asarray(self.phi1, dtype=float)
        if phi0.shape != phi1.shape or phi0.ndim != 1:
            raise ValueError("phi0 and phi1 must be 1-d arrays of equal length")
        if phi0.size < 2:
            raise ValueError("need at least two grid points")
        if (phi0 < 0.0).any() or (phi1 < 0.0).any():
            raise ValueError("densities must be nonnegative")
        if not self.installed_capacity > 0.0:
            raise ValueError("installed_capacity must be > 0")
        if not self.grid_step > 0.0:
            raise ValueError("grid_step must be > 0")
        object.__setattr__(self, "phi0", phi0)
        object.__setattr__(self, "phi1", phi1)
        object.__setattr__(self, "_cum0", np.cumsum(phi0 * self.grid_step))
        object.__setattr__(self, "_cum1", np.cumsum(phi1 * self.grid_step))

    @property
    def resolution(self) -> int:
        """Grid resolution R (arrays have R+1 entries)."""
        return self.phi0.size - 1

    def total_mass(self) -> float:
        """sum (phi0 + phi1) * grid_step; 1.0 for any PDDF built from reports."""
        return float(self._cum0[-1] + self._cum1[-1])


class FeasibleRegion(NamedTuple):
    """Admissible set-point indices and the capacity factors they reach."""

    ms_min: int
    ms_max: int
    phi_min: float
    phi_max: float


@dataclass(frozen=True)
class ControlDecision:
    """Outcome of one set-point selection."""

    ms_min: int
    ms_max: int
    phi_min: float
    phi_max: float
    ms_star: int
    u: float
    phi_target: float
    phi_predicted: float

    @property
    def clamped(self) -> bool:
        """True when the requested target fell outside the feasible region."""
        return self.phi_target < self.phi_min or self.phi_target > self.phi_max


def build_pddf_from_arrays(machine_state, temperature_index, rated_power,
                           cfg: ThermostatConfig) -> PowerDensityPair:
    """Vectorized PDDF construction from aligned report arrays."""
    n = np.asarray(machine_state)
    m = np.asarray(temperature_index)
    p = np.asarray(rated_power, dtype=float)
    if n.size == 0:
        raise ValueError("cannot build a PDDF from zero reports")
    if (p <= 0.0).any():
        raise ValueError("all rated powers must be > 0")
    if (m < 0).any() or (m > cfg.resolution).any():
        raise ValueError("temperature index outside [0, R]")
    p_cap = float(p.sum())
    bins = cfg.resolution + 1
    on = n.astype(bool)
    w1 = np.bincount(m[on], weights=p[on], minlength=bins)
    w0 = np.bincount(m[~on], weights=p[~on], minlength=bins)
    norm = p_cap * cfg.grid_step
    return PowerDensityPair(
        phi0=w0 / norm,
        phi1=w1 / norm,
        grid_step=cfg.grid_step,
        installed_capacity=p_cap,
    )


def build_pddf(reports: Sequence[PowerStateVector], cfg: ThermostatConfig) -> PowerDensityPair:
    """Fold power-state reports into the per-state power density pair."""
    if len(reports) == 0:
        raise ValueError("cannot build a PDDF from zero reports")
    n = np.fromiter((r.machine_state for r in reports), dtype=np.int8, count=len(reports))
    m = np.fromiter((r.temperature_index for r in reports), dtype=np.int64, count=len(reports))
    p = np.fromiter((r.rated_power for r in reports), dtype=float, count=len(reports))
    return build_pddf_from_arrays(n, m, p, cfg)


def capacity_factor(pddf: PowerDensityPair) -> float:
    """Current aggregate draw as a fraction of installed capacity."""
    return float(pddf._cum1[-1])


def _cff_from_cums(pddf: PowerDensityPair, m_s: int, cfg: ThermostatConfig) -> float:
    eps_minus = m_s - cfg.switch_offset
    eps_plus = m_s + cfg.switch_offset
    return float(pddf._cum0[eps_minus] + pddf._cum1[eps_plus - 1])


def cff(pddf: PowerDensityPair, m_s: int, cfg: ThermostatConfig) -> float:
    """Capacity-factor function: predicted next-interval Phi for set-point index m_s."""
    if pddf.resolution != cfg.resolution:
        raise ValueError(
            f"PDDF resolution {pddf.resolution} does not match config {cfg.resolution}"
        )
    if not cfg.ms_min <= m_s <= cfg.ms_max:
        raise ValueError(
            f"set-point index {m_s} outside admissible [{cfg.ms_min}, {cfg.ms_max}]"
        )
    return _cff_from_cums(pddf, m_s, cfg)


def feasible_region(pddf: PowerDensityPair, cfg: ThermostatConfig) -> FeasibleRegion:
    """Achievable next-interval capacity factors under the quarter-deadband limit."""
    return FeasibleRegion(
        ms_min=cfg.ms_min,
        ms_max=cfg.ms_max,
        phi_min=cff(pddf, cfg.ms_min, cfg),
        phi_max=cff(pddf, cfg.ms_max, cfg),
    )


def _leftmost_index(pddf: PowerDensityPair, cfg: ThermostatConfig,
                    lo: int, hi: int, threshold: float, strict: bool) -> int:
    """Smallest m_s in [lo, hi] with cff > threshold (strict) or >= (not strict).

    Returns hi + 1 when no index qualifies. Valid because cff is
    nondecreasing in m_s.
    """
    if strict:
        ok = _cff_from_cums(pddf, hi, cfg) > threshold
    else:
        ok = _cff_from_cums(pddf, hi, cfg) >= threshold
    if not ok:
        return hi + 1
    while lo < hi:
        mid = (lo + hi) // 2
        value = _cff_from_cums(pddf, mid, cfg)
        if (value > threshold) if strict else (value >= threshold):
            hi = mid
        else:
            lo = mid + 1
    return lo


def select_setpoint(pddf: PowerDensityPair, phi_target: float,
                    cfg: ThermostatConfig) -> ControlDecision:
    """Pick the admissible set-point index whose predicted Phi is closest to the target.

    The squared-deviation minimizers form one contiguous run of indices
    (plateaus of equal cff,  plus both bracketing plateaus when the target is
    exactly midway); within it the index nearest R/2 is returned. Targets
    outside the feasible region clamp to the corresponding bound.
    """
    if not np.isfinite(phi_target):
        raise ValueError(f"phi_target must be finite, got {phi_target!r}")
    region = feasible_region(pddf, cfg)
    lo, hi = region.ms_min, region.ms_max

    first_ge = _leftmost_index(pddf, cfg, lo, hi, phi_target, strict=False)
    if first_ge > hi:
        # every achievable value is below the target: best value is cff(hi)
        run_lo = _leftmost_index(pddf, cfg, lo, hi, region.phi_max, strict=False)
        run_hi = hi
    elif first_ge == lo:
        # target at or below the lowest achievable value: best value is cff(lo)
        run_lo = lo
        run_hi = _leftmost_index(pddf, cfg, lo, hi, region.phi_min, strict=True) - 1
    else:
        below = _cff_from_cums(pddf, first_ge - 1, cfg)
        above = _cff_from_cums(pddf, first_ge, cfg)
        dev_below = (phi_target - below) ** 2
        dev_above = (above - phi_target) ** 2
        run_lo = run_hi = first_ge
        if dev_below <= dev_above:
            run_lo = _leftmost_index(pddf, cfg, lo, hi, below, strict=False)
            if dev_below < dev_above:
                run_hi = first_ge - 1
            else:
                run_hi = _leftmost_index(pddf, cfg, lo, hi, above, strict=True) - 1
        else:
            run_hi = _leftmost_index(pddf, cfg, lo, hi, above, strict=True) - 1

    center = cfg.resolution // 2
    ms_star = min(max(center, run_lo), run_hi)
    u = cfg.deadband * (2.0 * ms_star / cfg.resolution - 1.0)
    return ControlDecision(
        ms_min=region.ms_min,
        ms_max=region.ms_max,
        phi_min=region.phi_min,
        phi_max=region.phi_max,
        ms_star=ms_star,
        u=u,
        phi_target=float(phi_target),
        phi_predicted=_cff_from_cums(pddf, ms_star, cfg),
    )


def max_cff_increment(pddf: PowerDensityPair, cfg: ThermostatConfig) -> float:
    """Largest one-index CFF step over the admissible interval.

    This is the granularity of the capacity factors reachable from the
    current PDDF: any feasible target can be met to within one such step.
    """
    if pddf.resolution != cfg.resolution:
        raise ValueError(
            f"PDDF resolution {pddf.resolution} does not match config {cfg.resolution}"
        )
    lo, hi, off = cfg.ms_min, cfg.ms_max, cfg.switch_offset
    mass0 = pddf.phi0 * pddf.grid_step
    mass1 = pddf.phi1 * pddf.grid_step
    # stepping m_s -> m_s+1 newly includes bin m_s+1-off of phi0 and bin m_s+off of phi1
    steps = mass0[lo + 1 - off: hi + 1 - off] + mass1[lo + off: hi + off]
    return float(steps.max()) if steps.size else 0.0


def verify_boundary_condition(pddf_before: PowerDensityPair, m_s: int,
                              pddf_after: PowerDensityPair,
                              cfg: ThermostatConfig) -> float:
    """Residual between the predicted and realized post-switch capacity factor.

    pddf_after must come from the same population immediately after the
    synchronized switch with set-point index m_s, before any thermal drift.
    The residual is zero up to roundoff when the prediction is exact.
    """
    if pddf_before.resolution != pddf_after.resolution:
        raise ValueError("PDDF resolutions differ")
    if pddf_before.installed_capacity != pddf_after.installed_capacity:
        raise ValueError("installed capacities differ; not the same population")
    return abs(capacity_factor(pddf_after) - cff(pddf_before, m_s, cfg))
