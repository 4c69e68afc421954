"""Target-signal generation and exogenous load models.

Three scenario policies drive the engine: a stochastic tracking target
(steady level plus a persistent AR(1) disturbance, clamped to the feasible
region), a saturation stress (target pinned above the feasible maximum), and
wind regulation (the aggregate heat pump load absorbs turbine fluctuations
by steering the total load toward the mean of its last two intervals).

The wind scenario composes a piecewise-linear diurnal nominal-load profile
with Gaussian fluctuations, a cut-in/rated/cut-out turbine power curve, and
wind-speed/outdoor-temperature inputs that are either ingested from a file
or synthesized by a mean-reverting process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aggregator import FeasibleRegion

__all__ = [
    "TurbineModel",
    "NominalLoadModel",
    "SyntheticWeather",
    "TrackingTarget",
    "IntervalContext",
    "TrackingScenario",
    "SaturationScenario",
    "WindScenario",
    "turbine_power",
    "nominal_load",
    "total_load",
    "wind_target",
    "power_gradient_density",
    "generate_weather",
]


@dataclass(frozen=True)
class TurbineModel:
    """Cut-in / rated / cut-out power curve with a cubic rise, count identical units."""

    cut_in: float = 3.0
    rated_speed: float = 12.0
    cut_out: float = 25.0
    rated_power: float = 2500.0
    turbine_count: int = 2

    def __post_init__(self) -> None:
        if not 0.0 < self.cut_in < self.rated_speed < self.cut_out:
            raise ValueError(
                "need 0 < cut_in < rated_speed < cut_out, got "
                f"{self.cut_in}, {self.rated_speed}, {self.cut_out}"
            )
        if self.rated_power <= 0.0:
            raise ValueError(f"rated_power must be > 0, got {self.rated_power!r}")
        if self.turbine_count < 0:
            raise ValueError(f"turbine_count must be >= 0, got {self.turbine_count}")


def turbine_power(wind_speed, model: TurbineModel):
    """Farm output (kW) for wind speed(s) in m/s.

    Zero below cut-in and at/above cut-out, rated at/above rated speed,
    cubic interpolation rated*(v^3 - v_ci^3)/(v_r^3 - v_ci^3) in between.
    """
    v = np.asarray(wind_speed, dtype=float)
    if (v < 0.0).any():
        raise ValueError("wind speed must be >= 0")
    v3 = v**3
    ci3 = model.cut_in**3
    r3 = model.rated_speed**3
    per_turbine = np.where(
        (v < model.cut_in) | (v >= model.cut_out),
        0.0,
        np.where(v >= model.rated_speed, model.rated_power,
                 model.rated_power * (v3 - ci3) / (r3 - ci3)),
    )
    out = model.turbine_count * per_turbine
    return float(out) if np.ndim(wind_speed) == 0 else out


@dataclass(frozen=True)
class NominalLoadModel:
    """Diurnal non-heat-pump demand: piecewise-linear anchors plus Gaussian noise.

    anchors is a sequence of (hour_of_day, kW) points, hours in [0, 24),
    interpolated periodically. Fluctuations have standard deviation equal to
    10% of the off-peak level.
    """

    anchors: tuple[tuple[float, float], ...] = (
        (0.0, 2500.0), (5.0, 2500.0), (8.0, 5000.0), (12.0, 3500.0),
        (17.0, 5500.0), (21.0, 4000.0),
    )
    off_peak_level: float = 2500.0

    def __post_init__(self) -> None:
        if len(self.anchors) == 0:
            raise ValueError("need at least one profile anchor")
        hours = [h for h, _ in self.anchors]
        if any(not 0.0 <= h < 24.0 for h in hours):
            raise ValueError("anchor hours must lie in [0, 24)")
        if hours != sorted(hours) or len(set(hours)) != len(hours):
            raise ValueError("anchor hours must be strictly increasing")
        if any(v <= 0.0 for _, v in self.anchors):
            raise ValueError("profile values must be > 0")
        if self.off_peak_level <= 0.0:
            raise ValueError(f"off_peak_level must be > 0, got {self.off_peak_level!r}")

    @property
    def fluctuation_sd(self) -> float:
        """Noise standard deviation, fixed at 10% of the off-peak level (kW)."""
        return 0.10 * self.off_peak_level

    def profile(self, time_of_day):
        """Noise-free profile value(s) at the given hour(s), periodic over 24 h."""
        hours = np.array([h for h, _ in self.anchors], dtype=float)
        values = np.array([v for _, v in self.anchors], dtype=float)
        # wrap the first anchor to hour+24 so interpolation is periodic
        xp = np.concatenate([hours, [hours[0] + 24.0]])
        fp = np.concatenate([values, [values[0]]])
        tod = np.mod(time_of_day, 24.0)
        # shift times before the first anchor into the wrapped segment
        tod = np.where(tod < hours[0], tod + 24.0, tod)
        out = np.interp(tod, xp, fp)
        return float(out) if np.ndim(time_of_day) == 0 else out


def nominal_load(time_of_day: float, rng_draw: float, model: NominalLoadModel) -> float:
    """One noisy nominal-load sample (kW), floored at zero."""
    if not 0.0 <= time_of_day < 24.0:
        raise ValueError(f"time_of_day must be in [0, 24), got {time_of_day!r}")
    return max(0.0, model.profile(time_of_day) + model.fluctuation_sd * rng_draw)


def total_load(nominal_kw: float, heatpump_kw: float, wind_kw: float) -> float:
    """Community total load: nominal plus heat pump demand minus wind generation."""
    if not all(math.isfinite(x) for x in (nominal_kw, heatpump_kw, wind_kw)):
        raise ValueError("total_load inputs must be finite")
    return nominal_kw + heatpump_kw - wind_kw


def wind_target(wind_next_kw: float, nominal_next_kw: float, load_now_kw: float,
                load_prev_kw: float, installed_capacity_kw: float) -> float:
    """Capacity-factor target that steers the next total load toward the
    average of the last two intervals. Returned unclamped; the aggregator
    clamps to the feasible region."""
    if not installed_capacity_kw > 0.0:
        raise ValueError("installed_capacity_kw must be > 0")
    return (wind_next_kw - nominal_next_kw
            + 0.5 * (load_now_kw + load_prev_kw)) / installed_capacity_kw


class TrackingTarget:
    """Persistent stochastic tracking signal around a steady level.

    Internally keeps a unit-variance AR(1) state z; each update scales it to
    the requested fraction of the current feasible half-width and clamps the
    result into the region.
    """

    def __init__(self, coefficient: float = 0.9, scale: float = 0.25):
        if not 0.0 <= coefficient < 1.0:
            raise ValueError(f"coefficient must be in [0, 1), got {coefficient!r}")
        self.coefficient = coefficient
        self.scale = scale
        self._z = 0.0

    def update(self, phi_steady: float, rng_draw: float,
               region: tuple[float, float]) -> float:
        phi_lo, phi_hi = region
        if phi_lo > phi_hi:
            raise ValueError(f"empty region [{phi_lo}, {phi_hi}]")
        c = self.coefficient
        self._z = c * self._z + math.sqrt(1.0 - c * c) * rng_draw
        half_width = 0.5 * (phi_hi - phi_lo)
        raw = phi_steady + self.scale * half_width * self._z
        return min(max(raw, phi_lo), phi_hi)


def power_gradient_density(series, normalize: bool = True, bins: int = 101):
    """Histogram of one-interval load changes, symmetric about zero.

    Returns (bin_centers, heights). With normalize set, heights are divided
    by the peak bin; otherwise they are probability densities. bins must be
    odd so zero falls at the center of the middle bin.
    """
    values = np.asarray(series, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two samples to difference")
    if bins < 1 or bins % 2 == 0:
        raise ValueError(f"bins must be a positive odd integer, got {bins}")
    diffs = np.diff(values)
    half_range = float(np.max(np.abs(diffs)))
    if half_range == 0.0:
        half_range = 1.0
    edges = np.linspace(-half_range, half_range, bins + 1)
    counts, _ = np.histogram(diffs, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    if normalize:
        heights = counts / counts.max()
    else:
        width = edges[1] - edges[0]
        heights = counts / (counts.sum() * width)
    return centers, heights


@dataclass(frozen=True)
class SyntheticWeather:
    """Mean-reverting wind-speed and outdoor-temperature generator parameters."""

    wind_mean: float = 8.0
    wind_sd: float = 2.0
    wind_reversion_per_hour: float = 2.0
    temp_mean: float = 8.0
    temp_sd: float = 1.5
    temp_reversion_per_hour: float = 0.2

    def __post_init__(self) -> None:
        if self.wind_sd < 0.0 or self.temp_sd < 0.0:
            raise ValueError("standard deviations must be >= 0")
        if self.wind_reversion_per_hour <= 0.0 or self.temp_reversion_per_hour <= 0.0:
            raise ValueError("reversion rates must be > 0")


def _ou_series(rng: np.random.Generator, n: int, mean: float, sd: float,
               reversion_per_hour: float, dt_hours: float) -> np.ndarray:
    """Exact-discretization Ornstein-Uhlenbeck path of n samples."""
    decay = math.exp(-reversion_per_hour * dt_hours)
    innovation_sd = sd * math.sqrt(1.0 - decay * decay)
    draws = rng.standard_normal(n)
    out = np.empty(n)
    x = mean + sd * draws[0]
    out[0] = x
    for i in range(1, n):
        x = mean + (x - mean) * decay + innovation_sd * draws[i]
        out[i] = x
    return out


def generate_weather(weather: SyntheticWeather, samples: int, dt_minutes: float,
                     rng: np.random.Generator):
    """Synthesize (timestamps_min, wind_mps, outdoor_c) on the interval grid."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    dt_hours = dt_minutes / 60.0
    t = np.arange(samples) * dt_minutes
    wind = _ou_series(rng, samples, weather.wind_mean, weather.wind_sd,
                      weather.wind_reversion_per_hour, dt_hours)
    temp = _ou_series(rng, samples, weather.temp_mean, weather.temp_sd,
                      weather.temp_reversion_per_hour, dt_hours)
    return t, np.maximum(wind, 0.0), temp


@dataclass
class IntervalContext:
    """Everything a target policy may consult when asked for the next target.

    phi_now is the reported capacity factor; phi_hold is what it becomes next
    interval if the set-point offset stays zero.
    """

    k: int
    phi_now: float
    phi_hold: float
    region: FeasibleRegion
    installed_capacity: float
    rng: np.random.Generator
    nominal_next_kw: float = 0.0
    wind_next_kw: float = 0.0
    load_now_kw: float | None = None
    load_prev_kw: float | None = None


class TrackingScenario:
    """Fig.-1 style signal tracking: constant outdoor temperature, no wind or
    nominal load, stochastic feasible target after the burn-in."""

    def __init__(self, outdoor_temp: float = 4.0, burn_in: int = 100,
                 phi_steady: float | None = None, ar_coefficient: float = 0.9,
                 disturbance_scale: float = 0.25):
        if burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {burn_in}")
        self.outdoor_temp_value = outdoor_temp
        self.burn_in = burn_in
        self.phi_steady = phi_steady
        self._signal = TrackingTarget(ar_coefficient, disturbance_scale)
        self._steady: float | None = phi_steady

    def prepare(self, horizon: int, dt_minutes: float, rng: np.random.Generator) -> None:
        n = horizon + 1
        self.outdoor_c = np.full(n, self.outdoor_temp_value)
        self.nominal_kw = np.zeros(n)
        self.wind_kw = np.zeros(n)

    def phi_target(self, ctx: IntervalContext) -> float | None:
        if ctx.k < self.burn_in:
            return None
        if self._steady is None:
            self._steady = ctx.phi_now
        draw = float(ctx.rng.standard_normal())
        return self._signal.update(self._steady, draw,
                                   (ctx.region.phi_min, ctx.region.phi_max))


class SaturationScenario:
    """Stress policy: demand more than the feasible maximum every interval."""

    def __init__(self, outdoor_temp: float = 4.0, burn_in: int = 100,
                 overshoot: float = 0.1):
        self.outdoor_temp_value = outdoor_temp
        self.burn_in = burn_in
        self.overshoot = overshoot

    def prepare(self, horizon: int, dt_minutes: float, rng: np.random.Generator) -> None:
        n = horizon + 1
        self.outdoor_c = np.full(n, self.outdoor_temp_value)
        self.nominal_kw = np.zeros(n)
        self.wind_kw = np.zeros(n)

    def phi_target(self, ctx: IntervalContext) -> float | None:
        if ctx.k < self.burn_in:
            return None
        return ctx.region.phi_max + self.overshoot


class WindScenario:
    """Wind-regulation scenario: turbines plus diurnal nominal load.

    weather is either a SyntheticWeather generator config or a pre-ingested
    (wind_mps, outdoor_c) array pair covering horizon+1 intervals. The
    controller reads the exogenous arrays one step ahead (perfect one-step
    foreknowledge). With controlled=False the policy never requests a
    target, leaving every set-point offset at zero.
    """

    def __init__(self, turbine: TurbineModel, nominal: NominalLoadModel,
                 weather: SyntheticWeather | tuple[np.ndarray, np.ndarray],
                 burn_in: int = 100, controlled: bool = True,
                 start_hour: float = 0.0):
        if burn_in < 2:
            raise ValueError(
                f"wind regulation needs burn_in >= 2 to seed the load history, got {burn_in}"
            )
        self.turbine = turbine
        self.nominal = nominal
        self.weather = weather
        self.burn_in = burn_in
        self.controlled = controlled
        self.start_hour = start_hour

    def prepare(self, horizon: int, dt_minutes: float, rng: np.random.Generator) -> None:
        n = horizon + 1
        if isinstance(self.weather, SyntheticWeather):
            _, wind_mps, outdoor = generate_weather(self.weather, n, dt_minutes, rng)
        else:
            wind_mps, outdoor = self.weather
            if len(wind_mps) < n or len(outdoor) < n:
                raise ValueError(
                    f"weather series of length {len(wind_mps)} cannot cover "
                    f"{horizon} intervals plus one step of foreknowledge"
                )
            wind_mps = np.asarray(wind_mps, dtype=float)[:n]
            outdoor = np.asarray(outdoor, dtype=float)[:n]
        self.outdoor_c = outdoor
        self.wind_kw = turbine_power(wind_mps, self.turbine)
        tod = np.mod(self.start_hour + np.arange(n) * dt_minutes / 60.0, 24.0)
        draws = rng.standard_normal(n)
        self.nominal_kw = np.maximum(
            0.0, self.nominal.profile(tod) + self.nominal.fluctuation_sd * draws
        )

    def phi_target(self, ctx: IntervalContext) -> float | None:
        if not self.controlled or ctx.k < self.burn_in:
            return None
        if ctx.load_now_kw is None or ctx.load_prev_kw is None:
            return None
        return wind_target(ctx.wind_next_kw, ctx.nominal_next_kw,
                           ctx.load_now_kw, ctx.load_prev_kw,
                           ctx.installed_capacity)
