"""File formats: exogenous series ingestion and all run outputs.

Exogenous input is delimited text with the header
``timestamp,wind_speed_mps,outdoor_temp_c`` where timestamp is minutes from
simulation start. Rows are held (zero-order) onto the thermostat interval
grid; the file must cover the horizon plus one interval of foreknowledge.

All numeric output is written with repr(), so values round-trip exactly and
identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .engine import ScenarioSeries, SimulationClock
from .errors import SeriesError

__all__ = [
    "ExogenousSeries",
    "ingest_series",
    "write_exogenous",
    "write_series",
    "read_series",
    "write_histogram",
    "write_manifest",
    "write_summary",
]

EXOGENOUS_HEADER = ["timestamp", "wind_speed_mps", "outdoor_temp_c"]

SERIES_HEADER = [
    "k", "P_N_kw", "P_W_kw", "P_H_kw", "P_L_kw", "phi", "phi_target",
    "u_degC", "phi_min", "phi_max", "mean_theta_degC",
]


@dataclass(frozen=True)
class ExogenousSeries:
    """Wind speed and outdoor temperature resampled onto the interval grid."""

    timestamps_min: np.ndarray
    wind_mps: np.ndarray
    outdoor_c: np.ndarray


def _fmt(x) -> str:
    return repr(float(x))


def ingest_series(path, clock: SimulationClock) -> ExogenousSeries:
    """Read and resample an exogenous series file for the given clock.

    Requires strictly increasing timestamps starting at or before zero and
    coverage through horizon * dt (horizon + 1 grid points, one step of
    foreknowledge for the regulation target).
    """
    p = Path(path)
    if not p.is_file():
        raise SeriesError(f"series file not found: {p}")
    with p.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SeriesError(f"{p}: empty file") from None
        if [h.strip() for h in header] != EXOGENOUS_HEADER:
            raise SeriesError(
                f"{p}: expected header {','.join(EXOGENOUS_HEADER)}, "
                f"got {','.join(header)}"
            )
        t, wind, temp = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SeriesError(f"{p}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                values = [float(x) for x in row]
            except ValueError:
                raise SeriesError(f"{p}:{lineno}: non-numeric field in {row}") from None
            if not all(np.isfinite(values)):
                raise SeriesError(f"{p}:{lineno}: non-finite value in {row}")
            t.append(values[0])
            wind.append(values[1])
            temp.append(values[2])
    if not t:
        raise SeriesError(f"{p}: no data rows")
    ts = np.asarray(t)
    if (np.diff(ts) <= 0).any():
        raise SeriesError(f"{p}: timestamps must be strictly increasing")
    if (np.asarray(wind) < 0).any():
        raise SeriesError(f"{p}: wind speeds must be >= 0")

    samples = clock.horizon + 1
    grid = np.arange(samples) * clock.dt_minutes
    if ts[0] > 0.0:
        raise SeriesError(f"{p}: first timestamp {ts[0]} is after the grid start 0")
    if ts[-1] < grid[-1]:
        raise SeriesError(
            f"{p}: series ends at {ts[-1]} min but the run needs coverage through "
            f"{grid[-1]} min ({clock.horizon} intervals plus one step of foreknowledge)"
        )
    idx = np.searchsorted(ts, grid, side="right") - 1
    return ExogenousSeries(
        timestamps_min=grid,
        wind_mps=np.asarray(wind)[idx],
        outdoor_c=np.asarray(temp)[idx],
    )


def write_exogenous(path, timestamps_min, wind_mps, outdoor_c) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EXOGENOUS_HEADER)
        for t, w, c in zip(timestamps_min, wind_mps, outdoor_c):
            writer.writerow([_fmt(t), _fmt(w), _fmt(c)])


def write_series(path, series: ScenarioSeries) -> None:
    """Write the fixed per-interval column set of one run."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_HEADER)
        for i in range(len(series)):
            writer.writerow([
                int(series.k[i]),
                _fmt(series.nominal_kw[i]),
                _fmt(series.wind_kw[i]),
                _fmt(series.heatpump_kw[i]),
                _fmt(series.total_kw[i]),
                _fmt(series.phi[i]),
                _fmt(series.phi_target[i]),
                _fmt(series.u[i]),
                _fmt(series.phi_min[i]),
                _fmt(series.phi_max[i]),
                _fmt(series.mean_theta[i]),
            ])


def read_series(path) -> dict[str, np.ndarray]:
    """Read a series file back as column arrays keyed by header name."""
    p = Path(path)
    if not p.is_file():
        raise SeriesError(f"series file not found: {p}")
    with p.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SeriesError(f"{p}: empty file") from None
        columns: dict[str, list[float]] = {name: [] for name in header}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SeriesError(
                    f"{p}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                for name, value in zip(header, row):
                    columns[name].append(float(value))
            except ValueError:
                raise SeriesError(f"{p}:{lineno}: non-numeric field in {row}") from None
    return {name: np.asarray(values) for name, values in columns.items()}


def write_histogram(path, bin_centers, heights) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_center_kw_per_interval", "density"])
        for c, h in zip(bin_centers, heights):
            writer.writerow([_fmt(c), _fmt(h)])


def write_pddf_dump(path, k: int, pddf, decision) -> None:
    """Per-interval diagnostic dump of the densities and the decision."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        fh.write(f"# k={k} ms_min={decision.ms_min} ms_max={decision.ms_max} "
                 f"phi_min={_fmt(decision.phi_min)} phi_max={_fmt(decision.phi_max)} "
                 f"ms_star={decision.ms_star} u={_fmt(decision.u)} "
                 f"phi_target={_fmt(decision.phi_target)} "
                 f"phi_predicted={_fmt(decision.phi_predicted)}\n")
        writer = csv.writer(fh)
        writer.writerow(["m", "phi0", "phi1"])
        for m in range(pddf.resolution + 1):
            writer.writerow([m, _fmt(pddf.phi0[m]), _fmt(pddf.phi1[m])])


def write_manifest(path, config: RunConfig, version: str) -> None:
    """Resolved config plus code version; loadable back as a config."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    manifest = {"config": config.to_dict(), "meta": {"code_version": version}}
    p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def write_summary(path, summary: dict) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
