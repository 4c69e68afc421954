"""Command-line entry points.

Subcommands:
    track      run the signal-tracking scenario
    wind       run the paired wind-regulation experiment (controlled + uncontrolled)
    gradient   post-process an existing series file into a power-gradient histogram
    gen-wind   emit a synthetic wind-speed / outdoor-temperature series

Exit codes: 0 success, 1 unexpected error, 2 configuration error,
3 series-input error, 4 simulation error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import seriesio
from .config import RunConfig, config_from_dict, load_raw, resolve_output_dir
from .errors import ConfigError, EngineError, SeriesError
from .scenarios import power_gradient_density

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_SERIES = 3
EXIT_ENGINE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatfleet",
        description="Comfort-constrained aggregate control of heat pump fleets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="JSON config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (overrides config and environment)")
        p.add_argument("--horizon", type=int, default=None,
                       help="override the number of simulated intervals")

    p_track = sub.add_parser("track", help="run the signal-tracking scenario")
    add_common(p_track)

    p_wind = sub.add_parser("wind", help="run the paired wind-regulation experiment")
    add_common(p_wind)

    p_grad = sub.add_parser("gradient",
                            help="histogram the total-load gradient of a series file")
    p_grad.add_argument("series_file", type=Path, help="series CSV produced by track/wind")
    p_grad.add_argument("--out", type=Path, default=None, help="output directory")
    p_grad.add_argument("--bins", type=int, default=101, help="odd number of bins")
    p_grad.add_argument("--raw-density", action="store_true",
                        help="emit probability density instead of peak-normalized")

    p_gen = sub.add_parser("gen-wind", help="emit a synthetic exogenous series")
    add_common(p_gen)

    return parser


def _load(args, scenario: str | None) -> RunConfig:
    raw = load_raw(args.config) if args.config is not None else {}
    if scenario is not None:
        # the subcommand decides the scenario before defaults resolve, so a
        # bare `wind` gets the wind-scale population and horizon
        raw = {**raw, "scenario": scenario}
    config = config_from_dict(raw)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.horizon is not None:
        if args.horizon < 0:
            raise ConfigError(f"--horizon must be >= 0, got {args.horizon}")
        updates["clock"] = dataclasses.replace(config.clock, horizon=args.horizon)
    return dataclasses.replace(config, **updates) if updates else config


def _cmd_track(args) -> int:
    from .runner import write_tracking_outputs

    config = _load(args, "tracking")
    out = write_tracking_outputs(config, args.out)
    print(f"tracking run complete: {out}")
    return EXIT_OK


def _cmd_wind(args) -> int:
    from .runner import write_wind_outputs

    config = _load(args, "wind")
    out = write_wind_outputs(config, args.out)
    print(f"wind run complete (controlled + uncontrolled): {out}")
    return EXIT_OK


def _cmd_gradient(args) -> int:
    columns = seriesio.read_series(args.series_file)
    if "P_L_kw" not in columns:
        raise SeriesError(f"{args.series_file}: no P_L_kw column")
    if columns["P_L_kw"].size < 2:
        raise SeriesError(f"{args.series_file}: need at least two rows to difference")
    centers, heights = power_gradient_density(
        columns["P_L_kw"], normalize=not args.raw_density, bins=args.bins)
    out = args.out if args.out is not None else Path(".")
    path = Path(out) / "gradient.csv"
    seriesio.write_histogram(path, centers, heights)
    print(f"gradient histogram written: {path}")
    return EXIT_OK


def _cmd_gen_wind(args) -> int:
    from .runner import generate_wind_file

    config = _load(args, None)
    path = generate_wind_file(config, args.out if args.out is not None
                              else resolve_output_dir(config))
    print(f"synthetic series written: {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "track": _cmd_track,
        "wind": _cmd_wind,
        "gradient": _cmd_gradient,
        "gen-wind": _cmd_gen_wind,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SeriesError as exc:
        print(f"series error: {exc}", file=sys.stderr)
        return EXIT_SERIES
    except EngineError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
