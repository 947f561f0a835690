"""Batch command-line interface.

Subcommands: ``sweep`` (occupation sweep to CSV/JSON, optional SVG plot),
``point`` (single occupation point), ``modes`` (export temporal-mode
profiles), ``selftest`` (oracle-equivalence suite).  All physical inputs
are dimensionless ratios to kappa.  Values come from, in increasing
precedence: defaults, ``--preset``, ``--config`` file, explicit flags.
Errors exit nonzero with a JSON diagnostic on stderr.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .sweep import (
    MODE_CHOICES,
    PRESETS,
    SweepConfig,
    emit_mode_profiles,
    run_point,
    run_sweep,
    selftest,
    write_sweep_csv,
    write_sweep_json,
)

_CONFIG_FIELDS = {field.name for field in dataclasses.fields(SweepConfig)}


def _physics_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    parser.add_argument("--config", type=Path, help="flat key = value config file")
    parser.add_argument("--g-over-kappa", type=float, dest="g_over_kappa")
    parser.add_argument("--gamma-over-kappa", type=float, dest="gamma_over_kappa")
    parser.add_argument("--kappa-tau", type=float, dest="kappa_tau")
    parser.add_argument("--eta", type=float)
    parser.add_argument("--theta", type=float)
    parser.add_argument(
        "--mode", choices=MODE_CHOICES, help="detected temporal mode (default optimal)"
    )


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levsqueeze",
        description="Conditional squeezing of a levitated oscillator from pulsed optomechanics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="sweep the equilibrium occupation nbar")
    _physics_flags(p_sweep)
    p_sweep.add_argument("--nbar-min", type=float, dest="nbar_min")
    p_sweep.add_argument("--nbar-max", type=float, dest="nbar_max")
    p_sweep.add_argument("--nbar-points", type=int, dest="nbar_points")
    p_sweep.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--svg", action="store_true", help="also render an SVG line plot")

    p_point = sub.add_parser("point", help="evaluate a single occupation point")
    _physics_flags(p_point)
    p_point.add_argument("--nbar", type=float, required=True)
    p_point.add_argument("--format", choices=("csv", "json"), default="json")

    p_modes = sub.add_parser("modes", help="export optimal and adiabatic mode profiles")
    _physics_flags(p_modes)
    p_modes.add_argument("--out", type=Path, default=Path("."), help="output directory")

    p_self = sub.add_parser("selftest", help="run the oracle-equivalence suite")
    p_self.add_argument("--n-bins", type=int, default=2**13, dest="n_bins")

    return parser


def _read_config_file(path: Path) -> dict:
    values: dict = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        if key == "mode":
            values[key] = value
        elif key == "nbar_points":
            values[key] = int(value)
        else:
            values[key] = float(value)
    return values


def _build_config(args: argparse.Namespace) -> SweepConfig:
    values: dict = {}
    if getattr(args, "preset", None):
        values.update(PRESETS[args.preset])
    if getattr(args, "config", None):
        values.update(_read_config_file(args.config))
    for field in _CONFIG_FIELDS:
        flag = getattr(args, field, None)
        if flag is not None:
            values[field] = flag
    missing = {"g_over_kappa", "gamma_over_kappa", "kappa_tau"} - set(values)
    if missing:
        raise ValueError(
            f"missing required parameters {sorted(missing)}; pass flags, --preset or --config"
        )
    return SweepConfig(**values)


def _row_csv(row) -> str:
    from .sweep import CSV_COLUMNS

    head = ",".join(CSV_COLUMNS)
    body = ",".join(
        getattr(row, col) if col == "mode" else repr(getattr(row, col)) for col in CSV_COLUMNS
    )
    return f"{head}\n{body}"


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _build_config(args)
    rows = run_sweep(config)
    args.out.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        table = args.out / "sweep.csv"
        write_sweep_csv(table, config, rows)
    else:
        table = args.out / "sweep.json"
        write_sweep_json(table, config, rows)
    written = [str(table)]
    if args.svg:
        from .svg import line_plot_svg

        plot = args.out / "sweep.svg"
        line_plot_svg(
            [(config.mode, [r.nbar for r in rows], [r.s_cond_db for r in rows])],
            plot,
            xlabel="equilibrium occupation nbar",
            ylabel="conditional squeezing (dB)",
            title=f"g/k={config.g_over_kappa:g} kt={config.kappa_tau:g} eta={config.eta:g}",
        )
        written.append(str(plot))
    print("\n".join(written))
    return 0


def _cmd_point(args: argparse.Namespace) -> int:
    config = _build_config(args)
    row = run_point(config, args.nbar)
    if args.format == "json":
        payload = dataclasses.asdict(row)
        del payload["wall_time_s"]
        print(json.dumps(payload))
    else:
        print(_row_csv(row))
    return 0


def _cmd_modes(args: argparse.Namespace) -> int:
    config = _build_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "modes.csv"
    overlap = emit_mode_profiles(config, path)
    print(f"{path}\noverlap = {overlap!r}")
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    return 0 if selftest(n_bins=args.n_bins) else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "point": _cmd_point,
        "modes": _cmd_modes,
        "selftest": _cmd_selftest,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:  # surface every failure as machine-readable JSON
        print(
            json.dumps({"error": str(exc), "type": type(exc).__name__}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
