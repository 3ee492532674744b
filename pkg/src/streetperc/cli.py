"""Command-line entry points: validate, sweep, phase-diagram, dump.

Configuration is a plain ``key = value`` text file; command-line flags
override file values. Every run writes a manifest echoing the fully
resolved configuration, so any output file can be reproduced from its
manifest alone.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .experiments import (extract_double_critical, fit_logistic, phase_diagram,
                          sweep, FALLING, RISING, SWEEPABLE)
from .errors import DirectionError, NoTransitionError
from .geometry import Window, build_street_system, sample_poisson_points, street_statistics
from .percolation import outcome_to_dict, simulate_realization
from .placement import LABEL_POINTS, NetworkParams, derive_parameters, substream

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

# Relative tolerance for the geometry self-test against the closed forms.
VALIDATE_TOLERANCE = 0.02


@dataclass
class RunConfig:
    """Resolved run configuration; field names double as config-file keys."""

    street_intensity: float = 4.444e-5
    user_intensity: float = 0.036
    relay_prob: float = 1.0
    power: float = 1.0
    noise: float = 1e-8
    sinr_threshold: float = 1.0
    interference_factor: float = 0.004
    pathloss_exponent: float = 2.0
    pathloss_scale: float = 99.99
    window_side: float = 1500.0
    replications: int = 100
    seed: int = 0
    workers: int = 0
    sweep_param: str = "U"
    sweep_from: float = 0.0
    sweep_to: float = 10.0
    sweep_steps: int = 21
    out_dir: str = "."
    dump_realizations: bool = False
    verify_midpoint: bool = False

    def network_params(self) -> NetworkParams:
        return NetworkParams(
            street_intensity=self.street_intensity,
            user_intensity=self.user_intensity,
            relay_prob=self.relay_prob,
            power=self.power,
            noise=self.noise,
            sinr_threshold=self.sinr_threshold,
            interference_factor=self.interference_factor,
            pathloss_exponent=self.pathloss_exponent,
            pathloss_scale=self.pathloss_scale,
        )

    def window(self) -> Window:
        return Window(self.window_side)

    def grid(self) -> np.ndarray:
        if self.sweep_steps < 1:
            raise ParameterError(f"sweep_steps must be >= 1, got {self.sweep_steps}")
        return np.linspace(self.sweep_from, self.sweep_to, self.sweep_steps)


def _coerce(field_type, raw: str):
    if field_type is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ParameterError(f"expected a boolean, got {raw!r}")
    return field_type(raw)


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; '#' starts a comment."""
    fields = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    types = {"float": float, "int": int, "str": str, "bool": bool}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ParameterError(f"config line {lineno}: unknown key {key!r}")
        ftype = fields[key]
        if isinstance(ftype, str):
            ftype = types[ftype]
        values[key] = _coerce(ftype, raw)
    return RunConfig(**values)


def serialize_config(config: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(RunConfig):
        value = getattr(config, f.name)
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(args) -> RunConfig:
    """Config file plus flag overrides; flags win."""
    if args.config:
        config = parse_config(Path(args.config).read_text())
    else:
        config = RunConfig()
    overrides = {
        "seed": args.seed,
        "replications": args.reps,
        "window_side": args.window_side,
        "out_dir": args.out,
        "sweep_param": args.param,
        "sweep_from": getattr(args, "from_", None),
        "sweep_to": args.to,
        "sweep_steps": args.steps,
        "workers": args.workers,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    if getattr(args, "dump_realizations", False):
        config.dump_realizations = True
    if getattr(args, "verify_midpoint", False):
        config.verify_midpoint = True
    return config


def write_manifest(config: RunConfig, command: str, out_dir: Path) -> None:
    doc = {"command": command, "config": dataclasses.asdict(config)}
    (out_dir / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")


def cmd_validate(config: RunConfig) -> int:
    """Geometry self-test: empirical street statistics vs the closed forms."""
    params = config.network_params()  # validates the full configuration
    derived = derive_parameters(params)
    window = config.window()
    reps = config.replications

    vi, li, ml = [], [], []
    for i in range(reps):
        pts = sample_poisson_points(params.street_intensity, window,
                                    substream(config.seed, LABEL_POINTS, i))
        stats = street_statistics(build_street_system(pts, window), window)
        vi.append(stats.vertex_intensity)
        li.append(stats.line_intensity)
        ml.append(stats.mean_street_length)

    checks = [
        ("vertex intensity (m^-2)", float(np.mean(vi)), derived.vertex_intensity),
        ("line intensity (m^-1)", float(np.mean(li)), derived.line_intensity),
        ("mean street length (m)", float(np.mean(ml)), derived.mean_street_length),
    ]
    ok = True
    for name, measured, expected in checks:
        rel = abs(measured - expected) / expected
        passed = rel <= VALIDATE_TOLERANCE
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: "
              f"measured {measured:.6g}, expected {expected:.6g}, "
              f"rel. error {rel:.3%} (tolerance {VALIDATE_TOLERANCE:.0%}, "
              f"{reps} realizations)")
    return EXIT_OK if ok else EXIT_VALIDATION


def _write_curve_csv(curve, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["param", "value", "reps", "successes", "prob",
                         "ci_low", "ci_high", "status"])
        for p in curve.points:
            writer.writerow([curve.parameter, repr(p.value), p.replications,
                             p.successes, repr(p.probability), repr(p.ci_low),
                             repr(p.ci_high), p.status])


def cmd_sweep(config: RunConfig) -> int:
    params = config.network_params()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(config, "sweep", out_dir)

    curve = sweep(params, config.sweep_param, config.grid(), config.window(),
                  config.replications, config.seed,
                  workers=config.workers or None)
    _write_curve_csv(curve, out_dir / "sweep.csv")

    report = {"parameter": curve.parameter, "fits": []}
    ok = curve.ok_points()
    for direction in (RISING, FALLING):
        try:
            fit = fit_logistic(ok.values, ok.probabilities, ok.replications,
                               direction)
            report["fits"].append({
                "direction": fit.direction, "a": fit.slope, "b": fit.intercept,
                "mu_star": fit.critical_value, "residual": fit.residual,
            })
        except (NoTransitionError, DirectionError) as exc:
            report["fits"].append({"direction": direction, "error": str(exc)})
    if curve.parameter == "U":
        u1, u2 = extract_double_critical(curve)
        report["u1_star"] = u1
        report["u2_star"] = u2
    (out_dir / "fit.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote {out_dir / 'sweep.csv'} and {out_dir / 'fit.json'}")
    return EXIT_OK


def cmd_phase_diagram(config: RunConfig) -> int:
    params = config.network_params()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(config, "phase-diagram", out_dir)

    diagram = phase_diagram(config.grid(), params, config.window(),
                            config.replications, config.seed,
                            workers=config.workers or None,
                            verify_midpoint=config.verify_midpoint)
    path = out_dir / "phase_diagram.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["theta", "u1_star", "u2_star", "status"]
        if config.verify_midpoint:
            header.append("midpoint_prob")
        writer.writerow(header)
        for row in diagram.rows:
            record = [repr(row.theta),
                      "" if row.u1_star is None else repr(row.u1_star),
                      "" if row.u2_star is None else repr(row.u2_star),
                      row.status]
            if config.verify_midpoint:
                record.append("" if row.midpoint_probability is None
                              else repr(row.midpoint_probability))
            writer.writerow(record)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_dump(config: RunConfig) -> int:
    params = config.network_params()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(config, "dump", out_dir)

    outcome = simulate_realization(params, config.window(), config.seed)
    path = out_dir / "realization.json"
    path.write_text(json.dumps(outcome_to_dict(outcome), indent=2) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streetperc",
        description="SINR percolation on Poisson-Voronoi street systems")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("validate", "check street statistics against the closed forms"),
            ("sweep", "run a parameter sweep and fit the transition"),
            ("phase-diagram", "build the theta-U phase diagram"),
            ("dump", "write a single realization as JSON")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--seed", type=int, help="64-bit master seed")
        p.add_argument("--reps", type=int, help="replications per estimate")
        p.add_argument("--window-side", dest="window_side", type=float,
                       help="inner window side, metres")
        p.add_argument("--out", help="output directory")
        p.add_argument("--param", choices=SWEEPABLE, help="swept parameter")
        p.add_argument("--from", dest="from_", type=float, help="grid start")
        p.add_argument("--to", type=float, help="grid end")
        p.add_argument("--steps", type=int, help="grid point count")
        p.add_argument("--workers", type=int, help="parallel worker processes")
        p.add_argument("--dump-realizations", action="store_true",
                       dest="dump_realizations")
        if name == "phase-diagram":
            p.add_argument("--verify-midpoint", action="store_true",
                           dest="verify_midpoint")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        handler = {
            "validate": cmd_validate,
            "sweep": cmd_sweep,
            "phase-diagram": cmd_phase_diagram,
            "dump": cmd_dump,
        }[args.command]
        return handler(config)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
