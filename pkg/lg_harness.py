"""Command-line front end for the Leggett-Garg harness.

    python lg_harness.py sweep --engine separate --points 1001
    python lg_harness.py compare --theta-max 3.141592653589793 --format both
    python lg_harness.py invasiveness --points 100
    python lg_harness.py coin --steps 3
    python lg_harness.py ensemble --field 11.7 --temperature 300

Exit status: 0 success, 2 invalid flags, 3 output failure.
"""

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

import ensemble_analysis as ens
import lg_protocols as lg
import macrorealist_models as mm
from quantum_core import DensityMatrix, u_theta
from utils import (
    coin_frame,
    compare_frame,
    create_k_plot,
    create_trend_plot,
    invasiveness_frame,
    quantity_frame,
    sweep_frame,
    write_csv,
    write_svg,
)

logger = logging.getLogger("lg_harness")

# --- Configuration ---

COMMANDS = ("sweep", "invasiveness", "coin", "ensemble", "compare")
ENGINES = ("separate", "simultaneous", "inrm", "classical")
FORMATS = ("csv", "svg", "both")
OUTPUT_DIR_ENV = "LG_HARNESS_OUTPUT_DIR"

DEFAULT_THETA_MIN = 0.0
DEFAULT_THETA_MAX = 2 * math.pi
DEFAULT_POINTS = 181
DEFAULT_CIRCUIT_THETA = math.pi / 6
ENSEMBLE_GRID_FIELDS = (1.0, 4.7, 9.4, 11.7, 14.1, 18.8, 23.5)        # T
ENSEMBLE_GRID_TEMPERATURES = (4.2, 77.0, 300.0)                       # K

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


class RunSpecError(ValueError):
    pass


@dataclass(frozen=True)
class RunSpec:
    """Validated cli request. Angles are in radians."""

    command: str
    theta_min: float = DEFAULT_THETA_MIN
    theta_max: float = DEFAULT_THETA_MAX
    points: int = DEFAULT_POINTS
    engine: str = "separate"
    output_path: Path = Path("lg_results")
    format: str = "csv"
    seed: int | None = None
    shots: int | None = None
    steps: int = 3
    circuit_theta: float = DEFAULT_CIRCUIT_THETA
    field: float = ens.DEFAULT_FIELD
    temperature: float = ens.DEFAULT_TEMPERATURE
    moment: float = ens.PROTON_MAGNETIC_MOMENT

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise RunSpecError(f"unknown command {self.command!r}")
        if self.engine not in ENGINES:
            raise RunSpecError(f"unknown engine {self.engine!r}")
        if self.format not in FORMATS:
            raise RunSpecError(f"unknown format {self.format!r}")
        if self.command in ("sweep", "compare", "invasiveness"):
            if not self.theta_min < self.theta_max:
                raise RunSpecError(f"theta-min ({self.theta_min}) must be below theta-max ({self.theta_max})")
            if self.points < 2:
                raise RunSpecError(f"sweeps need at least 2 points, got {self.points}")
        if self.seed is not None and self.seed < 0:
            raise RunSpecError("seed must be non-negative")
        if self.shots is not None:
            if self.shots < 1:
                raise RunSpecError("shots must be positive")
            if self.command != "sweep" or self.engine != "separate":
                raise RunSpecError("--shots is only available for sweep --engine separate")
        if self.steps < 1:
            raise RunSpecError("coin needs at least one step")

    @property
    def theta_grid(self):
        return np.linspace(self.theta_min, self.theta_max, self.points)


# --- Output Paths ---

def resolve_output(path):
    """Relative paths land in $LG_HARNESS_OUTPUT_DIR when it is set."""
    path = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path.with_suffix("") if path.suffix in (".csv", ".svg") else path


def _emit(spec, df, fig):
    stem = resolve_output(spec.output_path)
    written = []
    if spec.format in ("csv", "both"):
        written.append(write_csv(df, stem.with_name(stem.name + ".csv")))
    if spec.format in ("svg", "both"):
        written.append(write_svg(fig, stem.with_name(stem.name + ".svg")))
    return written


# --- Commands ---

def _sweep_rows(spec):
    grid = spec.theta_grid
    if spec.engine == "classical":
        return mm.sweep_classical(grid)
    if spec.shots is not None:
        rng = np.random.default_rng(spec.seed)
        return [(float(t), lg.sampled_k_statistic_separate(lg.ProtocolConfig(float(t)), spec.shots, rng)) for t in grid]
    return lg.sweep_k(grid, spec.engine)


def run_sweep(spec):
    df = sweep_frame(_sweep_rows(spec), spec.engine)
    peak = df.loc[df["k"].idxmax()]
    print(f"{spec.engine}: max K = {peak['k']:.12f} at theta = {peak['theta']:.12f}")
    return df, create_k_plot(df)


def run_compare(spec):
    grid = spec.theta_grid
    df = compare_frame(lg.sweep_k(grid, lg.Engine.SEPARATE), lg.sweep_k(grid, lg.Engine.SIMULTANEOUS))
    for engine, group in df.groupby("engine", sort=False):
        print(f"{engine}: max K = {group['k'].max():.12f}")
    return df, create_k_plot(df, title="Separate runs against the single-run ancilla circuit")


def run_invasiveness(spec):
    df = invasiveness_frame((float(theta), lg.invasiveness_demo(float(theta))) for theta in spec.theta_grid)
    fig = create_trend_plot(
        df.pivot(index="theta", columns="input", values="disp_y").reset_index(),
        x="theta",
        features=[label for label, _ in lg.INVASIVENESS_INPUTS],
        title="Bloch y-displacement caused by the ancilla coupling",
    )
    return df, fig


def run_coin(spec):
    df = coin_frame(mm.coin_demo(spec.steps))
    fig = create_trend_plot(df, x="step", features=["face_after", "observer_heads"], title="Blindfolded coin flips")
    return df, fig


def _ensemble_quantities(spec, params):
    report = ens.efficiency_report(params)
    state = ens.PseudoPureState(report.epsilon, DensityMatrix.basis("0"))
    circuit = ens.MeasurementCircuit(gates=(u_theta(spec.circuit_theta),))
    fair = ens.fair_sampling_report(state, circuit)
    return {
        "magnetic_moment": params.magnetic_moment,
        "field": params.field,
        "temperature": params.temperature,
        "zeeman_ratio": params.zeeman_ratio,
        "alpha": params.alpha,
        "epsilon": report.epsilon,
        "claimed_bound": report.claimed_bound,
        "matches_claim": int(report.matches_claim),
        "circuit_theta": spec.circuit_theta,
        "pure_p_plus": fair.pure_distribution[0],
        "identity_p_plus": fair.identity_distribution[0],
        "pure_signal": fair.pure_signal,
        "observed_signal": fair.observed_signal,
        "distributions_differ": int(fair.distributions_differ),
    }


def run_ensemble(spec):
    params = ens.ThermalParams(spec.moment, spec.field, spec.temperature)
    quantities = _ensemble_quantities(spec, params)
    print(f"epsilon = {quantities['epsilon']:.6e} (claimed < {ens.CLAIMED_EPSILON_BOUND:.0e})")

    grid = ens.epsilon_table(ENSEMBLE_GRID_FIELDS, ENSEMBLE_GRID_TEMPERATURES, params)
    if spec.format in ("csv", "both"):
        stem = resolve_output(spec.output_path)
        write_csv(grid, stem.with_name(stem.name + "_grid.csv"))
    wide = grid.pivot(index="field", columns="temperature", values="epsilon")
    wide.columns = [f"T={t:g} K" for t in wide.columns]
    fig = create_trend_plot(wide.reset_index(), x="field", features=list(wide.columns), title="Thermal polarization epsilon")
    return quantity_frame(quantities), fig


RUNNERS = {
    "sweep": run_sweep,
    "compare": run_compare,
    "invasiveness": run_invasiveness,
    "coin": run_coin,
    "ensemble": run_ensemble,
}


def run(spec):
    """Executes ``spec`` and writes its files; returns the exit status."""
    try:
        df, fig = RUNNERS[spec.command](spec)
        for path in _emit(spec, df, fig):
            print(f"wrote {path}")
    except OSError as exc:
        logger.error("could not write output: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    return EXIT_OK


# --- Argument Parsing ---

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", default=None, help="output path stem; .csv/.svg are appended (default: lg_<command>)")
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--theta-min", type=float, default=None, help=f"default {DEFAULT_THETA_MIN} rad")
    grid.add_argument("--theta-max", type=float, default=None, help=f"default {DEFAULT_THETA_MAX} rad (2 pi)")
    grid.add_argument("--points", type=int, default=DEFAULT_POINTS)
    grid.add_argument("--degrees", action="store_true", help="read --theta-min/--theta-max in degrees")

    parser = argparse.ArgumentParser(prog="lg_harness", description="Leggett-Garg inequality simulator and test harness")
    commands = parser.add_subparsers(dest="command", required=True)

    sweep = commands.add_parser("sweep", parents=[common, grid], help="K(theta) for one engine")
    sweep.add_argument("--engine", choices=ENGINES, default="separate")
    sweep.add_argument("--shots", type=int, default=None, help="sample outcomes instead of exact branching (separate engine)")
    sweep.add_argument("--seed", type=int, default=None, help="RNG seed for --shots")

    commands.add_parser("compare", parents=[common, grid], help="separate runs next to the single-run circuit")
    commands.add_parser("invasiveness", parents=[common, grid], help="back-action on |0>, |1> and I/2")

    coin = commands.add_parser("coin", parents=[common], help="blindfolded coin flips")
    coin.add_argument("--steps", type=int, default=3)

    ensemble = commands.add_parser("ensemble", parents=[common], help="thermal polarization and fair sampling")
    ensemble.add_argument("--field", type=float, default=ens.DEFAULT_FIELD, help="tesla")
    ensemble.add_argument("--temperature", type=float, default=ens.DEFAULT_TEMPERATURE, help="kelvin")
    ensemble.add_argument("--moment", type=float, default=ens.PROTON_MAGNETIC_MOMENT, help="J/T")
    ensemble.add_argument("--circuit-theta", type=float, default=DEFAULT_CIRCUIT_THETA, help="u_theta angle before the measurement")
    return parser


def spec_from_args(args):
    options = {
        "command": args.command,
        "output_path": Path(args.output or f"lg_{args.command}"),
        "format": args.format,
    }
    if hasattr(args, "theta_min"):
        convert = math.radians if args.degrees else float
        options.update(
            theta_min=DEFAULT_THETA_MIN if args.theta_min is None else convert(args.theta_min),
            theta_max=DEFAULT_THETA_MAX if args.theta_max is None else convert(args.theta_max),
            points=args.points,
        )
    for name in ("engine", "shots", "seed", "steps", "field", "temperature", "moment", "circuit_theta"):
        if hasattr(args, name):
            options[name] = getattr(args, name)
    return RunSpec(**options)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        spec = spec_from_args(args)
    except RunSpecError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
