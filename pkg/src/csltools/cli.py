#!/usr/bin/env python3
"""
Command-line harness for csltools.

Usage:
    csl_run <command> [options]

Commands:
    trajectory     integrate one two-level collapse trajectory
    ensemble       run an ensemble and tally outcomes against the Born rule
    ruin           play the fair gambler's ruin, exact and simulated
    bounds         emit the reference table of upper bounds on lambda
    collapse-time  pointer collapse time and lower bound on lambda
    heating        spontaneous heating of a free particle

Every output embeds the run configuration (excluding --out and --threads,
which never change results), so identical configurations produce
byte-identical files.
"""

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import prt_error
from .bounds import (
    CONVENTIONAL_LAMBDA,
    REFERENCE_POINTER,
    PointerSpec,
    amplification_factor,
    bounds_table,
    cosmology_consistency,
    enhanced_lambda,
    excluded_by,
    heating_rate_per_particle,
    heating_temperature_rate,
    lambda_lower_bound_pointer,
)
from .dynamics import (
    MAX_STEP_STRENGTH,
    CslParams,
    collapse_time_estimate,
    evolve_trajectory,
    step_count,
)
from .ensemble import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_SEED,
    EnsembleConfig,
    martingale_test,
    run_ensemble,
)
from .errors import CslError
from .noise import Cutoff, White
from .output import render_csv, render_json, write_output
from .ruin import RuinGame, ruin_expected_length_exact, ruin_probability_exact, ruin_simulate
from .state import DiagonalObservable, probabilities, two_level_state
from .units import DALTON_KG, NUCLEON_MASS_KG, PhysicalQuantity
from .version import __version__

logger = logging.getLogger(__name__)

COMMANDS = ("trajectory", "ensemble", "ruin", "bounds", "collapse-time", "heating")
TARGET_COLLAPSE_UNITS = 20.0
SAMPLES_PER_RUN = 50

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass
class RunConfig:
    """A fully validated command invocation."""
    command: str
    params: Dict[str, Any]
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    fmt: str = "csv"
    threads: int = 1
    verbose: bool = False
    progress: bool = False

    def embedded(self) -> Dict[str, Any]:
        """Configuration written into outputs: everything that affects results."""
        return {"command": self.command, "seed": self.seed, "format": self.fmt, **self.params}


def _number(kind, check, message):
    def convert(text: str):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}")
        if not check(value):
            raise argparse.ArgumentTypeError(f"{message}, got {text}")
        return value
    return convert


probability = _number(float, lambda v: 0.0 <= v <= 1.0, "probability must lie in [0, 1]")
positive = _number(float, lambda v: 0 < v < math.inf, "value must be positive and finite")
non_negative = _number(float, lambda v: 0 <= v < math.inf, "value must be non-negative and finite")
finite = _number(float, np.isfinite, "value must be finite")
count = _number(int, lambda v: v >= 1, "count must be at least 1")
stake = _number(int, lambda v: v >= 0, "stake must be non-negative")
epsilon = _number(float, lambda v: 0.0 < v < 0.5, "epsilon must lie in (0, 0.5)")
seed_value = _number(int, lambda v: 0 <= v < 2 ** 64, "seed must be an unsigned 64-bit integer")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=seed_value, default=DEFAULT_SEED, help="master random seed")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt",
                        help="output format")
    common.add_argument("--threads", type=count, default=1,
                        help="worker processes (speed only, never results)")
    common.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    return common


def _dynamics_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p0", type=probability, default=0.3,
                        help="initial Born weight of outcome 1")
    parser.add_argument("--lambda", type=non_negative, default=1e-2, dest="lam",
                        help="collapse rate lambda")
    parser.add_argument("--delta-m", type=finite, default=1.0,
                        help="mass-density eigenvalue of outcome 1 (outcome 0 has 0)")
    parser.add_argument("--omega", type=finite, default=0.0,
                        help="Hamiltonian (omega/2) sigma_x")
    parser.add_argument("--t-final", type=positive, default=None,
                        help="end time (default: 20 / (lambda dM^2))")
    parser.add_argument("--dt", type=positive, default=None,
                        help="step (default: lambda dM^2 dt = 1e-2)")
    parser.add_argument("--sample-every", type=count, default=None,
                        help="steps between samples (default: about 50 samples)")
    parser.add_argument("--epsilon", type=epsilon, default=1e-3, help="collapse threshold")
    parser.add_argument("--spectrum", choices=("white", "cutoff"), default="white",
                        help="noise spectrum")
    parser.add_argument("--omega-max", type=positive, default=None,
                        help="cutoff frequency (required with --spectrum cutoff)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csl_run",
        description="Continuous spontaneous localization simulations and bounds.",
        epilog=(
            "commands and defaults:\n"
            "  trajectory     --p0 0.3 --lambda 1e-2 --delta-m 1 --omega 0 --epsilon 1e-3 --spectrum white\n"
            "  ensemble       as trajectory, plus --n 10000 --batch-size 1024\n"
            "  ruin           --a 3 --b 1 --n 10000\n"
            "  bounds         [--lambda L] --spectrum white\n"
            "  collapse-time  --lambda 1e-17 --n-total 1e15 --n-per-cell 1e9 --t-required 1e-7\n"
            "  heating        --lambda 1e-17 --mass-da <nucleon> --r-c-cm 1e-5\n"
            f"  all commands   --seed {DEFAULT_SEED} --format csv --threads 1 --out stdout\n"
            "\nRun 'csl_run <command> --help' for details."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    formatter = argparse.ArgumentDefaultsHelpFormatter

    trajectory = sub.add_parser("trajectory", parents=[common], formatter_class=formatter,
                                help="integrate one collapse trajectory")
    _dynamics_options(trajectory)

    ensemble = sub.add_parser("ensemble", parents=[common], formatter_class=formatter,
                              help="outcome statistics of many trajectories")
    _dynamics_options(ensemble)
    ensemble.add_argument("--n", type=count, default=10000, help="number of trajectories")
    ensemble.add_argument("--batch-size", type=count, default=DEFAULT_BATCH_SIZE,
                          help="trajectories integrated together")
    ensemble.add_argument("--progress", action="store_true", help="show a progress bar")

    ruin = sub.add_parser("ruin", parents=[common], formatter_class=formatter,
                          help="fair gambler's ruin")
    ruin.add_argument("--a", type=stake, default=3, help="Alice's initial pennies")
    ruin.add_argument("--b", type=stake, default=1, help="Bob's initial pennies")
    ruin.add_argument("--n", type=count, default=10000, help="number of simulated games")

    bounds = sub.add_parser("bounds", parents=[common], formatter_class=formatter,
                            help="reference upper bounds on lambda")
    bounds.add_argument("--lambda", type=positive, default=None, dest="lam",
                        help="mark the entries that exclude this lambda")
    bounds.add_argument("--spectrum", choices=("white", "cutoff"), default="white",
                        help="noise spectrum")
    bounds.add_argument("--omega-max", type=positive, default=None, help="cutoff frequency")

    collapse = sub.add_parser("collapse-time", parents=[common], formatter_class=formatter,
                              help="pointer collapse time")
    collapse.add_argument("--lambda", type=positive, default=CONVENTIONAL_LAMBDA, dest="lam",
                          help="collapse rate lambda (s^-1)")
    collapse.add_argument("--n-total", type=positive, default=REFERENCE_POINTER.n_total,
                          help="nucleons in the pointer")
    collapse.add_argument("--n-per-cell", type=positive, default=REFERENCE_POINTER.n_per_cell,
                          help="nucleons per r_C cell")
    collapse.add_argument("--t-required", type=positive, default=REFERENCE_POINTER.t_required,
                          help="required collapse time (s)")

    heating = sub.add_parser("heating", parents=[common], formatter_class=formatter,
                             help="spontaneous heating rate")
    heating.add_argument("--lambda", type=positive, default=CONVENTIONAL_LAMBDA, dest="lam",
                         help="collapse rate lambda (s^-1)")
    heating.add_argument("--mass-da", type=positive, default=NUCLEON_MASS_KG / DALTON_KG,
                         help="particle mass in Daltons")
    heating.add_argument("--r-c-cm", type=positive, default=1e-5, help="correlation length (cm)")
    return parser


def _resolve_dynamics(parser: argparse.ArgumentParser, args: argparse.Namespace) -> Dict[str, Any]:
    if args.spectrum == "cutoff" and args.omega_max is None:
        parser.error("--omega-max is required with --spectrum cutoff")
    if args.spectrum == "white" and args.omega_max is not None:
        parser.error("--omega-max only applies with --spectrum cutoff")
    # float multiplication overflows to inf where ** raises
    strength = args.lam * args.delta_m * args.delta_m
    if not math.isfinite(strength):
        parser.error("lambda * delta-m^2 overflows; use smaller --lambda or --delta-m")
    t_final = args.t_final
    if t_final is None:
        if strength == 0:
            parser.error("--t-final is required when lambda * delta-m^2 is zero")
        t_final = TARGET_COLLAPSE_UNITS / strength
        if not math.isfinite(t_final):
            parser.error(f"lambda * delta-m^2 = {strength:g} is too small; give --t-final")
    dt = args.dt
    if dt is None:
        rate = strength + abs(args.omega)
        dt = min(MAX_STEP_STRENGTH / rate, t_final / 100.0) if rate > 0 else t_final / 100.0
    if not (math.isfinite(dt) and dt > 0):
        parser.error(f"step {dt!r} is not a positive finite number; give --dt")
    if dt > t_final:
        parser.error(f"--dt {dt} exceeds --t-final {t_final}")
    if not math.isfinite(t_final / dt):
        parser.error(f"--t-final {t_final} / --dt {dt} is too many steps")
    sample_every = args.sample_every
    if sample_every is None:
        sample_every = max(1, step_count(t_final, dt) // SAMPLES_PER_RUN)
    return {
        "p0": args.p0,
        "lambda": args.lam,
        "delta_m": args.delta_m,
        "omega": args.omega,
        "t_final": t_final,
        "dt": dt,
        "sample_every": sample_every,
        "epsilon": args.epsilon,
        "spectrum": args.spectrum,
        "omega_max": args.omega_max,
    }


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Parse and validate a command line.

    Invalid input exits with status 2 and a usage message naming the flag.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("trajectory", "ensemble"):
        params = _resolve_dynamics(parser, args)
        if args.command == "ensemble":
            params.update(n=args.n, batch_size=args.batch_size)
    elif args.command == "ruin":
        if args.a + args.b < 1:
            parser.error("--a and --b must not both be zero")
        params = {"a": args.a, "b": args.b, "n": args.n}
    elif args.command == "bounds":
        if args.spectrum == "cutoff" and args.omega_max is None:
            parser.error("--omega-max is required with --spectrum cutoff")
        params = {"lambda": args.lam, "spectrum": args.spectrum, "omega_max": args.omega_max}
    elif args.command == "collapse-time":
        params = {
            "lambda": args.lam,
            "n_total": args.n_total,
            "n_per_cell": args.n_per_cell,
            "t_required": args.t_required,
        }
    else:
        params = {"lambda": args.lam, "mass_da": args.mass_da, "r_c_cm": args.r_c_cm}
    config = RunConfig(
        command=args.command,
        params=params,
        seed=args.seed,
        out=args.out,
        fmt=args.fmt,
        threads=args.threads,
        verbose=args.verbose,
        progress=getattr(args, "progress", False),
    )
    return config


def _spectrum(params: Dict[str, Any]):
    return Cutoff(params["omega_max"]) if params["spectrum"] == "cutoff" else White()


def _two_level_setup(params: Dict[str, Any]):
    initial = two_level_state(params["p0"])
    M = DiagonalObservable([0.0, params["delta_m"]])
    H = 0.5 * params["omega"] * SIGMA_X if params["omega"] else None
    csl = CslParams(lam=params["lambda"], dt=params["dt"], spectrum=_spectrum(params))
    return initial, H, M, csl


def _run_trajectory(config: RunConfig):
    p = config.params
    initial, H, M, csl = _two_level_setup(p)
    trajectory = evolve_trajectory(
        initial, H, M, csl, p["t_final"], p["sample_every"], p["epsilon"], seed=config.seed,
    )
    summary = {
        "outcome": trajectory.outcome,
        "collapse_time": trajectory.collapse_time,
    }
    return trajectory.to_records(), summary


def _run_ensemble(config: RunConfig):
    p = config.params
    initial, H, M, csl = _two_level_setup(p)
    ensemble = EnsembleConfig(
        initial=initial, H=H, M=M, params=csl, t_final=p["t_final"],
        n_trajectories=p["n"], seed=config.seed, collapse_epsilon=p["epsilon"],
        sample_every=p["sample_every"], batch_size=p["batch_size"],
    )
    result = run_ensemble(ensemble, workers=config.threads, progress=config.progress)
    p_initial = probabilities(initial)
    tally = result.tally
    summary = {
        "counts": tally.counts.tolist(),
        "undecided": tally.undecided,
        "total": tally.total,
        "frequencies": tally.frequencies().tolist(),
        "born_z_scores": tally.binomial_z_scores(p_initial).tolist(),
        "martingale_statistic": martingale_test(result.record, p_initial),
    }
    return result.record.to_records(), summary


def _run_ruin(config: RunConfig):
    p = config.params
    game = RuinGame(p["a"], p["b"])
    sim = ruin_simulate(game, p["n"], config.seed)
    exact = ruin_probability_exact(game)
    record = {
        "a": game.a,
        "b": game.b,
        "n_games": sim.n_games,
        "alice_wins": sim.alice_wins,
        "win_frequency": sim.win_frequency,
        "exact_probability": exact,
        "stderr": sim.stderr(exact),
        "mean_length": sim.mean_length,
        "exact_mean_length": ruin_expected_length_exact(game),
    }
    return [record], {}


def _run_bounds(config: RunConfig):
    p = config.params
    records = [bound.to_record() for bound in bounds_table()]
    if p["lambda"] is not None:
        excluded = {bound.name for bound in excluded_by(p["lambda"], _spectrum(p))}
        for record in records:
            record["excludes_lambda"] = record["name"] in excluded
    summary = {
        "conventional_lambda": CONVENTIONAL_LAMBDA,
        "enhanced_lambda": enhanced_lambda(CONVENTIONAL_LAMBDA),
    }
    return records, summary


def _run_collapse_time(config: RunConfig):
    p = config.params
    spec = PointerSpec(n_total=p["n_total"], n_per_cell=p["n_per_cell"], t_required=p["t_required"])
    amplification = amplification_factor(spec)
    cosmology = cosmology_consistency(p["lambda"])
    record = {
        "lambda": p["lambda"],
        "amplification": amplification,
        "collapse_time": collapse_time_estimate(p["lambda"], amplification),
        "lambda_lower_bound": lambda_lower_bound_pointer(spec),
        "ratio_to_hubble": cosmology.ratio,
        "cosmology": cosmology.verdict.value,
    }
    return [record], {}


def _run_heating(config: RunConfig):
    p = config.params
    mass_kg = PhysicalQuantity.of(p["mass_da"], "Da").to("kg")
    r_c_m = PhysicalQuantity.of(p["r_c_cm"], "cm").to("m")
    record = {
        "lambda": p["lambda"],
        "mass_kg": mass_kg,
        "r_c_m": r_c_m,
        "heating_rate_W": heating_rate_per_particle(p["lambda"], mass_kg, r_c_m),
        "temperature_rate_K_per_s": heating_temperature_rate(p["lambda"], mass_kg, r_c_m),
    }
    return [record], {}


RUNNERS = {
    "trajectory": _run_trajectory,
    "ensemble": _run_ensemble,
    "ruin": _run_ruin,
    "bounds": _run_bounds,
    "collapse-time": _run_collapse_time,
    "heating": _run_heating,
}


def execute(config: RunConfig, stdout=None) -> int:
    """
    Run a validated configuration and write its output.

    Returns:
        0 on success, 1 on a computation or I/O error (reported on stderr)
    """
    stdout = stdout if stdout is not None else sys.stdout
    embedded = config.embedded()
    try:
        records, summary = RUNNERS[config.command](config)
        if config.fmt == "json":
            text = render_json(records, embedded, {"summary": summary} if summary else None)
        else:
            text = render_csv(records, embedded, summary or None)
        write_output(text, config.out, stdout)
    except (CslError, OSError) as e:
        prt_error(f"Error: {e}")
        return 1
    logger.info("%s finished", config.command)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Parse, configure logging, execute; returns the process exit status."""
    config = parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if config.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return execute(config)
    except KeyboardInterrupt:
        prt_error("\n\nRun interrupted by user.")
        return 130


if __name__ == "__main__":
    sys.exit(main())
