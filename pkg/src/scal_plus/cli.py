"""CLI entry point for span-constrained exploration experiments."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from scal_plus.config import ExperimentConfig, HarnessSettings
from scal_plus.environments import FINE_GRID_CELLS, GAIN_PINS_PATH, SMOOTH_DRIFT
from scal_plus.errors import ScalPlusError
from scal_plus.log import configure_logging

if TYPE_CHECKING:
    from scal_plus.harness import ExperimentResult

console = Console()
err_console = Console(stderr=True)


def _add_override_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="Path to experiment YAML file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config key, e.g. --set agent.delta=0.1 (repeatable)",
    )
    parser.add_argument("--horizon", type=int, help="Number of steps T")
    parser.add_argument("--seeds", help="Comma-separated seeds, e.g. 0,1,2")
    parser.add_argument("--output-dir", help="Output directory (default: $SCAL_PLUS_OUTPUT_DIR)")
    parser.add_argument("--force", action="store_true", help="Overwrite existing outputs")
    parser.add_argument("--workers", type=int, help="Seeds run in parallel")


def main(argv: list[str] | None = None) -> None:
    """Main CLI entry point."""
    load_dotenv()
    parser = argparse.ArgumentParser(
        description="Span-constrained optimistic exploration: planners, agents and regret experiments"
    )
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # solve command
    solve_parser = subparsers.add_parser("solve", help="Optimal gain, bias and span of an MDP file")
    solve_parser.add_argument("mdp", help="Path to MDP text file")
    solve_parser.add_argument("--tol", type=float, default=1e-9, help="Residual span tolerance")

    # plan command
    plan_parser = subparsers.add_parser("plan", help="One ScOpt call on an MDP file")
    plan_parser.add_argument("mdp", help="Path to MDP text file")
    plan_parser.add_argument("--span-cap", type=float, required=True, help="Span cap c")
    plan_parser.add_argument("--accuracy", type=float, default=1e-6, help="Accuracy epsilon")
    plan_parser.add_argument("--reference-state", type=int, default=0)
    plan_parser.add_argument("--max-iter", type=int, default=1_000_000)
    plan_parser.add_argument(
        "--augment", action="store_true", help="Plan on the zero-reward augmented MDP"
    )
    plan_parser.add_argument("--output", help="Write the result record to this file")

    # run command
    run_parser = subparsers.add_parser("run", help="Run an experiment from a config file")
    _add_override_arguments(run_parser)

    # sweep command
    sweep_parser = subparsers.add_parser("sweep", help="Run an experiment over a grid of values")
    _add_override_arguments(sweep_parser)
    sweep_parser.add_argument(
        "--param", default="agent.span_cap", help="Dotted config key, e.g. agent.delta"
    )
    sweep_parser.add_argument("--values", required=True, help="Comma-separated values")

    # pin-gain command
    pin_parser = subparsers.add_parser("pin-gain", help="Recompute smooth-environment gain pins")
    pin_parser.add_argument("--L", dest="L", type=float, action="append", help="Holder constant L")
    pin_parser.add_argument(
        "--alpha", type=float, action="append", help="Holder exponent alpha (one per --L)"
    )
    pin_parser.add_argument("--cells", type=int, default=FINE_GRID_CELLS)
    pin_parser.add_argument(
        "--drift", type=float, default=SMOOTH_DRIFT, help="Step drift of each action"
    )
    pin_parser.add_argument("--output", help=f"Pin file (default: {GAIN_PINS_PATH})")

    args = parser.parse_args(argv)

    commands = {
        "solve": run_solve,
        "plan": run_plan,
        "run": run_run,
        "sweep": run_sweep,
        "pin-gain": run_pin_gain,
    }
    if args.command not in commands:
        parser.print_help()
        sys.exit(1)

    try:
        configure_logging(args.log_level or HarnessSettings().log_level)
        code = commands[args.command](args)
    except (ScalPlusError, FileNotFoundError, ValueError) as e:
        err_console.print(f"[red]error:[/red] {e}")
        code = 2
    sys.exit(code)


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = list(args.overrides)
    if args.horizon is not None:
        overrides.append(f"horizon={args.horizon}")
    if args.seeds:
        overrides.append(f"seeds=[{args.seeds}]")
    if args.output_dir:
        overrides.append(f"output_dir={args.output_dir}")
    if args.force:
        overrides.append("force=true")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    cfg = ExperimentConfig.from_yaml(args.config, overrides)
    if args.log_level is None:
        configure_logging(cfg.logging.level)
    return cfg


def run_solve(args: argparse.Namespace) -> int:
    """Solve an MDP file with the oracle."""
    from scal_plus.mdp import solve_gain_bias
    from scal_plus.models import DiscreteMdp

    mdp = DiscreteMdp.load(args.mdp)
    solution = solve_gain_bias(mdp, tol=args.tol)

    table = Table(title=f"Oracle solution: {args.mdp}")
    table.add_column("state", justify="right")
    table.add_column("bias h*", justify="right")
    for s, h in enumerate(solution.bias):
        table.add_row(str(s), f"{h:.10g}")
    console.print(table)
    console.print(f"gain {solution.gain!r}")
    console.print(f"span {solution.span!r}")
    console.print(f"iterations {solution.iterations}")
    return 0


def run_plan(args: argparse.Namespace) -> int:
    """Run ScOpt once on an MDP file."""
    from scal_plus.mdp import validate
    from scal_plus.models import DiscreteMdp, ScOptConfig
    from scal_plus.scopt import scopt
    from scal_plus.statistics import augment

    mdp = DiscreteMdp.load(args.mdp)
    validate(mdp)
    if args.augment:
        mdp = augment(mdp)
    cfg = ScOptConfig(
        span_cap=args.span_cap,
        accuracy=args.accuracy,
        reference_state=args.reference_state,
        max_iter=args.max_iter,
    )
    result = scopt(mdp, cfg)

    table = Table(title=f"ScOpt c={args.span_cap!r} eps={args.accuracy!r}")
    table.add_column("state", justify="right")
    table.add_column("value", justify="right")
    table.add_column("support")
    table.add_column("probabilities")
    for s in range(mdp.num_states):
        support = result.policy.support(s)
        probs = ", ".join(f"{result.policy.probs[s, a]:.4f}" for a in support)
        table.add_row(str(s), f"{result.value[s]:.10g}", "|".join(map(str, support)), probs)
    console.print(table)
    console.print(f"gain {result.gain_estimate!r}")
    console.print(f"iterations {result.iterations} (a-priori bound {result.iteration_bound})")

    if args.output:
        Path(args.output).write_text(result.to_text(), encoding="utf-8")
        console.print(f"Result written to {args.output}")
    return 0


def _print_summary(title: str, result: ExperimentResult) -> None:
    table = Table(title=title)
    for column in ("seed", "T", "final regret", "episodes", "mean iterations", "status"):
        table.add_column(column, justify="right")
    for run in result.runs:
        table.add_row(
            str(run.seed),
            str(run.T),
            "-" if run.final_regret is None else f"{run.final_regret:.4f}",
            str(run.episodes),
            f"{run.mean_planning_iterations:.1f}",
            run.status,
        )
    console.print(table)


def run_run(args: argparse.Namespace) -> int:
    """Run an experiment."""
    from scal_plus.harness import run_experiment

    cfg = _load_config(args)
    result = run_experiment(cfg)
    _print_summary(f"Results in {result.output_dir}", result)
    return 0 if result.success else 1


def run_sweep(args: argparse.Namespace) -> int:
    """Run an experiment for each value of one parameter."""
    from scal_plus.harness import sweep

    cfg = _load_config(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    base, results = sweep(cfg, args.param, values)
    for value, result in zip(values, results):
        _print_summary(f"{args.param}={value}", result)
    console.print(f"Sweep summary written to {base / 'sweep_summary.csv'}")
    return 0 if all(result.success for result in results) else 1


def run_pin_gain(args: argparse.Namespace) -> int:
    """Recompute gain pins of the smooth environment."""
    from scal_plus.harness import pin_gains

    L_values = args.L or [1.0]
    alphas = args.alpha or [1.0] * len(L_values)
    if len(alphas) != len(L_values):
        raise ValueError("give one --alpha per --L")
    path = Path(args.output) if args.output else GAIN_PINS_PATH
    pins = pin_gains(
        list(zip(L_values, alphas)), cells=args.cells, path=path, drift=args.drift
    )

    table = Table(title=f"Gain pins ({path})")
    table.add_column("key")
    table.add_column("gain", justify="right")
    for key, gain in pins.items():
        table.add_row(key, repr(gain))
    console.print(table)
    return 0


if __name__ == "__main__":
    main()
