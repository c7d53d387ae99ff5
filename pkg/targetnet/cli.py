#!/usr/bin/env python3
"""
targetnet - Command Line Interface

Runs the synthetic tracking benchmark (`synth`, `compare`), the actor-critic
harness (`train`) and policy evaluation (`evaluate`), writing one CSV per
(seed, rule), an aggregate `summary.csv` and the resolved configuration to
the output directory.

Exit status: 0 on success, 1 on runtime failures, 2 on configuration
errors, 3 when a training run diverged.
"""

import sys
from pathlib import Path
from typing import Any, Callable, Dict, List

import click
import pandas as pd
from rich.console import Console
from rich.markup import escape
from rich.progress import track
from rich.table import Table

from . import __version__
from .bench.tracking import TRACE_COLUMNS, run_comparison
from .core.errors import ConfigError, DivergenceError, TargetNetError
from .nn.policy import GaussianPolicy
from .rl.trainer import CURVE_COLUMNS, UPDATE_LOG_COLUMNS, evaluate, random_policy_return, train
from .utils import serialization
from .utils.config import RunConfig, parse_config, write_resolved_config
from .utils.logging import configure_logging, get_logger
from .utils.reporting import aggregate, summary_table, write_csv

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

TRACK_METRICS = ("tracking_rmse", "mean_deviation", "mean_robustness", "final_nu_tilde")
TRAIN_METRICS = ("eval_mean", "eval_std", "final_return", "diverged")
EVAL_METRICS = ("mean", "std")

logger = get_logger("cli")


def _shared_options(func: Callable) -> Callable:
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Flat YAML configuration file"),
        click.option("--rule", type=click.Choice(["hard", "soft", "tsoft", "atsoft", "catsoft"]), help="Update rule"),
        click.option("--tau", type=float, help="Basic update ratio"),
        click.option("--period", type=int, help="Hard update period"),
        click.option("--nu", type=float, help="T-soft degrees of freedom"),
        click.option("--nu-lower", "nu_lower", type=float, help="AT-soft lower bound of nu_tilde"),
        click.option("--epsilon", type=float, help="Scale floor"),
        click.option("--lambda", "lambda_c", type=float, help="Consolidation strength"),
        click.option("--q", type=float, help="Consolidation quantile"),
        click.option("--consolidate/--no-consolidate", default=None, help="Consolidate under atsoft"),
        click.option("--seed", "seed", type=int, multiple=True, help="Seed (repeatable)"),
        click.option("--seeds", type=str, help="Comma-separated seeds"),
        click.option("--out", "out_dir", type=str, help="Output directory"),
        click.option("--log-level", "log_level", type=str, help="DEBUG, INFO, WARNING, ERROR"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _stream_options(func: Callable) -> Callable:
    options = [
        click.option("--dim", type=int, help="Parameters per step"),
        click.option("--horizon", type=int, help="Number of steps"),
        click.option("--base", type=click.Choice(["constant", "step", "ramp", "sinusoid"]), help="Base trajectory"),
        click.option("--noise-std", "noise_std", type=float, help="Gaussian noise std"),
        click.option("--outlier-prob", "outlier_prob", type=float, help="Outlier probability per element"),
        click.option("--outlier-scale", "outlier_scale", type=float, help="Outlier magnitude"),
        click.option("--sticky-fraction", "sticky_fraction", type=float, help="Fraction of persistently offset elements"),
        click.option("--sticky-offset", "sticky_offset", type=float, help="Offset of the sticky elements"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _env_options(func: Callable) -> Callable:
    options = [
        click.option("--env", type=click.Choice(["point_mass", "pendulum"]), help="Environment"),
        click.option("--max-steps", "max_steps", type=int, help="Episode length limit"),
        click.option("--eval-episodes", "eval_episodes", type=int, help="Evaluation episodes"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _execute(command: str, options: Dict[str, Any]) -> None:
    """Resolve the configuration, run the command and exit with its status"""
    config_path = options.pop("config_path", None)
    seeds = list(options.pop("seed", ()) or ())
    if options.get("seeds") is None and seeds:
        options["seeds"] = tuple(seeds)
    try:
        cfg = parse_config(command, config_path=config_path, overrides=options)
        configure_logging(cfg.log_level, json_output=cfg.log_format == "json")
    except ConfigError as e:
        err_console.print(f"[red]Configuration error: {escape(str(e))}[/red]")
        sys.exit(EXIT_CONFIG)
    sys.exit(run(cfg))


def print_config(cfg: RunConfig) -> None:
    table = Table(title=f"targetnet {cfg.command}: resolved configuration")
    table.add_column("key", style="cyan")
    table.add_column("value", style="green")
    for key, value in cfg.to_dict().items():
        table.add_row(key, str(value))
    console.print(table)


def run(cfg: RunConfig) -> int:
    """
    Execute a resolved configuration

    Returns:
        Process exit status
    """
    out_dir = Path(cfg.out_dir)
    try:
        write_resolved_config(cfg, out_dir)
    except OSError as e:
        err_console.print(f"[red]Cannot write to output directory {out_dir}: {escape(str(e))}[/red]")
        return EXIT_RUNTIME
    print_config(cfg)
    logger.info("run_started", command=cfg.command, seeds=list(cfg.seeds), out_dir=str(out_dir))

    commands = {"synth": _run_tracking, "compare": _run_tracking, "train": _run_training, "evaluate": _run_evaluation}
    try:
        status = commands[cfg.command](cfg, out_dir)
    except ConfigError as e:
        err_console.print(f"[red]Configuration error: {escape(str(e))}[/red]")
        return EXIT_CONFIG
    except DivergenceError as e:
        err_console.print(f"[red]Diverged: {escape(str(e))}[/red]")
        return EXIT_DIVERGED
    except (TargetNetError, OSError) as e:
        err_console.print(f"[red]Error: {escape(str(e))}[/red]")
        return EXIT_RUNTIME

    logger.info("run_finished", command=cfg.command, status=status)
    return status


def _run_tracking(cfg: RunConfig, out_dir: Path) -> int:
    rows: List[Dict[str, Any]] = []
    for seed in track(cfg.seeds, description="Tracking...", console=err_console):
        for metrics in run_comparison(cfg.stream_spec(seed), cfg.rule_configs()):
            write_csv(metrics.trace, out_dir / f"{metrics.rule}_seed{seed}.csv", TRACE_COLUMNS)
            rows.append(metrics.summary_row())

    _write_summary(pd.DataFrame(rows), out_dir, "rule", TRACK_METRICS, "Tracking summary")
    return EXIT_OK


def _run_training(cfg: RunConfig, out_dir: Path) -> int:
    rows: List[Dict[str, Any]] = []
    spec = cfg.env_spec()
    rule = cfg.rule
    diverged = False
    for seed in track(cfg.seeds, description="Training...", console=err_console):
        result = train(cfg.trainer_config(seed), spec)
        stem = f"{rule}_seed{seed}"
        write_csv(result.curve, out_dir / f"{stem}.csv", CURVE_COLUMNS)
        write_csv(result.update_log, out_dir / f"{stem}_updates.csv", UPDATE_LOG_COLUMNS)
        serialization.write_json(out_dir / f"{stem}_policy.json", result.policy.state_dict())
        serialization.write_json(out_dir / f"{stem}_value.json", result.value_net.state_dict())

        row = {"rule": rule, "seed": seed, "diverged": int(result.diverged),
               "final_return": float(result.curve["return"].iloc[-1]) if len(result.curve) else 0.0}
        if result.diverged:
            diverged = True
            console.print(f"[red]Seed {seed} diverged at step {result.divergence_step}[/red]")
            row.update(eval_mean=float("nan"), eval_std=float("nan"))
        elif cfg.eval_episodes > 0:
            summary = evaluate(result.policy, spec, cfg.eval_episodes, seed=seed)
            row.update(eval_mean=summary.mean, eval_std=summary.std)
        else:
            row.update(eval_mean=float("nan"), eval_std=float("nan"))
        rows.append(row)

    _write_summary(pd.DataFrame(rows), out_dir, "rule", TRAIN_METRICS, "Training summary")
    return EXIT_DIVERGED if diverged else EXIT_OK


def _run_evaluation(cfg: RunConfig, out_dir: Path) -> int:
    spec = cfg.env_spec()
    if cfg.eval_episodes < 1:
        raise ConfigError("eval_episodes", "must be positive for evaluate")
    policy = None
    if cfg.checkpoint:
        policy = GaussianPolicy.from_state_dict(serialization.read_json(cfg.checkpoint))

    records, rows = [], []
    for seed in cfg.seeds:
        if policy is None:
            summary = random_policy_return(spec, cfg.eval_episodes, seed=seed)
        else:
            summary = evaluate(policy, spec, cfg.eval_episodes, seed=seed)
        records.append(dict(seed=seed, env=spec.name, **summary.to_dict()))
        rows.append({"policy": summary.policy, "seed": seed, "mean": summary.mean, "std": summary.std})

    serialization.write_json(out_dir / "evaluation.json", records if len(records) > 1 else records[0])
    _write_summary(pd.DataFrame(rows), out_dir, "policy", EVAL_METRICS, "Evaluation summary")
    return EXIT_OK


def _write_summary(rows: pd.DataFrame, out_dir: Path, by: str, metrics, title: str) -> None:
    summary = aggregate(rows, by, metrics)
    write_csv(summary, out_dir / "summary.csv", list(summary.columns))
    console.print(summary_table(summary, by, metrics, title))


@click.group()
@click.version_option(version=__version__)
def cli():
    """
    targetnet - noise-robust target network updates

    Synthetic tracking benchmarks and a desk-scale actor-critic harness for
    hard, soft, T-soft, AT-soft and CAT-soft target updates.
    """


@cli.command()
@_shared_options
@_stream_options
def synth(**options):
    """Track one synthetic stream with one update rule"""
    _execute("synth", options)


@cli.command()
@_shared_options
@_stream_options
@click.option("--rules", type=str, help="Comma-separated rules to compare")
def compare(**options):
    """Run several update rules on identical stream realisations"""
    _execute("compare", options)


@cli.command("train")
@_shared_options
@_env_options
@click.option("--episodes", type=int, help="Training episodes")
@click.option("--learning-rate", "learning_rate", type=float, help="SGD learning rate")
@click.option("--gamma", type=float, help="Discount factor")
def train_command(**options):
    """Train an actor-critic agent with target networks"""
    _execute("train", options)


@cli.command("evaluate")
@_shared_options
@_env_options
@click.option("--checkpoint", type=click.Path(dir_okay=False), help="Policy checkpoint (random baseline if omitted)")
def evaluate_command(**options):
    """Evaluate a policy checkpoint or the random-policy baseline"""
    _execute("evaluate", options)


def main():
    cli()


if __name__ == "__main__":
    main()
