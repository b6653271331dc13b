# main.py - command-line driver: data, eval, search, report
import sys
from pathlib import Path

import click
import structlog

from config import OutputPaths, RunConfig, configure_logging, get_settings
from dataset import fetch_dataset, load_dataset, verify_dataset
from errors import ConfigError, MushroomError
from report import write_report
from search import best_entry, load_log, make_objective, persist_log, run_search
from trainer import evaluate_config

log = structlog.get_logger(__name__)


def _prepare(run: RunConfig, fetch: bool = False):
    """Verify (optionally fetch first) and parse the configured dataset."""
    data_dir = get_settings().mushroom_data_dir
    if fetch:
        fetch_dataset(run.dataset, data_dir)
    verify_dataset(run.dataset, data_dir, run.expected_sha256)
    return load_dataset(run.dataset, data_dir)


class MushroomGroup(click.Group):
    """Domain errors end the command with exit code 2 and a one-line message."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except MushroomError as e:
            log.debug("cli.failed", error_type=type(e).__name__)
            click.echo(f"error: {e}", err=True)
            ctx.exit(2)


@click.group(cls=MushroomGroup)
def cli():
    """Meta-learned plasticity rules for a mushroom-body classifier."""
    configure_logging()


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--dataset", type=click.Choice(["mnist", "fashion-mnist"]), default=None)
@click.option("--fetch", is_flag=True, help="Download missing files and write SHA256SUMS.")
def data(config_path, dataset, fetch):
    """Check the four IDX files and print the split sizes."""
    run = RunConfig.from_file(config_path).with_overrides(dataset=dataset)
    loaded = _prepare(run, fetch)
    click.echo(f"{loaded.train_images.count} train, {loaded.test_images.count} test")


@cli.command("eval")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True)
@click.option("--dataset", type=click.Choice(["mnist", "fashion-mnist"]), default=None)
def eval_cmd(config_path, dataset):
    """Train and test the single configuration under `evaluation`."""
    run = RunConfig.from_file(config_path).with_overrides(dataset=dataset)
    if run.evaluation is None:
        raise ConfigError(["evaluation: required by eval (rule, alpha, beta1..beta3)"])
    record = evaluate_config(run.evaluation, _prepare(run), run.protocol, run.net)
    click.echo(record.model_dump_json())
    if record.status != "ok":
        sys.exit(1)


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.option("--dataset", type=click.Choice(["mnist", "fashion-mnist"]), default=None)
@click.option("--budget", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSONL log path.")
@click.option("--strategy", type=click.Choice(["ambs", "random"]), default=None)
@click.option("--no-timing", is_flag=True, help="Write wall_time as 0 so reruns are byte-identical.")
def search(config_path, dataset, budget, workers, seed, out, strategy, no_timing):
    """Run the asynchronous search and write its evaluation log."""
    run = RunConfig.from_file(config_path).with_overrides(
        dataset=dataset, budget=budget, workers=workers, seed=seed, out=out, strategy=strategy
    )
    objective = make_objective(_prepare(run), run.protocol, run.net)
    entries = run_search(
        objective,
        run.search.budget,
        n_workers=run.search.n_workers,
        seed=run.search.seed,
        settings=run.search,
    )
    persist_log(entries, run.output.log, timing=not no_timing)

    best = best_entry(entries)
    click.echo(f"{len(entries)} evaluations -> {run.output.log}")
    if best is None:
        click.echo("no successful evaluation")
        sys.exit(1)
    click.echo(
        f"best: {best.rule.value} alpha={best.alpha:.4g} beta1={best.beta1:.4g} "
        f"beta2={best.beta2:.4g} beta3={best.beta3:.4g} test_accuracy={best.test_accuracy:.4f}"
    )


@cli.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=str(OutputPaths().report_csv), help="Scatter CSV path.")
def report(log_path, out):
    """Per-rule best accuracy table plus the accuracy-vs-learning-rate CSV."""
    click.echo(write_report(load_log(log_path), Path(out)))


def main():
    cli()


if __name__ == "__main__":
    main()
