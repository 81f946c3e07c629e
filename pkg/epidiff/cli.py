"""CLI for epidiff."""
from __future__ import annotations

import logging
from contextlib import contextmanager

import typer

from epidiff.data.io import read_observations
from epidiff.utils.configs.config_builder import load_config
from epidiff.utils.errors import EpidiffError
from epidiff.utils.logging import get_logger
from epidiff.utils.logging import set_log_level
from epidiff.workflows.benchmark import run_benchmark
from epidiff.workflows.gibbs_demo import run_gibbs_demo
from epidiff.workflows.infer import infer as infer_workflow
from epidiff.workflows.infer import run_ekf
from epidiff.workflows.infer import run_filter
from epidiff.workflows.infer import run_mif
from epidiff.workflows.infer import summarize as summarize_workflow
from epidiff.workflows.realtime import run_realtime
from epidiff.workflows.sensitivity import run_sensitivity
from epidiff.workflows.simulate import simulate as simulate_workflow

app = typer.Typer(help="Bayesian inference for SEIR epidemics with a diffusion-driven contact rate.")


logger = get_logger(__name__)


@contextmanager
def exit_codes():
    """Turn package errors into their exit codes."""
    try:
        yield
    except EpidiffError as err:
        logger.error(f"{type(err).__name__}: {err}")
        raise typer.Exit(code=err.exit_code) from err


@app.callback()
def main(
    ctx: typer.Context,
    config: str = typer.Option(None, "--config", help="YAML run config"),
    preset: str = typer.Option(None, "--preset", help="named preset under epidiff/presets"),
    seed: int = typer.Option(None, "--seed", min=0, max=2**64 - 1, help="overrides the config seed"),
    out: str = typer.Option(None, "--out", help="run directory, runs/<experiment_id> by default"),
    threads: int = typer.Option(None, "--threads", min=1, help="worker processes for independent runs"),
    verbose: bool = typer.Option(False, "--verbose", help="log per-iteration telemetry"),
):
    """Global options shared by every command."""
    if verbose:
        set_log_level(logging.DEBUG)
    ctx.obj = {"config": config, "preset": preset, "seed": seed, "out": out, "threads": threads}


def _config(ctx):
    opts = ctx.obj
    overrides = {"seed": opts["seed"], "out_dir": opts["out"], "threads": opts["threads"]}
    return load_config(opts["preset"], opts["config"], overrides)


@app.command()
def simulate(ctx: typer.Context):
    """Simulate an epidemic and its weekly counts."""
    with exit_codes():
        simulate_workflow(_config(ctx))


@app.command(name="filter")
def filter_(ctx: typer.Context, data: str = typer.Argument(..., help="observation CSV")):
    """Particle filter at the configured parameters."""
    with exit_codes():
        run_filter(_config(ctx), read_observations(data))


@app.command()
def ekf(ctx: typer.Context, data: str = typer.Argument(..., help="observation CSV")):
    """Extended Kalman filter at the configured parameters."""
    with exit_codes():
        run_ekf(_config(ctx), read_observations(data))


@app.command()
def infer(ctx: typer.Context, data: str = typer.Argument(..., help="observation CSV")):
    """PMMH posterior with bands, ESS and DIC."""
    with exit_codes():
        infer_workflow(_config(ctx), read_observations(data))


@app.command()
def benchmark(ctx: typer.Context, study: str = typer.Argument(..., help="euler | nparts | ekf-vs-pf | adapt-ess")):
    """Run a tuning or comparison study on synthetic data."""
    with exit_codes():
        run_benchmark(study, _config(ctx))


@app.command()
def sensitivity(ctx: typer.Context, data: str = typer.Argument(..., help="observation CSV")):
    """Prior-mean tilting study."""
    with exit_codes():
        run_sensitivity(_config(ctx), read_observations(data))


@app.command()
def realtime(ctx: typer.Context, data: str = typer.Argument(..., help="observation CSV")):
    """Inference on truncated data over a sweep of correction factors.

    Each factor in realtime.correction_factors multiplies the counts before
    fitting, so it is the inverse of the reporting rate c.
    """
    with exit_codes():
        run_realtime(_config(ctx), read_observations(data))


@app.command(name="gibbs-demo")
def gibbs_demo(ctx: typer.Context, data: str = typer.Argument(..., help="observation CSV")):
    """Data-augmentation Gibbs against PMMH on the volatility."""
    with exit_codes():
        run_gibbs_demo(_config(ctx), read_observations(data))


@app.command()
def mif(ctx: typer.Context, data: str = typer.Argument(..., help="observation CSV")):
    """Iterated-filtering point estimate."""
    with exit_codes():
        run_mif(_config(ctx), read_observations(data))


@app.command()
def summarize(ctx: typer.Context, run_dir: str = typer.Argument(..., help="directory written by infer")):
    """Recompute posterior tables of a finished run."""
    with exit_codes():
        summarize_workflow(run_dir, ctx.obj["out"])


if __name__ == "__main__":
    app()
