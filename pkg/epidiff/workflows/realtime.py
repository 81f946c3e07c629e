"""Real-time analysis.

Inference on the data available at successive cutoff days, with the counts
corrected by a sweep of under-reporting factors, summarised by the change of
beta between two days.

"""
from __future__ import annotations

from functools import partial

import polars as pl

from epidiff.data.io import write_chain
from epidiff.mcmc.analysis import beta_difference_analysis
from epidiff.observation.lognormal import correct_observations
from epidiff.utils.errors import DomainError
from epidiff.utils.logging import get_logger
from epidiff.utils.utils import fan_out
from epidiff.workflows.common import close_run
from epidiff.workflows.common import open_run
from epidiff.workflows.infer import fit

logger = get_logger(__name__)


def _cell_dir(out_dir, cutoff, factor):
    return f"{out_dir}/cutoff_{cutoff:g}_factor_{factor:g}"


def _realtime_cell(config, data, out_dir, cell):
    cutoff, factor = cell
    # factor multiplies the counts, so it acts as 1 / ParamSet.c
    series = correct_observations(data.truncate(cutoff), factor)
    # every cell reuses the run seed
    chain, _, _ = fit(config, series, config.seed, progress=False)
    write_chain(chain, _cell_dir(out_dir, cutoff, factor), {"cutoff": cutoff, "correction_factor": factor})
    settings = config.realtime
    summary = beta_difference_analysis(chain, settings.t_a, settings.t_b)
    return {"cutoff": cutoff, "correction_factor": factor, **summary, "acceptance": float(chain.acc_rate[-1])}


def run_realtime(config, data, out_dir=None):
    """beta(t_b) - beta(t_a) posterior for every cutoff and correction factor.

    Args:
        config (RunConfig):
            ``realtime`` holds cutoffs, correction factors and the two days
        data (ObservationSeries):
            full series
        out_dir (str | None):
            run directory

    Returns:
        pl.DataFrame: one row per (cutoff, correction factor) with the mean and quantiles
    """
    settings = config.realtime
    cutoffs = settings.cutoffs or [float(data.times[-1])]
    for cutoff in cutoffs:
        data.truncate(cutoff)
        if max(settings.t_a, settings.t_b) > cutoff:
            raise DomainError("cutoff", f"day {cutoff} precedes the compared days {settings.t_a} and {settings.t_b}")
    out_dir = open_run(config, out_dir)
    cells = [(cutoff, factor) for cutoff in cutoffs for factor in settings.correction_factors]
    rows = fan_out(partial(_realtime_cell, config, data, out_dir), cells, config.threads, desc="realtime")
    report = pl.DataFrame(rows).sort(["cutoff", "correction_factor"])
    report.write_csv(f"{out_dir}/report.csv")
    plot = report.select(
        pl.col("cutoff").cast(pl.Utf8).alias("series"),
        pl.col("correction_factor").alias("x"),
        pl.col("q97.5").alias("y"),
    )
    plot.write_csv(f"{out_dir}/plot_data.csv")
    close_run(config, out_dir, "realtime", cells=[list(cell) for cell in cells])
    return report
