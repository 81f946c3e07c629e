"""Prior sensitivity.

Reruns inference with the prior means of chosen slots tilted by a percentage
and checks the untilted parameters and the beta bands against the baseline run.

"""
from __future__ import annotations

from functools import partial

import numpy as np
import polars as pl

from epidiff.data.io import write_chain
from epidiff.mcmc.analysis import quantile_summary
from epidiff.model.params import slot_columns
from epidiff.model.priors import tilt_prior
from epidiff.utils.errors import ConfigError
from epidiff.utils.logging import get_logger
from epidiff.utils.utils import fan_out
from epidiff.workflows.common import close_run
from epidiff.workflows.common import open_run
from epidiff.workflows.infer import fit

logger = get_logger(__name__)


def _run_label(cell):
    name, pct = cell
    return "baseline" if name is None else f"{name}_{pct:+g}"


def _tilted_run(config, data, out_dir, cell):
    """Chain for one (slot, pct) cell; ``(None, 0)`` is the baseline."""
    name, pct = cell
    priors = config.prior_spec()
    if name is not None:
        priors = tilt_prior(priors, name, pct)
    chain, _, _ = fit(config, data, config.seed, progress=False, priors=priors)
    write_chain(chain, f"{out_dir}/{_run_label(cell)}", {"tilted": name, "pct": pct})
    paths, _ = chain.kept_paths()
    return {
        "cell": cell,
        "names": chain.names,
        "summary": quantile_summary(chain.kept()),
        "beta": quantile_summary(np.exp(paths)) if paths.shape[0] else None,
    }


def compare_to_baseline(baseline, runs, tilted_columns):
    """Medians of untilted columns against the baseline intervals.

    Args:
        baseline (dict):
            summary of the baseline run
        runs (list[dict]):
            summaries of the tilted runs
        tilted_columns (dict[str, list[str]]):
            constrained columns belonging to each tilted slot

    Returns:
        tuple[pl.DataFrame, pl.DataFrame]: per-parameter checks and per-run beta checks
    """
    base = baseline["summary"]
    sampled = [j for j, name in enumerate(baseline["names"]) if base["q97.5"][j] > base["q2.5"][j]]
    rows, beta_rows = [], []
    for run in runs:
        name, pct = run["cell"]
        median = run["summary"]["q50"]
        for j in sampled:
            column = baseline["names"][j]
            if column in tilted_columns[name]:
                continue
            rows.append(
                {
                    "tilted": name,
                    "pct": pct,
                    "parameter": column,
                    "median": median[j],
                    "baseline_median": base["q50"][j],
                    "in_95": bool(base["q2.5"][j] <= median[j] <= base["q97.5"][j]),
                    "in_50": bool(base["q25"][j] <= median[j] <= base["q75"][j]),
                }
            )
        if run["beta"] is not None and baseline["beta"] is not None:
            inside = (run["beta"]["q50"] >= baseline["beta"]["q25"]) & (run["beta"]["q50"] <= baseline["beta"]["q75"])
            beta_rows.append({"tilted": name, "pct": pct, "beta_median_in_50_frac": float(inside.mean()), "beta_median_in_50": bool(inside.all())})
    return pl.DataFrame(rows), pl.DataFrame(beta_rows)


def run_sensitivity(config, data, out_dir=None):
    """Baseline plus one run per tilted slot and percentage.

    Writes ``report.csv`` (parameter checks), ``beta_report.csv`` and one chain
    directory per run.

    Returns:
        pl.DataFrame: the parameter checks
    """
    settings = config.sensitivity
    priors = config.prior_spec()
    tilted_columns = {}
    for name in settings.tilted:
        slot = next((s for s in priors.sampled_slots() if s.name == name), None)
        if slot is None:
            raise ConfigError(f"cannot tilt {name!r}: it is not a sampled slot of this model")
        tilted_columns[name] = slot_columns(slot, priors.n_groups)
    out_dir = open_run(config, out_dir)
    cells = [(None, 0.0)] + [(name, pct) for name in settings.tilted for pct in settings.tilt_pcts]
    results = fan_out(partial(_tilted_run, config, data, out_dir), cells, config.threads, desc="sensitivity")
    report, beta_report = compare_to_baseline(results[0], results[1:], tilted_columns)
    report.write_csv(f"{out_dir}/report.csv")
    beta_report.write_csv(f"{out_dir}/beta_report.csv")
    if report.height:
        logger.info(f"untilted medians inside the baseline 95% intervals: {report['in_95'].sum()}/{report.height}")
    close_run(config, out_dir, "sensitivity", runs=[_run_label(c) for c in cells])
    return report
