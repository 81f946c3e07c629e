"""Run directories.

Every workflow writes into its own directory holding the resolved config and
a meta.json that embeds it.

"""
from __future__ import annotations

from importlib.metadata import PackageNotFoundError
from importlib.metadata import version

from epidiff.data.io import write_meta
from epidiff.utils.configs.config_builder import config_dict
from epidiff.utils.configs.config_builder import make_save_paths
from epidiff.utils.configs.config_builder import save_config
from epidiff.utils.logging import get_logger

logger = get_logger(__name__)


def package_version():
    try:
        return version("epidiff")
    except PackageNotFoundError:
        return "unknown"


def open_run(config, out_dir=None):
    """Create the run directory and write ``config.yaml`` into it."""
    out_dir = make_save_paths(config, out_dir)
    save_config(config, f"{out_dir}/config.yaml")
    logger.info(f"run {config.experiment_id} writes to {out_dir}")
    return out_dir


def run_meta(config, command, **extra):
    """meta.json content: command, version and the resolved config."""
    return {"command": command, "version": package_version(), "seed": config.seed, **extra, "config": config_dict(config)}


def close_run(config, out_dir, command, **extra):
    write_meta(run_meta(config, command, **extra), f"{out_dir}/meta.json")
