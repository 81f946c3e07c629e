"""Config Builder.

Resolve presets, user files and command-line overrides into one RunConfig

"""
from __future__ import annotations

import json
import os

import yaml
from pydantic import ValidationError

from epidiff.utils.configs.constants import preset_dir
from epidiff.utils.configs.data_models import RunConfig
from epidiff.utils.errors import ConfigError
from epidiff.utils.logging import get_logger

logger = get_logger(__name__)


def list_presets():
    """Names of the shipped presets."""
    return sorted(f[: -len(".yaml")] for f in os.listdir(preset_dir) if f.endswith(".yaml"))


def deep_merge(base, update):
    """Recursively merge ``update`` into a copy of ``base``.

    Mappings merge, other values replace, and a null value removes the key.
    """
    merged = dict(base)
    for key, value in update.items():
        if value is None:
            merged.pop(key, None)
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_yaml(path):
    """Read one YAML mapping.

    Args:
        path (str):
            file path

    Returns:
        dict
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} does not exist")
    try:
        with open(path) as f:
            content = yaml.safe_load(f) or {}
    except yaml.YAMLError as err:
        raise ConfigError(f"{path} is not valid YAML: {err}") from err
    if not isinstance(content, dict):
        raise ConfigError(f"{path} must hold a mapping at the top level")
    return content


def resolve_preset(name, seen=()):
    """Preset mapping with its ``base:`` chain merged in, base first."""
    if name in seen:
        raise ConfigError(f"preset inheritance loops through {name}")
    path = f"{preset_dir}/{name}.yaml"
    if not os.path.exists(path):
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    content = read_yaml(path)
    base = content.pop("base", None)
    if base is None:
        return content
    return deep_merge(resolve_preset(base, (*seen, name)), content)


def _error_paths(err):
    return "; ".join(f"{'.'.join(str(loc) for loc in e['loc'])}: {e['msg']}" for e in err.errors())


def load_config(preset=None, config_path=None, overrides=None):
    """Load a run config.

    Layers, later ones winning: the preset (with its ``base:`` chain), the user
    YAML file (which may itself name a ``base:`` preset), then ``overrides``.

    Args:
        preset (str | None):
            preset name under ``epidiff/presets``
        config_path (str | None):
            user YAML file
        overrides (dict | None):
            nested values from the command line

    Returns:
        RunConfig
    """
    content = resolve_preset(preset) if preset else {}
    if config_path:
        user = read_yaml(config_path)
        base = user.pop("base", None)
        if base is not None:
            content = deep_merge(content, resolve_preset(base))
        content = deep_merge(content, user)
    content = deep_merge(content, {k: v for k, v in (overrides or {}).items() if v is not None})
    if "params" not in content:
        raise ConfigError("no parameters given; pass --preset or a config file with a params section")
    try:
        config = RunConfig(**content)
    except ValidationError as err:
        raise ConfigError(f"invalid config: {_error_paths(err)}") from err
    except ValueError as err:
        raise ConfigError(f"invalid config: {err}") from err
    try:
        config.prior_spec()
    except (ValidationError, ValueError) as err:
        raise ConfigError(f"invalid priors: {err}") from err
    return config


def config_dict(config):
    """Plain, JSON-compatible mapping of a config."""
    return json.loads(config.json())


def save_config(config, path):
    """Write the resolved config as YAML."""
    with open(path, "w") as f:
        yaml.safe_dump(config_dict(config), f, sort_keys=False)


def make_save_paths(config, out_dir=None):
    """Create the run directory.

    Args:
        config (RunConfig):
            resolved config
        out_dir (str | None):
            explicit directory; ``config.out_dir`` or ``runs/<experiment_id>`` otherwise

    Returns:
        str
    """
    out_dir = out_dir or config.out_dir or f"runs/{config.experiment_id}"
    os.makedirs(out_dir, exist_ok=True)
    return out_dir
