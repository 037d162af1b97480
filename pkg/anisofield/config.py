"""
    anisofield.config
    -----------------

    Experiment configuration: loading (TOML, YAML or JSON), merging of
    defaults, presets, user file and command-line overrides, and schema
    validation.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import copy
import logging
import os
import sys
from collections.abc import Mapping

import deepmerge
import jsonpointer
import jsonschema
import yaml

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from anisofield import errors
from anisofield.params import ModelParams


__all__ = [
    "DEFAULTS",
    "EXPERIMENTS",
    "SCHEMA",
    "list_presets",
    "load_file",
    "load_preset",
    "model_params",
    "preset_aliases",
    "resolve",
    "validate",
]

logger = logging.getLogger(__name__)

PRESETS_DIR = os.path.join(os.path.dirname(__file__), "presets")
ALIASES_FILE = os.path.join(PRESETS_DIR, "_aliases.yaml")

EXPERIMENTS = ("exponents", "simulate", "scaling-scan", "limit-check", "axis", "sigma")

DEFAULTS = {
    "experiment": "exponents",
    "seed": 20260101,
    "replicates": 200,
    "threads": 1,
    "output": "anisofield-out",
    "model": {
        "B": [[1.0, 0.0], [0.0, 1.0]],
        "angular": {"kind": "constant", "value": 1.0},
        "innovation": "gaussian",
        "b0": 0.0,
        "M": 64,
        "boundary_tol": 1e-6,
    },
    "grids": {
        "gamma": [0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8],
        "lambda": [16384, 65536, 262144, 1048576],
        "x_points": [[1.0, 1.0]],
        "limit_gamma": 2.0,
        "limit_lambda": [4096, 16777216],
    },
    "tolerances": {
        "slope": 0.07,
        "kink": [0.85, 1.15],
        "limit": 0.1,
        "axis_degrees": 2.0,
        "exponent": 0.05,
        "conv": 0.05,
        "mc_se": 4.0,
        "sigma": 0.01,
    },
    "oracle": {
        "M": 512,
        "window": 32,
        "tail_correction": True,
        "far_field": True,
        "field_consistent": False,
        "table_nodes": 33,
    },
    "quadrature": {"rtol": 1e-4},
    "synthesis": {
        "n": [256, 256],
        "memory_limit": 2 * 1024 ** 3,
        "lambda": 16.0,
        "gamma": 1.0,
    },
    "axis": {
        "radii": [1000.0, 1389.5, 1930.7, 2682.7, 3727.6, 5179.5, 7196.9, 10000.0],
        "lattice_radii": [128.0, 256.0],
        "n_directions": 16,
        "margin": 0.1,
    },
}

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 1}
_pair = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}


def _section(properties, required=()):
    return {
        "type": "object",
        "properties": properties,
        "required": list(required),
        "additionalProperties": False,
    }


SCHEMA = _section(
    {
        "experiment": {"enum": list(EXPERIMENTS)},
        "preset": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "replicates": _count,
        "threads": _count,
        "output": {"type": "string"},
        "model": _section(
            {
                "q1": _positive,
                "q2": _positive,
                "B": {"type": "array", "items": _pair, "minItems": 2, "maxItems": 2},
                "angular": _section(
                    {
                        "kind": {"enum": ["constant", "poly", "table"]},
                        "value": _number,
                        "plus": {"type": "array", "items": _number, "minItems": 1},
                        "minus": {"type": "array", "items": _number, "minItems": 1},
                    }
                ),
                "innovation": {"enum": ["gaussian", "rademacher", "uniform", "centered-uniform"]},
                "b0": _number,
                "M": {"type": "integer", "minimum": 0},
                "boundary_tol": _positive,
            },
            required=("q1", "q2"),
        ),
        "grids": _section(
            {
                "gamma": {"type": "array", "items": _positive, "minItems": 1},
                "lambda": {"type": "array", "items": _positive, "minItems": 1},
                "x_points": {"type": "array", "items": _pair, "minItems": 1},
                "limit_gamma": _positive,
                "limit_lambda": {"type": "array", "items": _positive, "minItems": 1},
            }
        ),
        "tolerances": _section(
            {
                "slope": _positive,
                "kink": _pair,
                "limit": _positive,
                "axis_degrees": _positive,
                "exponent": _positive,
                "conv": _positive,
                "mc_se": _positive,
                "sigma": _positive,
            }
        ),
        "oracle": _section(
            {
                "M": {"type": "integer", "minimum": 0},
                "window": {"type": "integer", "minimum": 0},
                "tail_correction": {"type": "boolean"},
                "far_field": {"type": "boolean"},
                "field_consistent": {"type": "boolean"},
                "table_nodes": {"type": "integer", "minimum": 5},
            }
        ),
        "quadrature": _section({"rtol": _positive}),
        "synthesis": _section(
            {
                "M": {"type": "integer", "minimum": 0},
                "n": {"type": "array", "items": _count, "minItems": 2, "maxItems": 2},
                "memory_limit": _count,
                "lambda": _positive,
                "gamma": _positive,
            }
        ),
        "axis": _section(
            {
                "radii": {"type": "array", "items": _positive, "minItems": 2},
                "lattice_radii": {"type": "array", "items": _positive, "minItems": 1},
                "n_directions": {"type": "integer", "minimum": 16},
                "margin": _positive,
            }
        ),
    },
    required=("model",),
)

_merge = deepmerge.Merger(
    [(Mapping, deepmerge.strategy.dict.DictStrategies("merge"))],
    ["override"],
    ["override"],
).merge


def load_file(path):
    """Load a TOML, YAML or JSON configuration file."""

    _, extension = os.path.splitext(path)
    try:
        if extension == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        if extension in {".yaml", ".yml", ".json"}:
            with open(path, "r", encoding="utf-8") as f:
                return yaml.safe_load(f) or {}
    except (OSError, tomllib.TOMLDecodeError, yaml.YAMLError) as exc:
        raise errors.ConfigError("cannot read config '%s': %s" % (path, exc), path=path) from exc
    raise errors.ConfigError("unsupported config format: '%s'" % extension, path=path)


def preset_aliases():
    """Alternative preset names mapped to the shipped preset files."""

    return dict(load_file(ALIASES_FILE))


def list_presets(aliases=False):
    names = [
        os.path.splitext(name)[0]
        for name in os.listdir(PRESETS_DIR)
        if name.endswith(".yaml") and not name.startswith("_")
    ]
    if aliases:
        names.extend(preset_aliases())
    return sorted(names)


def load_preset(name):
    target = preset_aliases().get(name, name)
    if target != name:
        logger.debug("preset '%s' is an alias of '%s'", name, target)
    path = os.path.join(PRESETS_DIR, "%s.yaml" % target)
    if not os.path.exists(path):
        raise errors.ConfigError(
            "unknown preset '%s', available: %s" % (name, ", ".join(list_presets())),
            preset=name,
        )
    return load_file(path)


def validate(config):
    validator = jsonschema.Draft7Validator(SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(config))
    if error is not None:
        pointer = jsonpointer.JsonPointer.from_parts(list(error.absolute_path)).path
        raise errors.ConfigError(
            "invalid configuration at '%s': %s" % (pointer or "/", error.message),
            pointer=pointer or "/",
        )
    return config


def resolve(path=None, preset=None, overrides=None, experiment=None):
    """Merge defaults, preset, user file and overrides, then validate."""

    user = load_file(path) if path else {}
    if not isinstance(user, Mapping):
        raise errors.ConfigError("config '%s' must be a mapping" % path, path=path)

    preset = preset or user.get("preset")
    config = copy.deepcopy(DEFAULTS)
    if preset:
        config = _merge(config, load_preset(preset))
        config["preset"] = preset
    config = _merge(config, copy.deepcopy(dict(user)))
    if preset:
        config["preset"] = preset
    if experiment:
        config["experiment"] = experiment
    for key, value in (overrides or {}).items():
        if value is not None:
            config = _merge(config, {key: value})

    logger.debug("resolved configuration: %s", config)
    return validate(config)


def model_params(config):
    return ModelParams.from_config(config["model"])
