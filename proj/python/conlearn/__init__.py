"""Continual learning with recursive second-order updates.

Thin wrapper over the C++ core. Configs are plain dicts with the same schema
as the JSON files the command-line tool reads.
"""

import json as _json

from ._conlearn import (
    BoundedUniformFeatures,
    ConfigError,
    DataError,
    GaussianFeatures,
    GaussianNoise,
    InvalidArgument,
    LearnerState,
    LinearLoss,
    LogisticLoss,
    LowExcitationFeatures,
    NumericalError,
    RateFit,
    SaturatedLoss,
    StudentTNoise,
    Task,
    UniformNoise,
    alg1_update,
    alg2_update,
    beta_schedule,
    curvature_bounds,
    g1,
    g2,
    generate_task,
    loss,
    project,
    rate_fit,
    saturation_h,
    sgd_update,
)
from . import _conlearn


def _dump(config):
    return config if isinstance(config, str) else _json.dumps(config)


def run(config, seed=0):
    """Run one seed of `config` (dict or JSON text) and return metrics as arrays."""
    return _conlearn.run(_dump(config), seed)


def run_replicates(config, output=""):
    """Run every replicate seed, writing metrics/trajectory CSVs under the output directory."""
    return _conlearn.run_replicates(_dump(config), output)


def normalize_config(config):
    """Validated config with every default filled in."""
    return _json.loads(_conlearn.normalize_config(_dump(config)))


def group_demo_config(random_order=False, sgd=False, seed=1):
    return _json.loads(_conlearn.group_demo_config(random_order, sgd, seed))


def verify(level="quick", only=()):
    return _conlearn.verify(level, list(only))


__all__ = [name for name in dir() if not name.startswith("_")]
