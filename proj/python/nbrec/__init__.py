# Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.
"""Neighborhood-aware debiased recommendation.

Thin wrapper over the compiled ``_core`` module. Matrices are 2-d float
arrays indexed (user, item); per-treatment stacks are (K, users, items).
Workflow functions take a flat ``{key: value}`` config with string values.
"""

from ._core import (
    ConfigError,
    DataError,
    NbrecError,
    NumericError,
    ParseError,
    analytic_bias,
    auc,
    config_hash,
    dr_loss,
    ideal_loss,
    ideal_loss_n,
    ips_loss,
    kernel_convolution,
    kernel_eval,
    kernel_mu2,
    kernel_roughness,
    n_dr_loss,
    n_ips_loss,
    naive_loss,
    ndcg_at_k,
    neighbor_rep,
    optimal_bandwidth,
    relative_error,
    run_estimate,
    run_eval,
    run_sweep_bandwidth,
    run_synth,
    run_train,
    run_verify,
    selection_gap,
    verify_bias_variance,
    write_coat_like,
)

__version__ = "0.1.0"


def _stringify(config):
    return {str(k): str(v) for k, v in config.items()}


def train(config):
    """Runs the training workflow and returns its metric rows."""
    return run_train(_stringify(config))


def evaluate(config):
    """Reloads a trained model and returns its metric rows."""
    return run_eval(_stringify(config))
