"""Average treatment effects for advertisers running parallel experiments."""

from ._core import (
    ConfigError,
    IdentificationError,
    IoError,
    assign,
    balance_test,
    calculus,
    cell_ols,
    diagnose,
    estimate,
    interaction_ols,
    ks_uniformity,
    mix_sigma,
    proportion_test,
    replicate,
    scenario_names,
    simulate,
    split_uniform,
)

__all__ = [
    "ConfigError",
    "IdentificationError",
    "IoError",
    "assign",
    "balance_test",
    "calculus",
    "cell_ols",
    "diagnose",
    "estimate",
    "interaction_ols",
    "ks_uniformity",
    "mix_sigma",
    "proportion_test",
    "replicate",
    "scenario_names",
    "simulate",
    "split_uniform",
]
