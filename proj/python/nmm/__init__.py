"""Nonlinear multilevel minimization with hybrid coarse models."""

from ._nmm import (
    ConfigError,
    ContractViolation,
    NumericalAbort,
    Problem,
    generate_dataset,
    parse_config,
    run_checks,
    run_experiment,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "NumericalAbort",
    "Problem",
    "generate_dataset",
    "parse_config",
    "run_checks",
    "run_experiment",
]
