"""Operator laboratory, run configuration, reports and the command line."""

from .config import ConfigError, RunConfig, load_config
from .fitting import KernelError, fit_prop5, fit_theorem1, solved_test_set
from .operators import OPERATOR_NAMES, OperatorModel, UnknownOperatorError, builtin_operator

__all__ = [
    "ConfigError", "RunConfig", "load_config", "KernelError", "fit_prop5", "fit_theorem1",
    "solved_test_set", "OPERATOR_NAMES", "OperatorModel", "UnknownOperatorError",
    "builtin_operator",
]
