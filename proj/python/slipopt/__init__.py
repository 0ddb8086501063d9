from slipopt._core import (
    ConfigError,
    NumericalError,
    UsageError,
    check_gradient,
    inverse_map_residual,
    iteration_record_json,
    level_set_perimeters,
    pairwise_interfaces,
    parse_config,
    solve,
    solve_subproblem,
    tv,
    verify_fixture,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "UsageError",
    "check_gradient",
    "inverse_map_residual",
    "iteration_record_json",
    "level_set_perimeters",
    "pairwise_interfaces",
    "parse_config",
    "solve",
    "solve_subproblem",
    "tv",
    "verify_fixture",
]
