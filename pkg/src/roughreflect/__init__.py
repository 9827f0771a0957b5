"""Reflected differential equations driven by irregular grid paths.

The package models càdlàg paths as staircase functions on finite time
grids, measures them in p-variation, reflects them at time-dependent
lower barriers through the Skorokhod map, and solves reflected
equations in two regimes: Young (drift of finite q-variation plus an
additive forcing path) and rough (a level-2 driver with its iterated
integrals).  Everything reports residuals computed from delivered
output, so claims are checkable after the fact.
"""

from .fields import VectorField, check_derivatives, constant_field, tanh_field
from .generators import RNG_ALGORITHM, GeneratorSpec, generate, standard_fields
from .paths import (
    GridPath,
    IncrementalVariation,
    TimeChange,
    TimeGrid,
    j1_distance,
    merge_grids,
    p_variation,
    p_variation_open,
    path_from_csv,
    path_to_csv,
    read_csv,
    sup_distance,
    variation_distance,
    variation_from_cells,
    variation_power_sum,
    write_csv,
)
from .rough import (
    ControlledPath,
    Level2RoughPath,
    RdeSolution,
    RdeSolveConfig,
    chen_lookup,
    compose_controlled,
    controlled_norm,
    left_point_lift,
    perturb_area,
    remainder,
    rough_from_csv,
    rough_integral,
    rough_jump_step,
    rough_seminorm,
    rough_to_csv,
    solve_reflected_rde,
    two_param_p_variation,
)
from .skorokhod import (
    SkorokhodSolution,
    VerificationReport,
    lipschitz_ratio,
    solve_skorokhod,
    verify_skorokhod,
)
from .young import (
    NonConvergenceError,
    SolveFailure,
    SolveReport,
    WindowRecord,
    YoungSolution,
    YoungSolveConfig,
    solve_reflected_young,
    stability_ratio,
    young_estimate_residual,
    young_integral,
    young_jump_step,
)

__version__ = "0.1.0"

__all__ = [
    "RNG_ALGORITHM",
    "ControlledPath",
    "GeneratorSpec",
    "GridPath",
    "IncrementalVariation",
    "Level2RoughPath",
    "NonConvergenceError",
    "RdeSolution",
    "RdeSolveConfig",
    "SkorokhodSolution",
    "SolveFailure",
    "SolveReport",
    "TimeChange",
    "TimeGrid",
    "VectorField",
    "VerificationReport",
    "WindowRecord",
    "YoungSolution",
    "YoungSolveConfig",
    "check_derivatives",
    "chen_lookup",
    "compose_controlled",
    "constant_field",
    "controlled_norm",
    "generate",
    "j1_distance",
    "left_point_lift",
    "lipschitz_ratio",
    "merge_grids",
    "p_variation",
    "p_variation_open",
    "path_from_csv",
    "path_to_csv",
    "perturb_area",
    "read_csv",
    "remainder",
    "rough_from_csv",
    "rough_integral",
    "rough_jump_step",
    "rough_seminorm",
    "rough_to_csv",
    "solve_reflected_rde",
    "solve_reflected_young",
    "solve_skorokhod",
    "stability_ratio",
    "standard_fields",
    "sup_distance",
    "tanh_field",
    "two_param_p_variation",
    "variation_distance",
    "variation_from_cells",
    "variation_power_sum",
    "verify_skorokhod",
    "write_csv",
    "young_estimate_residual",
    "young_integral",
    "young_jump_step",
]
