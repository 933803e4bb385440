"""fracground: discrete ground states of the nearly-critical fractional
p-Laplacian Dirichlet problem and the concentration diagnostics around
them."""

from .concentration import (
    ConcentrationReport,
    MeasurePair,
    annulus_location_check,
    boundary_distance_trend,
    bubble,
    cc_inequality_check,
    concentration_point,
    harmonic_mean_radius,
    immanuel_check,
    measures,
    moving_plane_monotonicity,
    truncated_bubble,
    vanish_check,
)
from .config import RunConfig, config_from_json, load_config
from .domain import Annulus, Ball, Box, Difference, distance_to_boundary, normal_probe
from .field import Field, from_function, from_interior, zeros
from .fieldio import load_field, save_field
from .functionals import (
    EnergyReport,
    ground_level_formula,
    hardy_ratio,
    j_functional,
    lq_norm,
    nehari_scale,
    sobolev_constant_estimate,
)
from .grid import Grid, build_grid
from .kernel import PairWeights, build_pair_weights, critical_exponent
from .operators import (
    ds_density,
    energy_gradient,
    gagliardo_energy,
    kelvin_transform,
    scalar_leibniz_check,
    sign_inequality_holds,
)
from .runner import RunManifest, run_experiment
from .solver import (
    GroundState,
    SolverConfig,
    SweepResult,
    epsilon_sweep,
    grid_sobolev_constant,
    solve_ground_state,
    solve_radial_constrained,
)

__version__ = "0.1.0"

__all__ = [
    "Annulus", "Ball", "Box", "ConcentrationReport", "Difference", "EnergyReport",
    "Field", "Grid", "GroundState", "MeasurePair", "PairWeights", "RunConfig",
    "RunManifest", "SolverConfig", "SweepResult", "annulus_location_check",
    "boundary_distance_trend", "bubble", "build_grid", "build_pair_weights",
    "cc_inequality_check", "concentration_point", "config_from_json",
    "critical_exponent", "distance_to_boundary", "ds_density", "energy_gradient",
    "epsilon_sweep", "from_function", "from_interior", "gagliardo_energy",
    "grid_sobolev_constant", "ground_level_formula", "hardy_ratio",
    "harmonic_mean_radius", "immanuel_check", "j_functional", "kelvin_transform",
    "load_config", "load_field", "lq_norm", "measures", "moving_plane_monotonicity",
    "nehari_scale", "normal_probe", "run_experiment", "save_field",
    "scalar_leibniz_check", "sign_inequality_holds", "sobolev_constant_estimate",
    "solve_ground_state", "solve_radial_constrained", "truncated_bubble",
    "vanish_check", "zeros",
]
