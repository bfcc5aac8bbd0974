"""Minimisers of 1/2 ||grad phi||^2 + beta ||phi||_1 on the unit L2 sphere of
radial fields in R^3, by the explicit Bessel/Helmholtz solution and by an
iterative direct method."""

from .analysis import (
    ScalingReport,
    fit_power_law,
    nash_family,
    nash_ratio,
    rescale_unitary,
    scaling_scan,
    virial_check,
)
from .closed_form import (
    MinimizerParams,
    boundary_report,
    eval_derivative,
    eval_minimizer,
    geometry_constant,
    helmholtz_residual,
    sample,
    solve_parameters,
)
from .direct import SolverOptions, SolverTrace, minimize, project_sphere, prox_l1, smooth_gradient
from .exceptions import BracketError, DegenerateProfileError, EvaluationError, StepSizeError
from .grid import (
    EnergyBreakdown,
    RadialGrid,
    RadialProfile,
    evaluate_functional,
    find_root,
    kinetic_energy,
    l1_norm,
    l2_norm,
)
from .rearrangement import ShellDecomposition, check_rearrangement, rearrange, to_shells

__version__ = "0.1.0"
