"""Finite-element eigensolver for the Gross-Pitaevskii problem.

Damped (energy-diminishing) and spectrally shifted inverse iterations on
the Jacobian of the nonlinear operator, with a gradient-flow baseline, on
Q1 finite elements over the square (-L, L)^2.
"""

from .assembly import (
    BlockOperator,
    assemble_linear_block,
    assemble_mass,
    assemble_rotation,
    assemble_stiffness,
    assemble_weighted_mass,
)
from .energy import energy, energy_shifted, rayleigh, residual_l2, sufficient_shift
from .field import (
    ComplexField,
    combine,
    h_inner,
    l2_norm,
    l4_norm4,
    normalize,
    phase_rotate,
    read_field_csv,
    write_field_csv,
)
from .iterate import (
    IterationState,
    RunHistory,
    StrategyConfig,
    a_step,
    j_step_damped,
    j_step_shifted,
    next_shift,
    run,
)
from .linesearch import LineSearchCoeffs, compute_coeffs, eval_f, golden_section_min
from .linsolve import solve_sherman_morrison, solve_spd, solve_sym_indef
from .mesh import Mesh, build_mesh
from .operators import JOperator, ModelParams, Problem, apply_A_nl, build_A_op, build_J_op
from .oracle import (
    RateReport,
    dense_sym_eig,
    fd_gradient_check,
    fd_jacobian_check,
    j_spectrum_near,
    measure_rate,
    predicted_rate,
)
from .potentials import bubble_initial, disorder, harmonic, potential_from_file

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
