"""Energy functional, Rayleigh quotient, residual norm, coercivity shift.

E(u) = 1/2 u^T S_lin u + (kappa/4) int |u|^4, and for normalized fields
lambda(u) = 2 E(u) + (kappa/2) int |u|^4. The L2 residual norm solves with
the exact mass matrix (no lumping) so the 1e-8 stopping test does not
depend on a lumping approximation.
"""
from __future__ import annotations

import numpy as np

from .errors import UnnormalizedFieldError
from .field import ComplexField, l2_norm, l4_norm4
from .linsolve import solve_spd
from .operators import DensityMasses, Problem, apply_A_nl

NORMALIZATION_TOL = 1e-8


def energy(u: ComplexField, problem: Problem) -> float:
    vec = u.as_vector()
    quad = 0.5 * float(vec @ (problem.S_lin @ vec))
    kappa = problem.params.kappa
    if kappa == 0.0:
        return quad
    return quad + 0.25 * kappa * l4_norm4(u)


def energy_shifted(u: ComplexField, sigma: float, problem: Problem) -> float:
    return energy(u, problem) + 0.5 * sigma * problem.norm_sq(u)


def _require_normalized(u: ComplexField, problem: Problem) -> None:
    nrm = l2_norm(u, problem.M)
    if abs(nrm - 1.0) > NORMALIZATION_TOL:
        raise UnnormalizedFieldError(f"field norm {nrm} is not 1 within {NORMALIZATION_TOL}")


def rayleigh(u: ComplexField, problem: Problem) -> float:
    """Eigenvalue estimate 2 E(u) + (kappa/2) |u|_L4^4 for normalized u."""
    _require_normalized(u, problem)
    return 2.0 * energy(u, problem) + 0.5 * problem.params.kappa * l4_norm4(u)


def residual_l2(
    u: ComplexField,
    lam: float,
    problem: Problem,
    dm: DensityMasses = None,
    mass_solve_tol: float = 1e-12,
) -> float:
    """L2 norm of the eigen-residual A(u)u - lambda u at normalized u."""
    _require_normalized(u, problem)
    rho = apply_A_nl(u, problem, dm=dm) - lam * (problem.M2 @ u.as_vector())
    n = problem.n
    mr = solve_spd(problem.M, rho[:n], tol=mass_solve_tol)
    mi = solve_spd(problem.M, rho[n:], tol=mass_solve_tol)
    val = float(rho[:n] @ mr + rho[n:] @ mi)
    return float(np.sqrt(max(val, 0.0)))


def sufficient_shift(u: ComplexField, problem: Problem) -> float:
    """Coercivity shift sigma = (4/3) E(u) (>= kappa/3 * |u|_L4^4 at norm 1)."""
    return 4.0 / 3.0 * energy(u, problem)
