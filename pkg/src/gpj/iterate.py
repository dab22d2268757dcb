"""Outer eigeniterations: damped and shifted Jacobian steps, gradient-flow
baseline, shift/damping strategies, stopping control, and telemetry.

A run starts in the damped phase with a fixed coercive shift (default
(4/3) E(u0), kept for the whole phase) and energy-optimal or fixed step
sizes. Once the residual falls below switch_tol the step size freezes at
1 and the shift follows the current eigenvalue estimate (optionally
clamped to a window, which selects excited states). Damping and shifting
are never used simultaneously. The eigenvalue estimate is always the
Rayleigh value from the energy module, never a solver byproduct.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .energy import energy, rayleigh, residual_l2, sufficient_shift
from .errors import (
    AbortedRunError,
    ConfigError,
    DegenerateDirectionError,
    SingularUpdateError,
    SolverFailure,
    StepRejectedError,
    UnnormalizedFieldError,
)
from .field import ComplexField, combine, h_inner, l2_norm
from .linesearch import compute_coeffs, golden_section_min
from .linsolve import sherman_morrison_detailed, solve_spd, solve_sym_indef
from .operators import Problem, build_A_op, build_J_op

log = logging.getLogger(__name__)

PHASE_DAMPED = "damped"
PHASE_SHIFTED = "shifted"


@dataclass
class StrategyConfig:
    method: str = "J"                      # "J" | "A"
    damping: object = "optimal"            # "optimal" or a fixed tau in (0, 2]
    shift_damped: object = "auto"          # "auto" -> (4/3) E(u0), or a number
    shift_accel: str = "rayleigh"          # "none" | "rayleigh" | "rayleigh_clamped"
    clamp: tuple = None                    # (lo, hi) for rayleigh_clamped
    switch_tol: float = 1e-3
    tol: float = 1e-8
    max_iter: int = 500
    inner_tol: float = 1e-10

    def __post_init__(self):
        if self.method not in ("J", "A"):
            raise ConfigError(f"method must be 'J' or 'A', got {self.method!r}")
        if self.damping != "optimal":
            tau = float(self.damping)
            if not 0.0 < tau <= 2.0:
                raise ConfigError(f"fixed damping must lie in (0, 2], got {tau}")
        if self.shift_accel not in ("none", "rayleigh", "rayleigh_clamped"):
            raise ConfigError(f"unknown shift_accel {self.shift_accel!r}")
        if self.shift_accel == "rayleigh_clamped":
            if self.clamp is None or len(self.clamp) != 2 or self.clamp[0] > self.clamp[1]:
                raise ConfigError("rayleigh_clamped requires clamp=(lo, hi) with lo <= hi")
        if self.shift_accel != "none" and self.switch_tol < self.tol:
            raise ConfigError(
                f"switch_tol={self.switch_tol} must be >= tol={self.tol}"
            )


@dataclass
class IterationState:
    n: int
    lam: float
    energy: float
    residual: float
    phase: str
    tau: float = float("nan")
    sigma: float = float("nan")
    mass_tilde: float = float("nan")
    ortho_defect: float = float("nan")
    solve_residual: float = float("nan")
    u: ComplexField = None


@dataclass
class StepInfo:
    tau: float
    sigma: float
    gamma: float = float("nan")
    mass_tilde: float = float("nan")
    ortho_defect: float = float("nan")
    solve_residual: float = float("nan")


@dataclass
class RunHistory:
    states: list
    converged: bool
    final: ComplexField
    method: str
    wall_time: float = 0.0
    flags: list = dc_field(default_factory=list)

    def iterations(self) -> int:
        return self.states[-1].n if self.states else 0

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iter,phase,residual,energy,lambda,tau,sigma,mass_tilde,ortho_defect\n")
            for s in self.states:
                fh.write(
                    f"{s.n},{s.phase},{s.residual:.15e},{s.energy:.15e},{s.lam:.15e},"
                    f"{s.tau:.15e},{s.sigma:.15e},{s.mass_tilde:.15e},{s.ortho_defect:.15e}\n"
                )


def _rank_one_solve(J, rhs, mode, tol, x0=None, x0_update=None):
    sol = sherman_morrison_detailed(
        J.B, J.a, J.b, J.c, rhs, mode=mode, tol=tol, x0=x0, x0_update=x0_update
    )
    rn = float(np.linalg.norm(rhs))
    cert = float(np.linalg.norm(J.matvec(sol.x) - rhs)) / rn if rn > 0 else 0.0
    return sol, cert


def _j_direction(u, sigma, problem, mode, tol, dm=None, x0=None, x0_update=None):
    """gamma-scaled solver direction w = gamma * J_sigma(u)^{-1} I u."""
    J = build_J_op(u, sigma, problem, dm=dm)
    rhs = problem.M2 @ u.as_vector()
    sol, cert = _rank_one_solve(J, rhs, mode, tol, x0=x0, x0_update=x0_update)
    gamma_inv = float(sol.x @ rhs)  # = h_inner(w, u)
    if abs(gamma_inv) < 1e-300:
        raise DegenerateDirectionError("solver direction is H-orthogonal to the iterate")
    gamma = 1.0 / gamma_inv
    return problem.field_from_vector(gamma * sol.x), gamma, cert, sol


def _a_direction(u, sigma, problem, mode, tol, dm=None, x0=None):
    A = build_A_op(u, sigma, problem, dm=dm)
    rhs = problem.M2 @ u.as_vector()
    solver = solve_spd if mode == "spd" else solve_sym_indef
    w_vec = solver(A, rhs, tol=tol, x0=x0)
    rn = float(np.linalg.norm(rhs))
    cert = float(np.linalg.norm(A @ w_vec - rhs)) / rn if rn > 0 else 0.0
    gamma_inv = float(w_vec @ rhs)
    if abs(gamma_inv) < 1e-300:
        raise DegenerateDirectionError("solver direction is H-orthogonal to the iterate")
    gamma = 1.0 / gamma_inv
    return problem.field_from_vector(gamma * w_vec), gamma, cert, w_vec


def _damped_update(u, w_scaled, tau, M):
    """Blend, record intermediate mass and orthogonality defect, renormalize."""
    u_tilde = combine(1.0 - tau, u, tau, w_scaled)
    mass = l2_norm(u_tilde, M)
    defect = abs(h_inner(combine(1.0, u_tilde, -1.0, u), u, M))
    u_next = ComplexField(u.mesh, u_tilde.re / mass, u_tilde.im / mass)
    return u_next, mass, defect


def j_step_damped(u, sigma, tau, problem, inner_tol=1e-10, dm=None):
    """One damped Jacobian step at fixed tau; returns (u_next, StepInfo)."""
    w, gamma, cert, _ = _j_direction(u, sigma, problem, "spd", inner_tol, dm=dm)
    u_next, mass, defect = _damped_update(u, w, tau, problem.M)
    return u_next, StepInfo(
        tau=tau, sigma=sigma, gamma=gamma, mass_tilde=mass,
        ortho_defect=defect, solve_residual=cert,
    )


def _backward_error_accept(B, rhs, exc, tol):
    """Inverse-iteration acceptance for a stalled near-singular solve.

    When the shift sits (numerically) on an eigenvalue, the amplified
    iterate cannot meet the plain relative-residual contract, but its
    normwise backward error ||Bx-b|| / (||B|| ||x|| + ||b||) still reaches
    the tolerance; such an x is the classical inverse-iteration direction.
    """
    x = getattr(exc, "x", None)
    if x is None or not np.all(np.isfinite(x)):
        return None
    bnorm = float(np.linalg.norm(rhs))
    Bnorm = float(np.max(np.abs(B).sum(axis=1)))
    res = float(np.linalg.norm(B @ x - rhs))
    if res <= tol * (Bnorm * float(np.linalg.norm(x)) + bnorm):
        return x, res / bnorm if bnorm > 0 else res
    return None


def j_step_shifted(u, sigma, problem, inner_tol=1e-10, dm=None):
    """Undamped shifted step u -> J_sigma(u)^{-1} I u, renormalized."""
    J = build_J_op(u, sigma, problem, dm=dm)
    rhs = problem.M2 @ u.as_vector()
    try:
        sol, cert = _rank_one_solve(J, rhs, "indef", inner_tol)
        w_vec = sol.x
    except SingularUpdateError as exc:
        raise StepRejectedError(f"shifted step rejected at sigma={sigma}: {exc}") from exc
    except SolverFailure as exc:
        accepted = _backward_error_accept(J.B, rhs, exc, inner_tol) if J.c == 0.0 else None
        if accepted is None:
            raise StepRejectedError(f"shifted step rejected at sigma={sigma}: {exc}") from exc
        w_vec, cert = accepted
    w = problem.field_from_vector(w_vec)
    nrm = l2_norm(w, problem.M)
    if nrm <= 0.0:
        raise StepRejectedError(f"shifted step produced a zero direction at sigma={sigma}")
    u_next = ComplexField(u.mesh, w.re / nrm, w.im / nrm)
    return u_next, StepInfo(tau=1.0, sigma=sigma, solve_residual=cert)


def a_step(u, sigma, tau, problem, mode="spd", inner_tol=1e-10, dm=None):
    """One damped gradient-flow step with the frozen-density operator."""
    w, gamma, cert, _ = _a_direction(u, sigma, problem, mode, inner_tol, dm=dm)
    u_next, mass, defect = _damped_update(u, w, tau, problem.M)
    return u_next, StepInfo(
        tau=tau, sigma=sigma, gamma=gamma, mass_tilde=mass,
        ortho_defect=defect, solve_residual=cert,
    )


def next_shift(lam: float, config: StrategyConfig) -> float:
    """Acceleration shift: negative of the (optionally clamped) eigenvalue."""
    if config.shift_accel == "rayleigh":
        return -lam
    if config.shift_accel == "rayleigh_clamped":
        lo, hi = config.clamp
        return -min(max(lam, lo), hi)
    raise ConfigError(f"no acceleration shift defined for {config.shift_accel!r}")


def run(
    config: StrategyConfig,
    u0: ComplexField,
    problem: Problem,
    keep_fields: bool = False,
) -> RunHistory:
    """Iterate from u0 until the L2 residual falls below config.tol."""
    if abs(l2_norm(u0, problem.M) - 1.0) > 1e-8:
        raise UnnormalizedFieldError("initial value must be L2-normalized")
    kappa = problem.params.kappa
    u = u0
    sigma_damped = (
        sufficient_shift(u0, problem)
        if config.shift_damped == "auto"
        else float(config.shift_damped)
    )
    phase = PHASE_DAMPED
    states: list[IterationState] = []
    flags: list[str] = []
    prev_energy = np.inf
    prev_w = prev_z = None
    t0 = time.perf_counter()
    converged = False

    for n in range(config.max_iter + 1):
        dm = problem.density_masses(u) if kappa != 0.0 else None
        E = energy(u, problem)
        lam = rayleigh(u, problem)
        res = residual_l2(u, lam, problem, dm=dm)
        if not (np.isfinite(E) and np.isfinite(res)):
            raise AbortedRunError(
                f"non-finite energy/residual at iteration {n}",
                history=RunHistory(states, False, u, config.method,
                                   time.perf_counter() - t0, flags),
            )
        if phase == PHASE_DAMPED and E > prev_energy + 1e-9:
            flags.append(f"energy increased by {E - prev_energy:.3e} at iteration {n}")
            log.warning("damped-phase energy increase at iteration %d: %.3e", n, E - prev_energy)
        prev_energy = E

        state = IterationState(
            n=n, lam=lam, energy=E, residual=res, phase=phase,
            u=u.copy() if keep_fields else None,
        )
        if res <= config.tol:
            states.append(state)
            converged = True
            break
        if n == config.max_iter:
            states.append(state)
            break

        if phase == PHASE_DAMPED and config.shift_accel != "none" and res < config.switch_tol:
            phase = PHASE_SHIFTED
            state.phase = phase
            prev_w = prev_z = None

        if phase == PHASE_DAMPED:
            sigma = sigma_damped
            if config.method == "J":
                w, gamma, cert, sol = _j_direction(
                    u, sigma, problem, "spd", config.inner_tol, dm=dm,
                    x0=prev_w, x0_update=prev_z,
                )
                prev_w, prev_z = sol.y, sol.z
            else:
                w, gamma, cert, w_raw = _a_direction(
                    u, sigma, problem, "spd", config.inner_tol, dm=dm, x0=prev_w
                )
                prev_w = w_raw
            if config.damping == "optimal":
                tau, _ = golden_section_min(compute_coeffs(u, w, problem))
            else:
                tau = float(config.damping)
            u_next, mass, defect = _damped_update(u, w, tau, problem.M)
            state.tau, state.sigma = tau, sigma
            state.mass_tilde, state.ortho_defect = mass, defect
            state.solve_residual = cert
        else:
            sigma = next_shift(lam, config)
            try:
                if config.method == "J":
                    u_next, info = j_step_shifted(
                        u, sigma, problem, inner_tol=config.inner_tol, dm=dm
                    )
                else:
                    u_next, info = _a_shifted(u, sigma, problem, config.inner_tol, dm)
            except StepRejectedError as exc:
                sigma_retry = sigma + 1e-6 * (1.0 + abs(sigma))
                flags.append(f"step rejected at sigma={sigma:.6e}, retrying "
                             f"with sigma={sigma_retry:.6e} (iteration {n})")
                log.warning("%s", flags[-1])
                try:
                    if config.method == "J":
                        u_next, info = j_step_shifted(
                            u, sigma_retry, problem, inner_tol=config.inner_tol, dm=dm
                        )
                    else:
                        u_next, info = _a_shifted(u, sigma_retry, problem, config.inner_tol, dm)
                except StepRejectedError as exc2:
                    raise AbortedRunError(
                        f"shifted step failed twice at iteration {n}: {exc2}",
                        history=RunHistory(states + [state], False, u, config.method,
                                           time.perf_counter() - t0, flags),
                    ) from exc2
            state.tau, state.sigma = info.tau, info.sigma
            state.solve_residual = info.solve_residual

        states.append(state)
        u = u_next

    return RunHistory(
        states=states, converged=converged, final=u, method=config.method,
        wall_time=time.perf_counter() - t0, flags=flags,
    )


def _a_shifted(u, sigma, problem, inner_tol, dm):
    """Shifted gradient-flow step (indefinite solve, renormalized)."""
    rhs = problem.M2 @ u.as_vector()
    try:
        A = build_A_op(u, sigma, problem, dm=dm)
        w_vec = solve_sym_indef(A, rhs, tol=inner_tol)
        cert = float(np.linalg.norm(A @ w_vec - rhs)) / float(np.linalg.norm(rhs))
    except SolverFailure as exc:
        accepted = _backward_error_accept(A, rhs, exc, inner_tol)
        if accepted is None:
            raise StepRejectedError(f"shifted step rejected at sigma={sigma}: {exc}") from exc
        w_vec, cert = accepted
    w = problem.field_from_vector(w_vec)
    nrm = l2_norm(w, problem.M)
    if nrm <= 0.0:
        raise StepRejectedError(f"shifted step produced a zero direction at sigma={sigma}")
    u_next = ComplexField(u.mesh, w.re / nrm, w.im / nrm)
    return u_next, StepInfo(tau=1.0, sigma=sigma, solve_residual=cert)
