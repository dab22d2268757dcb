"""Energy-diminishing step-size control for the damped iteration.

For the blend (1-t) u + t w the energy of the normalized combination is a
rational function f(t) of precomputed quadratic (alpha), quartic (beta)
and norm (zeta) coefficients, so the one-dimensional minimization costs no
extra linear solves. The quartic expansion's binomial multiplicities are
folded into the beta definitions; the normative correctness test compares
eval_f against direct evaluation of energy(normalize((1-t) u + t w)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCombinationError
from .field import ComplexField, h_inner
from .operators import Problem
from .quadrature import RULE_DENSITY, integrate_cellwise, values_at_quad

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class LineSearchCoeffs:
    alpha: tuple[float, float, float]
    beta: tuple[float, float, float, float, float]
    zeta: tuple[float, float, float]


def compute_coeffs(u: ComplexField, w: ComplexField, problem: Problem) -> LineSearchCoeffs:
    uv, wv = u.as_vector(), w.as_vector()
    Su, Sw = problem.S_lin @ uv, problem.S_lin @ wv
    alpha = (float(uv @ Su), 2.0 * float(uv @ Sw), float(wv @ Sw))

    kappa = problem.params.kappa
    if kappa == 0.0:
        beta = (0.0, 0.0, 0.0, 0.0, 0.0)
    else:
        mesh = problem.mesh
        ur = values_at_quad(mesh, u.full_re(), RULE_DENSITY)
        ui = values_at_quad(mesh, u.full_im(), RULE_DENSITY)
        wr = values_at_quad(mesh, w.full_re(), RULE_DENSITY)
        wi = values_at_quad(mesh, w.full_im(), RULE_DENSITY)
        du = ur * ur + ui * ui
        dw = wr * wr + wi * wi
        cross = ur * wr + ui * wi  # Re(u conj(w)) pointwise

        def integ(vals):
            return integrate_cellwise(mesh, vals, RULE_DENSITY)

        beta = (
            0.5 * kappa * integ(du * du),
            2.0 * kappa * integ(cross * du),
            kappa * integ(dw * du + 2.0 * cross * cross),
            2.0 * kappa * integ(cross * dw),
            0.5 * kappa * integ(dw * dw),
        )

    zeta = (
        float(problem.norm_sq(u)),
        2.0 * h_inner(u, w, problem.M),
        float(problem.norm_sq(w)),
    )
    return LineSearchCoeffs(alpha=alpha, beta=beta, zeta=zeta)


def eval_f(coeffs: LineSearchCoeffs, tau: float) -> float:
    """Energy of the normalized blend at step size tau."""
    r = 1.0 - tau
    z0, z1, z2 = coeffs.zeta
    q = r * r * z0 + r * tau * z1 + tau * tau * z2
    if q <= 1e-300:
        raise DegenerateCombinationError(f"combination norm vanishes at tau={tau}")
    s2 = 1.0 / q
    a0, a1, a2 = coeffs.alpha
    quad = r * r * a0 + r * tau * a1 + tau * tau * a2
    b0, b1, b2, b3, b4 = coeffs.beta
    quart = (
        r ** 4 * b0
        + r ** 3 * tau * b1
        + r ** 2 * tau ** 2 * b2
        + r * tau ** 3 * b3
        + tau ** 4 * b4
    )
    return 0.5 * (s2 * quad + s2 * s2 * quart)


def golden_section_min(
    coeffs: LineSearchCoeffs,
    tau_min: float = 1e-4,
    tau_max: float = 2.0,
    tol: float = 1e-3,
    max_evals: int = 40,
) -> tuple[float, float]:
    """Locate a minimizer of eval_f on [tau_min, tau_max] within tol.

    Returns (tau, f(tau)); f(tau) is the energy of the next iterate. The
    best evaluated point is tracked, so the returned value never exceeds
    any probed one even when f is not unimodal.
    """
    lo, hi = tau_min, tau_max
    evals = 0

    def probe(t):
        nonlocal evals
        evals += 1
        return eval_f(coeffs, t)

    best_t, best_f = lo, probe(lo)
    f_hi = probe(hi)
    if f_hi < best_f:
        best_t, best_f = hi, f_hi

    h = hi - lo
    c = lo + INV_PHI2 * h
    d = lo + INV_PHI * h
    fc, fd = probe(c), probe(d)
    while h > tol and evals < max_evals:
        if fc < fd:
            hi, d, fd = d, c, fc
            h = hi - lo
            c = lo + INV_PHI2 * h
            fc = probe(c)
        else:
            lo, c, fc = c, d, fd
            h = hi - lo
            d = lo + INV_PHI * h
            fd = probe(d)
    for t, f in ((c, fc), (d, fd)):
        if f < best_f:
            best_t, best_f = t, f
    return best_t, best_f
