"""Desk-scale ground truth: dense eigensolves, finite-difference checks,
and measurement of the local convergence rate of the shifted iteration.

Everything here is independent of the iterative solver paths it validates:
dense factorizations instead of Krylov solves, and its own quadrature
orders where integrals appear. Dense work is capped at dimension 5000.

The converged eigenvalue is never simple in the doubled real formulation:
the global-phase mode i*u* carries the same eigenvalue. For rotation-free
real states the spectrum is therefore computed on the real subspace, where
the phase copy is invisible to the iteration; otherwise the whole
two-dimensional eigenspace {u*, i u*} is deflated obliquely with its
adjoint pair.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .energy import energy, rayleigh
from .errors import SizeCapError
from .field import ComplexField, h_inner, phase_rotate
from .operators import Problem, apply_A_nl, build_J_op
from .quadrature import RULE_DENSITY, cell_node_values, integrate_cellwise, physical_points

DENSE_CAP = 5000


def quadrature_energy(u: ComplexField, problem: Problem) -> float:
    """Energy evaluated directly by Gauss quadrature of the interpolant.

    Shares no assembled matrix with the energy module; pins the sign of the
    rotation coupling blocks through the identity with the quadratic form.
    """
    mesh = problem.mesh
    rule = RULE_DENSITY
    scale = 2.0 / mesh.h
    gx, gy = physical_points(mesh, rule)
    cr = cell_node_values(mesh, u.full_re())
    ci = cell_node_values(mesh, u.full_im())
    rx, ry = cr @ (rule.dshape[:, :, 0].T) * scale, cr @ (rule.dshape[:, :, 1].T) * scale
    ix, iy = ci @ (rule.dshape[:, :, 0].T) * scale, ci @ (rule.dshape[:, :, 1].T) * scale
    vr, vi = cr @ rule.shape.T, ci @ rule.shape.T
    dens = vr * vr + vi * vi
    w = problem.params.potential(gx, gy)
    integrand = rx * rx + ry * ry + ix * ix + iy * iy + w * dens
    omega = problem.params.omega
    if omega != 0.0:
        rot_i = gy * ix - gx * iy  # R . grad(u_I)
        rot_r = gy * rx - gx * ry
        integrand = integrand + omega * (vr * rot_i - vi * rot_r)
    total = integrate_cellwise(mesh, integrand, rule)
    kappa = problem.params.kappa
    if kappa != 0.0:
        total += 0.5 * kappa * integrate_cellwise(mesh, dens * dens, rule)
    return 0.5 * total


@dataclass
class RateReport:
    lambda_star: float
    mu: float
    sigma: float
    predicted: float
    observed: float

    def to_json(self, path=None) -> str:
        payload = json.dumps(
            {
                "lambda_star": self.lambda_star,
                "mu": self.mu,
                "sigma": self.sigma,
                "predicted": self.predicted,
                "observed": self.observed,
            },
            indent=2,
        )
        if path is not None:
            with open(path, "w") as fh:
                fh.write(payload + "\n")
        return payload


def _dense(A) -> np.ndarray:
    return A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)


def dense_sym_eig(A, M, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k smallest eigenpairs of the symmetric pencil A x = lam M x (dense)."""
    Ad, Md = _dense(A), _dense(M)
    n = Ad.shape[0]
    if n > DENSE_CAP:
        raise SizeCapError(f"dense eigensolve capped at {DENSE_CAP}, got {n}")
    if not 1 <= k <= n:
        raise SizeCapError(f"requested k={k} eigenpairs from a pencil of size {n}")
    vals, vecs = sla.eigh(Ad, Md, subset_by_index=[0, k - 1])
    for j in range(k):
        res = np.linalg.norm(Ad @ vecs[:, j] - vals[j] * (Md @ vecs[:, j]))
        if res > 1e-10 * max(1.0, np.linalg.norm(vecs[:, j])) * max(1.0, abs(vals[j])):
            raise RuntimeError(f"dense eigenpair {j} residual {res:.3e} too large")
    return vals, vecs


def _inverse_iteration(T_lu, M, start, steps=8):
    v = start / np.linalg.norm(start)
    for _ in range(steps):
        v = sla.lu_solve(T_lu, M @ v)
        v /= np.linalg.norm(v)
    return v


@dataclass
class SpectrumNear:
    lambda_star: float
    mu: float
    w_star: np.ndarray     # adjoint eigenvector for lambda_star
    mu_vector: np.ndarray  # primal eigenvector for mu
    defective: bool = False


def j_spectrum_near(u_star: ComplexField, sigma: float, problem: Problem) -> SpectrumNear:
    """lambda*, its adjoint eigenvector, and the nearest other eigenvalue
    of the Jacobian at the converged state to -sigma."""
    lam_star = rayleigh(u_star, problem)
    J = build_J_op(u_star, 0.0, problem)
    n = problem.n
    real_case = problem.params.omega == 0.0 and np.max(np.abs(u_star.im), initial=0.0) < 1e-12
    if real_case:
        Jd = J.to_dense()[:n, :n]
        Md = problem.M.toarray()
        prim = u_star.re.copy()
    else:
        Jd = J.to_dense()
        Md = problem.M2.toarray()
        prim = u_star.as_vector()
    dim = Jd.shape[0]
    if dim > DENSE_CAP:
        raise SizeCapError(f"dense spectrum capped at {DENSE_CAP}, got {dim}")
    prim /= np.sqrt(prim @ (Md @ prim))

    # adjoint eigenvector(s) of lambda*: transpose inverse iteration at -lambda*
    delta = 1e-9 * (1.0 + abs(lam_star))
    T = sla.lu_factor(Jd.T - (lam_star - delta) * Md)
    w_star = _inverse_iteration(T, Md, Md @ prim)
    w_star /= np.sqrt(w_star @ (Md @ w_star))

    defl_prim = [prim]
    defl_adj = [w_star]
    if not real_case:
        # the global-phase copy of lambda*: primal i*u*, adjoint from the
        # transpose iteration restarted orthogonally to w_star
        phase = np.concatenate([-u_star.im, u_star.re])
        phase /= np.sqrt(phase @ (Md @ phase))
        w2 = _inverse_iteration(T, Md, Md @ phase)
        w2 -= w_star * (w2 @ (Md @ w_star))
        nw2 = np.sqrt(max(w2 @ (Md @ w2), 0.0))
        if nw2 > 1e-8:
            defl_prim.append(phase)
            defl_adj.append(w2 / nw2)

    P = np.column_stack(defl_prim)
    Wd = np.column_stack(defl_adj)
    gram = Wd.T @ (Md @ P)
    defective = abs(np.linalg.det(gram)) < 1e-8
    if defective:
        warnings.warn(
            "adjoint/primal pairing is nearly singular; the eigenvalue pair "
            "may be defective and the deflation unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    gram_inv = np.linalg.pinv(gram)

    def deflate(v):
        return v - P @ (gram_inv @ (Wd.T @ (Md @ v)))

    T2 = sla.lu_factor(Jd + sigma * Md)
    rng = np.random.default_rng(1234)
    v = deflate(rng.standard_normal(dim))
    v /= np.linalg.norm(v)
    mu_prev = np.inf
    for _ in range(200):
        v = sla.lu_solve(T2, Md @ v)
        v = deflate(v)
        v /= np.linalg.norm(v)
        mu = float(v @ (Jd @ v)) / float(v @ (Md @ v))
        if abs(mu - mu_prev) < 1e-11 * (1.0 + abs(mu)):
            break
        mu_prev = mu
    return SpectrumNear(
        lambda_star=lam_star, mu=mu, w_star=w_star, mu_vector=v, defective=defective
    )


def predicted_rate(lambda_star: float, mu: float, sigma: float) -> float:
    return abs(lambda_star + sigma) / abs(mu + sigma)


def align_phase(u: ComplexField, ref: ComplexField, M) -> ComplexField:
    """Rotate the global phase of u to maximize h_inner(u, ref)."""
    c = h_inner(u, ref, M)
    s = float(u.im @ (M @ ref.re) - u.re @ (M @ ref.im))
    r = np.hypot(c, s)
    if r == 0.0:
        return u
    theta = np.arctan2(-s, c)
    return phase_rotate(u, theta)


def _iter_fields(history_or_fields):
    states = getattr(history_or_fields, "states", None)
    if states is not None:
        return [s.u for s in states if s.u is not None]
    return list(history_or_fields)


def v_norm_errors(history_or_fields, u_star: ComplexField, problem: Problem) -> np.ndarray:
    """Gradient-seminorm distances ||u^n - u*||_V along a run, phase-aligned.

    Accepts a RunHistory with recorded fields or a plain list of fields.
    """
    K = problem.K
    errs = []
    for u in _iter_fields(history_or_fields):
        ua = align_phase(u, u_star, problem.M)
        er, ei = ua.re - u_star.re, ua.im - u_star.im
        errs.append(float(np.sqrt(er @ (K @ er) + ei @ (K @ ei))))
    return np.asarray(errs)


def measure_rate(history, u_star: ComplexField, problem: Problem, k: int = 8) -> float:
    """Geometric mean of the last k successive V-norm error ratios."""
    errs = v_norm_errors(history, u_star, problem)
    errs = errs[errs > 0]
    if errs.size < k + 1:
        raise ValueError(f"need at least {k + 1} recorded iterates, got {errs.size}")
    ratios = errs[-k:] / errs[-k - 1 : -1]
    return float(np.exp(np.mean(np.log(ratios))))


def refine_eigenpair(u: ComplexField, problem: Problem, steps: int = 3) -> ComplexField:
    """Polish a converged state by dense shifted steps (oracle-side Newton)."""
    n = problem.n
    if 2 * n > DENSE_CAP:
        raise SizeCapError(f"dense refinement capped at {DENSE_CAP}, got {2 * n}")
    M2 = problem.M2.toarray()
    for _ in range(steps):
        lam = rayleigh(u, problem)
        J = build_J_op(u, 0.0, problem).to_dense()
        delta = 1e-12 * (1.0 + abs(lam))
        vec = sla.solve(J - (lam - delta) * M2, M2 @ u.as_vector())
        vec /= np.sqrt(vec @ (M2 @ vec))
        ref = u.as_vector()
        if vec @ (M2 @ ref) < 0:
            vec = -vec
        u = problem.field_from_vector(vec)
    return u


@dataclass
class FDReport:
    ts: tuple
    errors: tuple

    def ratios(self) -> np.ndarray:
        e = np.asarray(self.errors)
        return e[1:] / e[:-1]


def fd_gradient_check(
    u: ComplexField, v: ComplexField, problem: Problem, ts=(1e-2, 1e-3, 1e-4)
) -> FDReport:
    """Central differences of the energy against the analytic gradient.

    The analytic side freezes the 1/|u|^2 scaling of the nonlinear term,
    which is what the energy differentiates to (at |u|=1 it coincides with
    the operator action).
    """
    from .field import combine

    nsq = problem.norm_sq(u)
    grad = apply_A_nl(u, problem).copy()
    if problem.params.kappa != 0.0:
        # undo the scaling-invariance factor: E' carries kappa, not kappa/|u|^2
        lin = problem.S_lin @ u.as_vector()
        grad = lin + (grad - lin) * nsq
    exact = float(grad @ v.as_vector())
    errors = []
    for t in ts:
        ep = energy(combine(1.0, u, t, v), problem)
        em = energy(combine(1.0, u, -t, v), problem)
        errors.append(abs((ep - em) / (2 * t) - exact))
    return FDReport(ts=tuple(ts), errors=tuple(errors))


def fd_jacobian_check(
    u: ComplexField, v: ComplexField, problem: Problem, ts=(1e-2, 1e-3, 1e-4)
) -> FDReport:
    """Central differences of the operator action against the Jacobian."""
    from .field import combine

    J = build_J_op(u, 0.0, problem)
    exact = J.matvec(v.as_vector())
    scale = max(np.linalg.norm(exact), 1e-300)
    errors = []
    for t in ts:
        ap = apply_A_nl(combine(1.0, u, t, v), problem)
        am = apply_A_nl(combine(1.0, u, -t, v), problem)
        errors.append(float(np.linalg.norm((ap - am) / (2 * t) - exact)) / scale)
    return FDReport(ts=tuple(ts), errors=tuple(errors))
