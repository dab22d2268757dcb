"""Discrete nonlinear operators: A(u) action, shifted A-operator, Jacobian.

The Jacobian splits into a symmetric sparse part B and a non-symmetric
rank-one correction:

    J_sigma(u) = B - c * a b^T,
    B = S_lin + sigma*M2 + (kappa/|u|^2) diag(M_d, M_d)
        + (2 kappa/|u|^2) [[M_rr, M_ri], [M_ri, M_ii]],
    a = [M_d u_R; M_d u_I],  b = [M u_R; M u_I],  c = 2 kappa / |u|^4,

where M_w denotes the mass matrix weighted by w and M_d uses the density
|u|^2 = u_R^2 + u_I^2. The orientation of the rank-one factors (density-
weighted vector on the test side, plain mass on the trial side) is forced
by the identities J(u) u = A(u) u and J(u) = dA(u), both checked in the
test suite by independent finite-difference oracles.

|u| is always recomputed from the mass matrix; the damped iteration feeds
un-normalized intermediates through these builders.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .assembly import (
    BlockOperator,
    assemble_linear_block,
    assemble_mass,
    assemble_stiffness,
    assemble_weighted_mass,
    block_diag2,
)
from .errors import ZeroFieldError
from .field import ComplexField
from .mesh import Mesh, build_mesh
from .quadrature import RULE_DENSITY, values_at_quad


@dataclass(frozen=True)
class ModelParams:
    """Physical model: domain half-width, rotation speed, repulsion, trap."""

    L: float
    omega: float = 0.0
    kappa: float = 0.0
    potential: Callable[[np.ndarray, np.ndarray], np.ndarray] = None

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if self.potential is None:
            object.__setattr__(self, "potential", lambda x, y: np.zeros_like(x))


class Problem:
    """A model bound to a mesh, with the time-independent matrices cached."""

    def __init__(self, mesh: Mesh, params: ModelParams):
        if params.L != mesh.L:
            raise ValueError(f"params.L={params.L} does not match mesh.L={mesh.L}")
        validate = getattr(params.potential, "validate", None)
        if validate is not None:
            validate(mesh)
        self.mesh = mesh
        self.params = params
        self.K = assemble_stiffness(mesh)
        self.M = assemble_mass(mesh)
        self.linear_block: BlockOperator = assemble_linear_block(
            mesh, params.potential, params.omega
        )
        self.S_lin: sp.csr_matrix = self.linear_block.matrix()
        self.M2: sp.csr_matrix = block_diag2(self.M)
        self.K2: sp.csr_matrix = block_diag2(self.K)

    @classmethod
    def build(cls, params: ModelParams, n_cells: int) -> "Problem":
        return cls(build_mesh(params.L, n_cells), params)

    @property
    def n(self) -> int:
        return self.mesh.n_interior

    def field_from_vector(self, vec: np.ndarray) -> ComplexField:
        return ComplexField.from_vector(self.mesh, vec)

    def norm_sq(self, u: ComplexField) -> float:
        return float(u.re @ (self.M @ u.re) + u.im @ (self.M @ u.im))

    def density_masses(self, u: ComplexField) -> "DensityMasses":
        """The three field-product weighted masses for the current iterate."""
        re_q = values_at_quad(self.mesh, u.full_re(), RULE_DENSITY)
        im_q = values_at_quad(self.mesh, u.full_im(), RULE_DENSITY)
        M_rr = assemble_weighted_mass(self.mesh, re_q * re_q)
        M_ii = assemble_weighted_mass(self.mesh, im_q * im_q)
        M_ri = assemble_weighted_mass(self.mesh, re_q * im_q)
        return DensityMasses(M_rr=M_rr, M_ri=M_ri, M_ii=M_ii)


@dataclass
class DensityMasses:
    M_rr: sp.csr_matrix
    M_ri: sp.csr_matrix
    M_ii: sp.csr_matrix

    @property
    def M_d(self) -> sp.csr_matrix:
        """Mass weighted by |u|^2 (= M_rr + M_ii, linearity in the weight)."""
        return self.M_rr + self.M_ii


@dataclass
class JOperator:
    """Symmetric part plus rank-one correction: J = B - c * a b^T."""

    B: sp.csr_matrix
    a: np.ndarray
    b: np.ndarray
    c: float
    sigma: float = 0.0

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.B @ x - (self.c * (self.b @ x)) * self.a

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        return self.B @ x - (self.c * (self.a @ x)) * self.b

    def to_dense(self) -> np.ndarray:
        return self.B.toarray() - self.c * np.outer(self.a, self.b)


def _checked_norm_sq(problem: Problem, u: ComplexField) -> float:
    nsq = problem.norm_sq(u)
    if nsq <= 0.0:
        raise ZeroFieldError("operator build requires a nonzero field")
    return nsq


def apply_A_nl(u: ComplexField, problem: Problem, dm: DensityMasses = None) -> np.ndarray:
    """Dual vector of the scaling-invariant nonlinear operator acting on u."""
    nsq = _checked_norm_sq(problem, u)
    vec = u.as_vector()
    out = problem.S_lin @ vec
    kappa = problem.params.kappa
    if kappa != 0.0:
        if dm is None:
            dm = problem.density_masses(u)
        M_d = dm.M_d
        out[: problem.n] += (kappa / nsq) * (M_d @ u.re)
        out[problem.n :] += (kappa / nsq) * (M_d @ u.im)
    return out


def build_A_op(
    u: ComplexField, sigma: float, problem: Problem, dm: DensityMasses = None
) -> sp.csr_matrix:
    """Frozen-density operator plus shift: S_lin + (kappa/|u|^2) diag(M_d) + sigma*M2."""
    nsq = _checked_norm_sq(problem, u)
    out = problem.S_lin
    kappa = problem.params.kappa
    if kappa != 0.0:
        if dm is None:
            dm = problem.density_masses(u)
        out = out + (kappa / nsq) * block_diag2(dm.M_d)
    if sigma != 0.0:
        out = out + sigma * problem.M2
    return out.tocsr()


def build_J_op(
    u: ComplexField, sigma: float, problem: Problem, dm: DensityMasses = None
) -> JOperator:
    """Jacobian of the nonlinear operator at u, shifted by sigma."""
    nsq = _checked_norm_sq(problem, u)
    kappa = problem.params.kappa
    if kappa == 0.0:
        B = build_A_op(u, sigma, problem)
        z = np.zeros(2 * problem.n)
        return JOperator(B=B, a=z, b=z, c=0.0, sigma=sigma)
    if dm is None:
        dm = problem.density_masses(u)
    M_d = dm.M_d
    B = problem.S_lin + (kappa / nsq) * block_diag2(M_d)
    B = B + (2.0 * kappa / nsq) * sp.bmat(
        [[dm.M_rr, dm.M_ri], [dm.M_ri, dm.M_ii]], format="csr"
    )
    if sigma != 0.0:
        B = B + sigma * problem.M2
    a = np.concatenate([M_d @ u.re, M_d @ u.im])
    b = np.concatenate([problem.M @ u.re, problem.M @ u.im])
    c = 2.0 * kappa / nsq ** 2
    return JOperator(B=B.tocsr(), a=a, b=b, c=c, sigma=sigma)
