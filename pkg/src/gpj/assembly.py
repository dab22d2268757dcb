"""Sparse assembly of the bilinear forms on interior nodes.

Covers the stiffness K, mass M, weighted masses M_w (3x3 Gauss), the
antisymmetric rotation coupling C with C_ij = int phi_i (R . grad phi_j),
R(x, y) = (y, -x), and the composition of the linear part into the 2N x 2N
real block operator [[A, Omega*C], [-Omega*C, A]].

The harmonic-trap correction -Omega^2 |x|^2 / 4 never appears explicitly:
it cancels exactly between |grad_R u|^2 and the rotated potential, so the
diagonal blocks carry the plain potential W. The off-diagonal block signs
are pinned by the energy identity u^T S u + (kappa/2) |u|_L4^4 = 2 E(u),
which the test suite checks against the energy module.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError
from .mesh import Mesh
from .quadrature import (
    RULE_BILINEAR,
    RULE_DENSITY,
    QuadRule,
    physical_points,
    quad_rule,
)

WeightLike = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], np.ndarray]


def _interior_triplets(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    """Scatter per-cell 4x4 blocks into the interior-only CSR matrix."""
    cells = mesh.cells
    rows = np.repeat(cells, 4, axis=1).ravel()
    cols = np.tile(cells, (1, 4)).ravel()
    vals = local.reshape(-1)
    ri = mesh.interior_index[rows]
    ci = mesh.interior_index[cols]
    keep = (ri >= 0) & (ci >= 0)
    n = mesh.n_interior
    mat = sp.coo_matrix((vals[keep], (ri[keep], ci[keep])), shape=(n, n))
    return mat.tocsr()


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """K_ij = int grad phi_i . grad phi_j; SPD on interior nodes."""
    rule = RULE_BILINEAR
    # physical gradients = (2/h) * reference gradients; jacobian = (h/2)^2
    local = np.einsum("q,qid,qjd->ij", rule.weights, rule.dshape, rule.dshape)
    locals_ = np.broadcast_to(local, (mesh.cells.shape[0], 4, 4))
    return _interior_triplets(mesh, np.ascontiguousarray(locals_))


def assemble_mass(mesh: Mesh, *, interior_only: bool = True) -> sp.csr_matrix:
    """M_ij = int phi_i phi_j; SPD. interior_only=False keeps boundary rows."""
    rule = RULE_BILINEAR
    jac = (0.5 * mesh.h) ** 2
    local = jac * np.einsum("q,qi,qj->ij", rule.weights, rule.shape, rule.shape)
    if interior_only:
        locals_ = np.broadcast_to(local, (mesh.cells.shape[0], 4, 4))
        return _interior_triplets(mesh, np.ascontiguousarray(locals_))
    cells = mesh.cells
    rows = np.repeat(cells, 4, axis=1).ravel()
    cols = np.tile(cells, (1, 4)).ravel()
    vals = np.broadcast_to(local, (cells.shape[0], 4, 4)).reshape(-1)
    n = mesh.n_nodes
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def _weight_values(mesh: Mesh, w: WeightLike, rule: QuadRule) -> np.ndarray:
    if callable(w):
        gx, gy = physical_points(mesh, rule)
        wq = np.asarray(w(gx, gy), dtype=float)
        if wq.shape != gx.shape:
            wq = np.broadcast_to(wq, gx.shape)
    else:
        wq = np.asarray(w, dtype=float)
        expected = (mesh.cells.shape[0], rule.nq)
        if wq.shape != expected:
            raise AssemblyError(
                f"weight array shape {wq.shape} does not match {expected}"
            )
    if not np.all(np.isfinite(wq)):
        raise AssemblyError("non-finite weight value at a quadrature point")
    return wq


def assemble_weighted_mass(
    mesh: Mesh, w: WeightLike, rule: QuadRule = RULE_DENSITY
) -> sp.csr_matrix:
    """(M_w)_ij = int w phi_i phi_j via 3x3 Gauss; symmetric.

    `w` is a vectorized callable w(x, y) or a precomputed per-cell,
    per-Gauss-point array of shape (n_cells^2, nq).
    """
    wq = _weight_values(mesh, w, rule)
    jac = (0.5 * mesh.h) ** 2
    local = jac * np.einsum("cq,q,qi,qj->cij", wq, rule.weights, rule.shape, rule.shape)
    return _interior_triplets(mesh, local)


def assemble_rotation(mesh: Mesh) -> sp.csr_matrix:
    """C_ij = int phi_i (R . grad phi_j), R = (y, -x); antisymmetric."""
    rule = RULE_BILINEAR
    gx, gy = physical_points(mesh, rule)
    jac = (0.5 * mesh.h) ** 2
    scale = 2.0 / mesh.h
    # R . grad phi_j at Gauss points, per cell: y * dphi_dx - x * dphi_dy
    rgrad = (
        gy[:, :, None] * rule.dshape[None, :, :, 0]
        - gx[:, :, None] * rule.dshape[None, :, :, 1]
    ) * scale
    local = jac * np.einsum("q,qi,cqj->cij", rule.weights, rule.shape, rgrad)
    return _interior_triplets(mesh, local)


@dataclass
class BlockOperator:
    """Linear part of the problem in 2N x 2N real block form."""

    A_block: sp.csr_matrix
    C_block: sp.csr_matrix
    omega: float

    def matrix(self) -> sp.csr_matrix:
        if self.omega == 0.0:
            zero = sp.csr_matrix(self.A_block.shape)
            return sp.bmat([[self.A_block, zero], [zero, self.A_block]], format="csr")
        oc = self.omega * self.C_block
        return sp.bmat([[self.A_block, oc], [-oc, self.A_block]], format="csr")


def block_diag2(M: sp.spmatrix) -> sp.csr_matrix:
    """diag(M, M) as a 2N x 2N CSR matrix."""
    return sp.block_diag([M, M], format="csr")


def assemble_linear_block(
    mesh: Mesh, W: Callable[[np.ndarray, np.ndarray], np.ndarray], omega: float
) -> BlockOperator:
    """A = K + M_W with the unrotated potential; off-diagonals +/- Omega*C.

    Warns if W(x) >= Omega^2 |x|^2 fails at any density-rule Gauss point
    (the trapping-versus-centrifugal condition behind the coercivity shift).
    """
    gx, gy = physical_points(mesh, RULE_DENSITY)
    wq = np.asarray(W(gx, gy), dtype=float)
    if wq.shape != gx.shape:
        wq = np.broadcast_to(wq, gx.shape).astype(float)
    if not np.all(np.isfinite(wq)):
        raise AssemblyError("potential is non-finite at a quadrature point")
    if omega != 0.0:
        viol = wq < omega ** 2 * (gx ** 2 + gy ** 2) - 1e-12
        if np.any(viol):
            warnings.warn(
                f"W(x) >= Omega^2 |x|^2 violated at {int(viol.sum())} quadrature "
                "points; the coercivity shift rule is not guaranteed",
                RuntimeWarning,
                stacklevel=2,
            )
    A = assemble_stiffness(mesh) + assemble_weighted_mass(mesh, wq)
    C = assemble_rotation(mesh) if omega != 0.0 else sp.csr_matrix(A.shape)
    return BlockOperator(A_block=A.tocsr(), C_block=C, omega=float(omega))


def brute_force_weighted_mass(mesh: Mesh, w: WeightLike, order: int = 5) -> np.ndarray:
    """Dense high-order quadrature oracle for the weighted mass (tests only)."""
    rule = quad_rule(order)
    wq = _weight_values(mesh, w, rule)
    jac = (0.5 * mesh.h) ** 2
    local = jac * np.einsum("cq,q,qi,qj->cij", wq, rule.weights, rule.shape, rule.shape)
    n = mesh.n_interior
    out = np.zeros((n, n))
    idx = mesh.interior_index[mesh.cells]
    for c in range(mesh.cells.shape[0]):
        for i in range(4):
            if idx[c, i] < 0:
                continue
            for j in range(4):
                if idx[c, j] < 0:
                    continue
                out[idx[c, i], idx[c, j]] += local[c, i, j]
    return out
