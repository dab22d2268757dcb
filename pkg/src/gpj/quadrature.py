"""Tensor-product Gauss rules and Q1 shape tables on the reference cell.

Quadrature orders are fixed by exactness requirements: 2x2 integrates the
bilinear forms (stiffness, mass, rotation coupling) exactly, 3x3 is exact
for quartic densities |u_h|^4 and the weighted masses they induce, and 5x5
is reserved for brute-force oracle integration in tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh


def gauss_1d(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class QuadRule:
    points: np.ndarray   # (nq, 2) on [-1,1]^2
    weights: np.ndarray  # (nq,)
    shape: np.ndarray    # (nq, 4) Q1 shape values, nodes CCW from lower-left
    dshape: np.ndarray   # (nq, 4, 2) reference-cell gradients

    @property
    def nq(self) -> int:
        return self.weights.size


def _q1_shape(points: np.ndarray) -> np.ndarray:
    xi, eta = points[:, 0], points[:, 1]
    return 0.25 * np.column_stack(
        [(1 - xi) * (1 - eta), (1 + xi) * (1 - eta), (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)]
    )


def _q1_dshape(points: np.ndarray) -> np.ndarray:
    xi, eta = points[:, 0], points[:, 1]
    d = np.empty((points.shape[0], 4, 2))
    d[:, 0, 0] = -0.25 * (1 - eta)
    d[:, 1, 0] = 0.25 * (1 - eta)
    d[:, 2, 0] = 0.25 * (1 + eta)
    d[:, 3, 0] = -0.25 * (1 + eta)
    d[:, 0, 1] = -0.25 * (1 - xi)
    d[:, 1, 1] = -0.25 * (1 + xi)
    d[:, 2, 1] = 0.25 * (1 + xi)
    d[:, 3, 1] = 0.25 * (1 - xi)
    return d


def quad_rule(order: int) -> QuadRule:
    """Tensor-product Gauss rule with `order` points per direction."""
    x, w = gauss_1d(order)
    XI, ETA = np.meshgrid(x, x, indexing="xy")
    points = np.column_stack([XI.ravel(), ETA.ravel()])
    weights = np.outer(w, w).ravel()
    return QuadRule(points=points, weights=weights, shape=_q1_shape(points), dshape=_q1_dshape(points))


RULE_BILINEAR = quad_rule(2)
RULE_DENSITY = quad_rule(3)
RULE_ORACLE = quad_rule(5)


def physical_points(mesh: Mesh, rule: QuadRule) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-point coordinates per cell: two (n_cells^2, nq) arrays (x, y)."""
    centers = mesh.cell_centers()
    half = 0.5 * mesh.h
    gx = centers[:, 0][:, None] + half * rule.points[:, 0][None, :]
    gy = centers[:, 1][:, None] + half * rule.points[:, 1][None, :]
    return gx, gy


def cell_node_values(mesh: Mesh, full_nodal: np.ndarray) -> np.ndarray:
    """Gather nodal values cell-wise: (n_cells^2, 4)."""
    return full_nodal[mesh.cells]


def values_at_quad(mesh: Mesh, full_nodal: np.ndarray, rule: QuadRule) -> np.ndarray:
    """Bilinear interpolant evaluated at all Gauss points: (n_cells^2, nq)."""
    return cell_node_values(mesh, full_nodal) @ rule.shape.T


def integrate_cellwise(mesh: Mesh, values: np.ndarray, rule: QuadRule) -> float:
    """Integrate per-Gauss-point values (n_cells^2, nq) over the domain."""
    jac = (0.5 * mesh.h) ** 2
    return float(np.einsum("cq,q->", values, rule.weights) * jac)
