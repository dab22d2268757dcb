"""Uniform Cartesian Q1 mesh of the square (-L, L)^2.

Node numbering is row-major (y outer, x inner) so that field dumps are
bit-reproducible. Homogeneous Dirichlet conditions are imposed by
eliminating boundary rows/columns: assembly and all solver vectors live on
the interior nodes only.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMeshError


@dataclass(frozen=True)
class Mesh:
    L: float
    n_cells: int
    h: float
    coords: np.ndarray          # (n_nodes, 2) node coordinates
    cells: np.ndarray           # (n_cells**2, 4) node ids, CCW from lower-left
    boundary_mask: np.ndarray   # (n_nodes,) True on the square's edge
    interior_index: np.ndarray  # (n_nodes,) dense interior numbering, -1 on boundary
    interior_nodes: np.ndarray = field(repr=False, default=None)  # (n_interior,) node ids

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_interior(self) -> int:
        return self.interior_nodes.shape[0]

    def cell_centers(self) -> np.ndarray:
        return self.coords[self.cells].mean(axis=1)

    def same_grid(self, other: "Mesh") -> bool:
        return self.n_cells == other.n_cells and self.L == other.L


def build_mesh(L: float, n_cells: int) -> Mesh:
    """Build the uniform Q1 mesh with n_cells cells per dimension.

    Node coordinates are x_i = -L + i*h per dimension with h = 2L/n_cells.
    Requires n_cells >= 2 (otherwise no interior node exists).
    """
    if L <= 0:
        raise InvalidMeshError(f"domain half-width must be positive, got L={L}")
    if n_cells < 2:
        raise InvalidMeshError(
            f"n_cells={n_cells} leaves no interior node (need n_cells >= 2)"
        )
    n = int(n_cells)
    h = 2.0 * L / n
    ticks = -L + h * np.arange(n + 1)
    X, Y = np.meshgrid(ticks, ticks, indexing="xy")  # row-major: y outer, x inner
    coords = np.column_stack([X.ravel(), Y.ravel()])

    ix, iy = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ll = iy.ravel() * (n + 1) + ix.ravel()
    cells = np.column_stack([ll, ll + 1, ll + n + 2, ll + n + 1]).astype(np.int64)

    on_edge = np.zeros((n + 1, n + 1), dtype=bool)
    on_edge[0, :] = on_edge[-1, :] = True
    on_edge[:, 0] = on_edge[:, -1] = True
    boundary_mask = on_edge.ravel()

    interior_index = np.full(coords.shape[0], -1, dtype=np.int64)
    interior_nodes = np.flatnonzero(~boundary_mask)
    interior_index[interior_nodes] = np.arange(interior_nodes.size)

    return Mesh(
        L=float(L),
        n_cells=n,
        h=h,
        coords=coords,
        cells=cells,
        boundary_mask=boundary_mask,
        interior_index=interior_index,
        interior_nodes=interior_nodes,
    )
