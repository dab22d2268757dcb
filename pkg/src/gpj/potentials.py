"""Built-in trapping potentials, the disorder generator, initial guess.

The disorder potential is an i.i.d. checkerboard of squares with side
2*eps*L taking the values 0 and (2 eps L)^-2 with probability 1/2 each.
Randomness comes from a splitmix64 stream (fixed published constants)
mapped to a Bernoulli via the top bit, cells visited row-major, so dumps
are bit-reproducible across platforms and implementations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import assemble_mass
from .errors import AssemblyError, ConfigError, DimensionMismatchError
from .field import ComplexField, normalize
from .mesh import Mesh

_SM64_MASK = (1 << 64) - 1
_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MIX1 = 0xBF58476D1CE4E5B9
_SM64_MIX2 = 0x94D049BB133111EB


def splitmix64_stream(seed: int, count: int) -> list[int]:
    """First `count` outputs of the splitmix64 generator."""
    state = seed & _SM64_MASK
    out = []
    for _ in range(count):
        state = (state + _SM64_GAMMA) & _SM64_MASK
        z = state
        z = ((z ^ (z >> 30)) * _SM64_MIX1) & _SM64_MASK
        z = ((z ^ (z >> 27)) * _SM64_MIX2) & _SM64_MASK
        z = z ^ (z >> 31)
        out.append(z)
    return out


def harmonic(x, y):
    """Harmonic trap with trapping frequencies 1/2: W = (x^2 + y^2)/2."""
    return 0.5 * (np.asarray(x) ** 2 + np.asarray(y) ** 2)


@dataclass(frozen=True)
class DisorderPotential:
    L: float
    epsilon: float
    seed: int
    values: np.ndarray  # (n_cb, n_cb), row-major (y outer, x inner)

    @property
    def n_cb(self) -> int:
        return self.values.shape[0]

    def __call__(self, x, y):
        side = 2.0 * self.epsilon * self.L
        ix = np.clip(((np.asarray(x) + self.L) // side).astype(int), 0, self.n_cb - 1)
        iy = np.clip(((np.asarray(y) + self.L) // side).astype(int), 0, self.n_cb - 1)
        return self.values[iy, ix]

    def validate(self, mesh: Mesh) -> None:
        if mesh.L != self.L:
            raise ConfigError(
                f"potential domain L={self.L} does not match mesh L={mesh.L}"
            )
        per_cb = self.epsilon * mesh.n_cells
        if abs(per_cb - round(per_cb)) > 1e-12 or round(per_cb) < 1:
            raise ConfigError(
                f"mesh with n_cells={mesh.n_cells} is not aligned with the "
                f"epsilon={self.epsilon} checkerboard (cells per square = {per_cb})"
            )


def disorder(L: float, epsilon: float, seed: int) -> DisorderPotential:
    """Random checkerboard potential with values 0 and (2 eps L)^-2."""
    inv_eps = 1.0 / epsilon
    if abs(inv_eps - round(inv_eps)) > 1e-12:
        raise ConfigError(f"1/epsilon must be an integer, got epsilon={epsilon}")
    n_cb = int(round(inv_eps))
    black = (2.0 * epsilon * L) ** -2
    bits = splitmix64_stream(seed, n_cb * n_cb)
    vals = np.array([black if (z >> 63) & 1 else 0.0 for z in bits])
    return DisorderPotential(L=L, epsilon=epsilon, seed=seed, values=vals.reshape(n_cb, n_cb))


def bubble_initial(mesh: Mesh) -> ComplexField:
    """L2-normalized interpolant of (1 - x^2/L^2)(1 - y^2/L^2), zero phase."""
    xy = mesh.coords[mesh.interior_nodes]
    vals = (1.0 - (xy[:, 0] / mesh.L) ** 2) * (1.0 - (xy[:, 1] / mesh.L) ** 2)
    u = ComplexField(mesh, vals, np.zeros_like(vals))
    return normalize(u, assemble_mass(mesh))


@dataclass(frozen=True)
class GridPotential:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # (ny, nx)

    def __call__(self, x, y):
        x = np.clip(np.asarray(x, dtype=float), self.xs[0], self.xs[-1])
        y = np.clip(np.asarray(y, dtype=float), self.ys[0], self.ys[-1])
        ix = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.xs.size - 2)
        iy = np.clip(np.searchsorted(self.ys, y, side="right") - 1, 0, self.ys.size - 2)
        tx = (x - self.xs[ix]) / (self.xs[ix + 1] - self.xs[ix])
        ty = (y - self.ys[iy]) / (self.ys[iy + 1] - self.ys[iy])
        v00 = self.values[iy, ix]
        v10 = self.values[iy, ix + 1]
        v01 = self.values[iy + 1, ix]
        v11 = self.values[iy + 1, ix + 1]
        return (
            (1 - tx) * (1 - ty) * v00
            + tx * (1 - ty) * v10
            + (1 - tx) * ty * v01
            + tx * ty * v11
        )


def potential_from_file(path) -> GridPotential:
    """Load a nodal `x,y,w` CSV (row-major grid) as a bilinear potential."""
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[1] != 3:
        raise DimensionMismatchError(f"potential file {path} is not an x,y,w table")
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if xs.size < 2 or ys.size < 2 or data.shape[0] != xs.size * ys.size:
        raise DimensionMismatchError(
            f"potential file {path} has {data.shape[0]} rows, expected a full "
            f"{ys.size} x {xs.size} grid"
        )
    w = data[:, 2].reshape(ys.size, xs.size)
    if not np.all(np.isfinite(w)):
        raise AssemblyError(f"potential file {path} contains non-finite values")
    return GridPotential(xs=xs, ys=ys, values=w)


def write_potential_csv(potential, mesh: Mesh, path) -> None:
    """Sample a potential at the mesh nodes and dump `x,y,w` row-major."""
    w = np.asarray(potential(mesh.coords[:, 0], mesh.coords[:, 1]), dtype=float)
    with open(path, "w") as fh:
        fh.write("x,y,w\n")
        for i in range(mesh.n_nodes):
            fh.write(f"{mesh.coords[i, 0]:.15e},{mesh.coords[i, 1]:.15e},{w[i]:.15e}\n")
