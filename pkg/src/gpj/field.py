"""Complex nodal fields as split real/imaginary coefficient vectors.

A field stores interior-node coefficients only; boundary values are
identically zero (homogeneous Dirichlet). All inner products are the real
L2 pairings Re(u, v): re(u)^T M re(v) + im(u)^T M im(v). Nonlinear
integrals evaluate the interpolated field at Gauss points, which is exact
under the 3x3 rule for the quartic densities appearing here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError, ZeroFieldError
from .mesh import Mesh
from .quadrature import RULE_DENSITY, integrate_cellwise, values_at_quad


@dataclass
class ComplexField:
    mesh: Mesh
    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        self.re = np.asarray(self.re, dtype=float)
        self.im = np.asarray(self.im, dtype=float)
        n = self.mesh.n_interior
        if self.re.shape != (n,) or self.im.shape != (n,):
            raise DimensionMismatchError(
                f"coefficient length {self.re.shape}/{self.im.shape} does not match "
                f"{n} interior nodes"
            )

    def copy(self) -> "ComplexField":
        return ComplexField(self.mesh, self.re.copy(), self.im.copy())

    def as_vector(self) -> np.ndarray:
        """Stacked real vector [re; im] of length 2*n_interior."""
        return np.concatenate([self.re, self.im])

    @classmethod
    def from_vector(cls, mesh: Mesh, vec: np.ndarray) -> "ComplexField":
        n = mesh.n_interior
        if vec.shape != (2 * n,):
            raise DimensionMismatchError(f"vector length {vec.shape} != {2 * n}")
        return cls(mesh, vec[:n].copy(), vec[n:].copy())

    @classmethod
    def zero(cls, mesh: Mesh) -> "ComplexField":
        n = mesh.n_interior
        return cls(mesh, np.zeros(n), np.zeros(n))

    def full_re(self) -> np.ndarray:
        out = np.zeros(self.mesh.n_nodes)
        out[self.mesh.interior_nodes] = self.re
        return out

    def full_im(self) -> np.ndarray:
        out = np.zeros(self.mesh.n_nodes)
        out[self.mesh.interior_nodes] = self.im
        return out


def _check_same_mesh(u: ComplexField, v: ComplexField) -> None:
    if u.mesh is not v.mesh and not u.mesh.same_grid(v.mesh):
        raise DimensionMismatchError("fields live on different meshes")


def h_inner(u: ComplexField, v: ComplexField, M: sp.spmatrix) -> float:
    """Real L2 inner product Re (u, v) via the interior mass matrix."""
    _check_same_mesh(u, v)
    if M.shape[0] != u.mesh.n_interior:
        raise DimensionMismatchError(
            f"mass matrix size {M.shape} does not match {u.mesh.n_interior} interior nodes"
        )
    return float(u.re @ (M @ v.re) + u.im @ (M @ v.im))


def l2_norm(u: ComplexField, M: sp.spmatrix) -> float:
    return float(np.sqrt(max(h_inner(u, u, M), 0.0)))


def l4_norm4(u: ComplexField) -> float:
    """Integral of |u_h|^4 for the bilinear interpolant (3x3 Gauss, exact)."""
    dens = density_at_quad(u)
    return integrate_cellwise(u.mesh, dens * dens, RULE_DENSITY)


def l6_norm6(u: ComplexField) -> float:
    """Integral of |u_h|^6, evaluated by 3x3 Gauss."""
    dens = density_at_quad(u)
    return integrate_cellwise(u.mesh, dens ** 3, RULE_DENSITY)


def density_at_quad(u: ComplexField) -> np.ndarray:
    """|u_h|^2 at the 3x3 Gauss points, shape (n_cells^2, 9)."""
    re_q = values_at_quad(u.mesh, u.full_re(), RULE_DENSITY)
    im_q = values_at_quad(u.mesh, u.full_im(), RULE_DENSITY)
    return re_q * re_q + im_q * im_q


def normalize(u: ComplexField, M: sp.spmatrix) -> ComplexField:
    nrm = l2_norm(u, M)
    if nrm <= 0.0:
        raise ZeroFieldError("cannot normalize a zero field")
    return ComplexField(u.mesh, u.re / nrm, u.im / nrm)


def combine(a: float, u: ComplexField, b: float, v: ComplexField) -> ComplexField:
    """Pointwise linear combination a*u + b*v."""
    _check_same_mesh(u, v)
    return ComplexField(u.mesh, a * u.re + b * v.re, a * u.im + b * v.im)


def phase_rotate(u: ComplexField, theta: float) -> ComplexField:
    """Global phase rotation u -> e^{i theta} u."""
    c, s = np.cos(theta), np.sin(theta)
    return ComplexField(u.mesh, c * u.re - s * u.im, s * u.re + c * u.im)


def write_field_csv(u: ComplexField, path) -> None:
    """Dump `x,y,re,im,density` over all nodes (boundary zeros), row-major."""
    coords = u.mesh.coords
    re_full, im_full = u.full_re(), u.full_im()
    dens = re_full * re_full + im_full * im_full
    with open(path, "w") as fh:
        fh.write("x,y,re,im,density\n")
        for i in range(u.mesh.n_nodes):
            fh.write(
                f"{coords[i, 0]:.15e},{coords[i, 1]:.15e},"
                f"{re_full[i]:.15e},{im_full[i]:.15e},{dens[i]:.15e}\n"
            )


def read_field_csv(mesh: Mesh, path) -> ComplexField:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[0] != mesh.n_nodes or data.shape[1] < 4:
        raise DimensionMismatchError(
            f"field file {path} does not match mesh with {mesh.n_nodes} nodes"
        )
    return ComplexField(
        mesh,
        data[mesh.interior_nodes, 2].copy(),
        data[mesh.interior_nodes, 3].copy(),
    )
