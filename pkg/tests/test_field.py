import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpj.assembly import assemble_mass
from gpj.errors import DimensionMismatchError, ZeroFieldError
from gpj.field import (
    ComplexField,
    combine,
    h_inner,
    l2_norm,
    l4_norm4,
    normalize,
    phase_rotate,
    read_field_csv,
    write_field_csv,
)
from gpj.mesh import build_mesh

from .conftest import random_field
from .oracles import integrate_interpolant


@pytest.fixture(scope="module")
def grid():
    mesh = build_mesh(1.0, 8)
    return mesh, assemble_mass(mesh)


def test_h_inner_positive_definite(grid):
    mesh, M = grid
    rng = np.random.default_rng(3)
    u = ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    assert h_inner(u, u, M) > 0
    z = ComplexField.zero(mesh)
    assert h_inner(z, z, M) == 0.0


def test_h_inner_real_imaginary_blocks(grid):
    mesh, M = grid
    rng = np.random.default_rng(4)
    u = ComplexField(mesh, rng.standard_normal(mesh.n_interior), np.zeros(mesh.n_interior))
    v = ComplexField(mesh, np.zeros(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    assert h_inner(u, v, M) == 0.0


def test_h_inner_matches_independent_quadrature(grid):
    mesh, M = grid
    xy = mesh.coords[mesh.interior_nodes]
    vals = np.sin(np.pi * (xy[:, 0] + 1) / 2) * np.sin(np.pi * (xy[:, 1] + 1) / 2)
    u = ComplexField(mesh, vals, np.zeros_like(vals))
    direct = integrate_interpolant(
        mesh, [u.full_re()], lambda x, y, v: v * v, order=3
    )
    assert h_inner(u, u, M) == pytest.approx(direct, rel=1e-12)


def test_mesh_mismatch_rejected():
    m1, m2 = build_mesh(1.0, 4), build_mesh(1.0, 6)
    u = ComplexField.zero(m1)
    v = ComplexField.zero(m2)
    with pytest.raises(DimensionMismatchError):
        h_inner(u, v, assemble_mass(m1))


def test_l4_zero_field(grid):
    mesh, _ = grid
    assert l4_norm4(ComplexField.zero(mesh)) == 0.0


def test_l4_single_hat_function():
    mesh = build_mesh(1.0, 2)
    c = 1.7
    u = ComplexField(mesh, np.array([c]), np.array([0.0]))
    # int over 4 unit cells of (xy)^4-type products: 4 * (1/5)^2
    assert l4_norm4(u) == pytest.approx(c ** 4 * 4.0 / 25.0, rel=1e-13)


def test_l4_hoelder_bound(grid):
    mesh, M = grid
    rng = np.random.default_rng(5)
    u = normalize(
        ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior)),
        M,
    )
    dens_max = np.max(u.full_re() ** 2 + u.full_im() ** 2)
    assert l4_norm4(u) <= dens_max * h_inner(u, u, M) * (1 + 1e-12)


def test_normalize_and_scaling(grid):
    mesh, M = grid
    rng = np.random.default_rng(6)
    u = ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    nu = normalize(u, M)
    assert l2_norm(nu, M) == pytest.approx(1.0, abs=1e-14)
    two_u = combine(2.0, u, 0.0, u)
    assert l2_norm(two_u, M) == pytest.approx(2 * l2_norm(u, M), rel=1e-14)
    n2 = normalize(two_u, M)
    np.testing.assert_allclose(n2.re, nu.re, atol=1e-14)
    with pytest.raises(ZeroFieldError):
        normalize(ComplexField.zero(mesh), M)


def test_combine_trivials(grid):
    mesh, M = grid
    rng = np.random.default_rng(7)
    u = ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    v = ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    w = combine(1.0, u, 0.0, v)
    np.testing.assert_array_equal(w.re, u.re)
    # tau = 1 degenerates the damped blend to the scaled direction
    gamma = 0.37
    blend = combine(1.0 - 1.0, u, 1.0 * gamma, v)
    np.testing.assert_allclose(blend.re, gamma * v.re, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_h_inner_symmetry(grid, seed):
    mesh, M = grid
    rng = np.random.default_rng(seed)
    u = ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    v = ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    a, b = h_inner(u, v, M), h_inner(v, u, M)
    assert a == pytest.approx(b, abs=1e-14 * max(1.0, abs(a)))


@pytest.mark.parametrize("theta", [np.pi / 7, np.pi / 3])
def test_l4_phase_invariance(grid, theta):
    mesh, M = grid
    rng = np.random.default_rng(8)
    u = ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    base = l4_norm4(u)
    rotated = l4_norm4(phase_rotate(u, theta))
    assert abs(rotated - base) / base <= 1e-12


def test_field_csv_roundtrip(grid, tmp_path):
    mesh, M = grid
    rng = np.random.default_rng(9)
    u = ComplexField(mesh, rng.standard_normal(mesh.n_interior), rng.standard_normal(mesh.n_interior))
    path = tmp_path / "field.csv"
    write_field_csv(u, path)
    head = path.read_text().splitlines()[0]
    assert head == "x,y,re,im,density"
    v = read_field_csv(mesh, path)
    np.testing.assert_allclose(v.re, u.re, rtol=1e-15)
    np.testing.assert_allclose(v.im, u.im, rtol=1e-15)
