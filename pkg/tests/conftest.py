import numpy as np
import pytest

from gpj.iterate import StrategyConfig, run
from gpj.mesh import build_mesh
from gpj.operators import ModelParams, Problem
from gpj.potentials import bubble_initial, harmonic


@pytest.fixture(scope="session")
def small_problem():
    """Rotating, repulsive model on a coarse mesh; W >= Omega^2 |x|^2 holds."""
    params = ModelParams(L=1.0, omega=0.5, kappa=50.0, potential=harmonic)
    return Problem(build_mesh(1.0, 8), params)


@pytest.fixture(scope="session")
def plain_problem():
    """No rotation, moderate repulsion, harmonic trap on (-8, 8)^2."""
    params = ModelParams(L=8.0, omega=0.0, kappa=10.0, potential=harmonic)
    return Problem(build_mesh(8.0, 16), params)


@pytest.fixture(scope="session")
def converged_small(plain_problem):
    """A deeply converged ground state for fixed-point style tests."""
    config = StrategyConfig(
        method="J", tol=1e-11, switch_tol=1e-3, max_iter=300, inner_tol=1e-13
    )
    history = run(config, bubble_initial(plain_problem.mesh), plain_problem)
    assert history.converged
    return plain_problem, history.final, history


def random_field(problem, rng, normalized=True, complex_part=True):
    from gpj.field import ComplexField, normalize

    n = problem.n
    re = rng.standard_normal(n)
    im = rng.standard_normal(n) if complex_part else np.zeros(n)
    u = ComplexField(problem.mesh, re, im)
    return normalize(u, problem.M) if normalized else u
