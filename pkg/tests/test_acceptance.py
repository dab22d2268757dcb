"""Acceptance suite: one test per release criterion, at the stated
tolerances. Each test prints a single PASS line on success so the suite
doubles as a checklist (`pytest -s tests/test_acceptance.py`).

Reference scales: the quantitative ground-state numbers use the desk mesh
n_cells=128 (one level coarser than the production resolution n_cells=256,
which biases the energy upward); the spectral-rate experiments run at
n_cells=32.
"""
import time
import warnings

import numpy as np
import pytest
import scipy.linalg as sla

from gpj.energy import energy, sufficient_shift
from gpj.errors import AbortedRunError
from gpj.field import combine, l4_norm4, l6_norm6, normalize
from gpj.iterate import StrategyConfig, run
from gpj.linsolve import solve_sherman_morrison
from gpj.mesh import build_mesh
from gpj.operators import ModelParams, Problem, apply_A_nl, build_J_op
from gpj.oracle import dense_sym_eig, fd_jacobian_check
from gpj.linesearch import compute_coeffs, eval_f
from gpj.potentials import bubble_initial, disorder, harmonic
from gpj.validate import rate_experiment, superlinear_experiment

from .conftest import random_field

REPORTED_ENERGY = 6.019
REPORTED_LAMBDA = 17.93


def report(name):
    print(f"\nACCEPTANCE {name}: PASS")


@pytest.fixture(scope="module")
def harmonic_desk_128():
    """Combined-strategy ground-state run on the desk-scale harmonic preset."""
    params = ModelParams(L=8.0, omega=0.0, kappa=1000.0, potential=harmonic)
    problem = Problem(build_mesh(8.0, 128), params)
    config = StrategyConfig(
        method="J", damping="optimal", shift_damped="auto",
        shift_accel="rayleigh", switch_tol=1e-3, tol=1e-8, max_iter=2000,
    )
    t0 = time.perf_counter()
    history = run(config, bubble_initial(problem.mesh), problem)
    elapsed = time.perf_counter() - t0
    return problem, history, elapsed


def test_linear_oracle_equivalence():
    t0 = time.perf_counter()
    params = ModelParams(L=8.0, omega=0.0, kappa=0.0, potential=harmonic)
    problem = Problem(build_mesh(8.0, 32), params)
    config = StrategyConfig(method="J", switch_tol=1e-3, tol=1e-8, max_iter=400)
    history = run(config, bubble_initial(problem.mesh), problem)
    assert history.converged
    lam = history.states[-1].lam
    vals, _ = dense_sym_eig(problem.linear_block.A_block, problem.M, 1)
    err = abs(lam - vals[0]) / abs(vals[0])
    elapsed = time.perf_counter() - t0
    assert err <= 1e-8
    assert elapsed <= 30.0
    report(f"linear oracle equivalence (error {err:.2e}, {elapsed:.1f}s)")


def test_harmonic_ground_state(harmonic_desk_128):
    problem, history, elapsed = harmonic_desk_128
    state = history.states[-1]
    assert history.converged and state.residual <= 1e-8
    e_err = abs(state.energy - REPORTED_ENERGY) / REPORTED_ENERGY
    l_err = abs(state.lam - REPORTED_LAMBDA) / REPORTED_LAMBDA
    assert e_err <= 0.02
    assert l_err <= 0.02
    assert elapsed <= 600.0
    report(
        f"harmonic ground state (E={state.energy:.5f}, lambda={state.lam:.5f}, "
        f"residual {state.residual:.1e}, {elapsed:.0f}s)"
    )


def test_energy_monotonicity(harmonic_desk_128):
    _, history, _ = harmonic_desk_128
    bad = 0
    total = 0
    for s0, s1 in zip(history.states, history.states[1:]):
        if s0.phase == "damped" and not np.isnan(s0.tau):
            total += 1
            if s1.energy > s0.energy + 1e-10:
                bad += 1
    assert total > 0
    assert bad == 0
    report(f"energy monotonicity ({total} damped steps, 0 increases)")


def test_step_invariants(harmonic_desk_128):
    _, history, _ = harmonic_desk_128
    damped = [
        s for s in history.states if s.phase == "damped" and not np.isnan(s.tau)
    ]
    assert damped
    worst_defect = max(s.ortho_defect for s in damped)
    worst_mass = min(s.mass_tilde for s in damped)
    assert worst_defect <= 1e-11
    assert worst_mass >= 1.0 - 1e-12
    report(
        f"step invariants (max orthogonality defect {worst_defect:.1e}, "
        f"min intermediate mass {worst_mass:.12f})"
    )


def test_sherman_morrison_correctness():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(25):
        n_cells = int(rng.integers(4, 8))  # 2N <= 2*49 = 98 <= 200
        params = ModelParams(
            L=1.0, omega=float(rng.uniform(0, 0.5)),
            kappa=float(rng.uniform(1.0, 500.0)), potential=harmonic,
        )
        problem = Problem(build_mesh(1.0, n_cells), params)
        u = random_field(problem, rng)
        sigma = sufficient_shift(u, problem) + float(rng.uniform(0.0, 3.0))
        J = build_J_op(u, sigma, problem)
        rhs = rng.standard_normal(2 * problem.n)
        x = solve_sherman_morrison(J.B, J.a, J.b, J.c, rhs, mode="spd", tol=1e-12)
        x_dense = sla.lu_solve(sla.lu_factor(J.to_dense()), rhs)
        worst = max(worst, np.linalg.norm(x - x_dense) / np.linalg.norm(x_dense))
    assert worst <= 1e-9
    report(f"Sherman-Morrison correctness (max relative error {worst:.1e})")


def test_line_search_coefficient_fidelity(small_problem):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(100):
        u = random_field(small_problem, rng)
        w = random_field(small_problem, rng)
        tau = float(rng.uniform(1e-3, 2.0))
        coeffs = compute_coeffs(u, w, small_problem)
        fast = eval_f(coeffs, tau)
        direct = energy(
            normalize(combine(1.0 - tau, u, tau, w), small_problem.M), small_problem
        )
        worst = max(worst, abs(fast - direct) / max(abs(direct), 1e-300))
    assert worst <= 1e-11
    report(f"line-search coefficient fidelity (max relative error {worst:.1e})")


def test_jacobian_block_fidelity(small_problem):
    rng = np.random.default_rng(103)
    u = random_field(small_problem, rng)
    v = random_field(small_problem, rng, normalized=False)
    rep = fd_jacobian_check(u, v, small_problem, ts=(1e-2, 1e-3, 1e-4))
    r1, r2 = rep.errors[1] / rep.errors[0], rep.errors[2] / rep.errors[1]
    assert 0.005 <= r1 <= 0.02 and 0.005 <= r2 <= 0.02
    worst_identity = 0.0
    for _ in range(10):
        u = random_field(small_problem, rng)
        J = build_J_op(u, 0.0, small_problem)
        diff = J.matvec(u.as_vector()) - apply_A_nl(u, small_problem)
        worst_identity = max(
            worst_identity,
            np.linalg.norm(diff) / np.linalg.norm(apply_A_nl(u, small_problem)),
        )
    assert worst_identity <= 1e-12
    report(
        f"Jacobian block fidelity (FD ratios {r1:.4f}/{r2:.4f}, "
        f"J(u)u identity {worst_identity:.1e})"
    )


def test_local_rate_matches_spectral_prediction():
    rep = rate_experiment(n_cells=32, kappa=10.0, target=0.5, k=8)
    assert rep.predicted < 1.0
    assert 0.4 <= rep.observed <= 0.6
    report(
        f"rate theorem (predicted {rep.predicted:.3f}, observed {rep.observed:.3f})"
    )


def test_rayleigh_shift_superlinear_signature():
    ratios = superlinear_experiment(n_cells=32, kappa=10.0)
    assert len(ratios) >= 5
    tail = ratios[-5:]
    assert np.all(np.diff(tail) < 0)
    report(
        "superlinear signature (last-5 error ratios "
        + " > ".join(f"{r:.1e}" for r in tail) + ")"
    )


def test_shifted_beats_damped_only_iteration_count():
    params = ModelParams(L=8.0, omega=0.0, kappa=1000.0, potential=harmonic)
    problem = Problem(build_mesh(8.0, 32), params)
    u0 = bubble_initial(problem.mesh)
    combined = run(
        StrategyConfig(method="J", switch_tol=1e-3, tol=1e-8, max_iter=3000),
        u0, problem,
    )
    damped_only = run(
        StrategyConfig(method="J", shift_accel="none", tol=1e-8, max_iter=3000),
        u0, problem,
    )
    assert combined.converged and damped_only.converged
    n_c, n_d = combined.iterations(), damped_only.iterations()
    assert n_d >= 2 * n_c
    report(f"shifted vs damped-only iterations ({n_c} vs {n_d}, ratio {n_d / n_c:.2f})")


def test_positivity_preservation():
    pot = disorder(8.0, 2 ** -6, seed=20210607)
    params = ModelParams(L=8.0, omega=0.0, kappa=1.0, potential=pot)
    problem = Problem(build_mesh(8.0, 64), params)
    u0 = bubble_initial(problem.mesh)
    sigma = max(
        sufficient_shift(u0, problem),
        2.0 * params.kappa * np.sqrt(l6_norm6(u0)) * 2.0,
    )
    config = StrategyConfig(
        method="J", damping=1.0, shift_damped=sigma, shift_accel="none",
        tol=1e-8, max_iter=250, inner_tol=1e-12,
    )
    history = run(config, u0, problem, keep_fields=True)
    worst = min(s.u.re.min() for s in history.states)
    assert worst >= -1e-12
    report(
        f"positivity preservation ({len(history.states)} iterates, "
        f"min nodal value {worst:.2e})"
    )


def test_coercivity_of_shifted_jacobian(small_problem):
    rng = np.random.default_rng(104)
    checked = 0
    margin = np.inf
    for _ in range(5):
        u = random_field(small_problem, rng)
        sigma = sufficient_shift(u, small_problem)
        assert sigma >= small_problem.params.kappa / 3.0 * l4_norm4(u) - 1e-12
        J = build_J_op(u, sigma, small_problem)
        for _ in range(10):
            v = rng.standard_normal(2 * small_problem.n)
            quad = float(v @ J.matvec(v))
            grad = float(v @ (small_problem.K2 @ v))
            margin = min(margin, quad - 0.5 * grad)
            assert quad >= 0.5 * grad - 1e-10
            checked += 1
    assert checked == 50
    report(f"coercivity with shift 4/3 E (50 directions, min margin {margin:.3e})")


@pytest.mark.slow
def test_vortex_qualitative():
    warnings.filterwarnings("ignore", category=RuntimeWarning)
    params = ModelParams(L=10.0, omega=0.85, kappa=1000.0, potential=harmonic)
    problem = Problem(build_mesh(10.0, 64), params)
    u0 = bubble_initial(problem.mesh)
    states = {}
    for label, switch in (("u1", 1e-6), ("u2", 1e-3)):
        config = StrategyConfig(
            method="J", switch_tol=switch, tol=1e-8, max_iter=4000,
        )
        try:
            history = run(config, u0, problem)
        except AbortedRunError as exc:
            history = exc.history
        if history.converged:
            states[label] = history.states[-1]
    assert "u1" in states and states["u1"].residual <= 1e-8
    msg = f"vortex qualitative (u1: lambda={states['u1'].lam:.4f}, E={states['u1'].energy:.4f}"
    if "u2" in states:
        s1, s2 = states["u1"], states["u2"]
        distinct = abs(s1.energy - s2.energy) > 1e-6
        if distinct:
            # informative comparison with the reported pattern (not gating:
            # the reference rotation speed is ambiguous)
            pattern = s1.energy < s2.energy and s1.lam > s2.lam
            ref = (
                abs(s1.lam - 15.6094) / 15.6094, abs(s1.energy - 5.3616) / 5.3616,
                abs(s2.lam - 15.5470) / 15.5470, abs(s2.energy - 5.3871) / 5.3871,
            )
            msg += (
                f"; u2: lambda={s2.lam:.4f}, E={s2.energy:.4f}; "
                f"ordering E1<E2 with lam1>lam2: {pattern}; "
                f"deviations from reported values: "
                + ", ".join(f"{r:.1%}" for r in ref)
            )
        else:
            msg += "; u2 coincides with u1 at this resolution"
    msg += ")"
    report(msg)
