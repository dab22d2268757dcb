#!/usr/bin/env python3
"""Vortex states in a fast rotating trap.

Reproduces the excited-state selection workflow: different switch
tolerances and clamped shift windows steer the iteration toward different
critical points. Writes history and field CSVs per state under
out/vortex/<name>/; render densities with `gpj-plot density`.
"""
import argparse
import warnings
from pathlib import Path

from gpj.errors import AbortedRunError
from gpj.field import write_field_csv
from gpj.iterate import StrategyConfig, run
from gpj.mesh import build_mesh
from gpj.operators import ModelParams, Problem
from gpj.potentials import bubble_initial, harmonic

STATES = {
    "u1": dict(switch_tol=1e-6, shift_accel="rayleigh", clamp=None, shift_damped="auto"),
    "u2": dict(switch_tol=1e-3, shift_accel="rayleigh", clamp=None, shift_damped="auto"),
    "u3": dict(switch_tol=1e-4, shift_accel="rayleigh_clamped", clamp=(15.0, 15.6), shift_damped=15.0),
    "u4": dict(switch_tol=1e-3, shift_accel="rayleigh_clamped", clamp=(15.2, 15.45), shift_damped=15.2),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-cells", type=int, default=128)
    parser.add_argument("--omega", type=float, default=0.85, help="0.85 or 0.99")
    parser.add_argument("--out", default="out/vortex")
    parser.add_argument("--max-iter", type=int, default=8000)
    args = parser.parse_args()

    warnings.filterwarnings("ignore", category=RuntimeWarning)
    params = ModelParams(L=10.0, omega=args.omega, kappa=1000.0, potential=harmonic)
    problem = Problem(build_mesh(10.0, args.n_cells), params)
    u0 = bubble_initial(problem.mesh)

    for name, strat in STATES.items():
        config = StrategyConfig(method="J", tol=1e-8, max_iter=args.max_iter, **strat)
        out = Path(args.out) / name
        out.mkdir(parents=True, exist_ok=True)
        try:
            history = run(config, u0, problem)
            status = "converged" if history.converged else "max_iter"
        except AbortedRunError as exc:
            history, status = exc.history, "aborted"
        history.to_csv(out / "history.csv")
        write_field_csv(history.final, out / "field.csv")
        last = history.states[-1]
        print(
            f"{name}: {status:9s} iters={history.iterations():5d} "
            f"lambda={last.lam:.6f} E={last.energy:.6f} residual={last.residual:.2e}"
        )


if __name__ == "__main__":
    main()
