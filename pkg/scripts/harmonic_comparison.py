#!/usr/bin/env python3
"""Ground state in the harmonic trap: method comparison.

Runs the combined (damped -> Rayleigh-shifted) Jacobian iteration, its
damped-only variant, and the gradient-flow baseline on the same problem,
writes the run histories under out/harmonic_comparison/, and reports
iteration counts. Render the overlay with:

    gpj-plot conv out/harmonic_comparison/*.csv -o harmonic_conv.png
"""
import argparse
from pathlib import Path

from gpj.errors import AbortedRunError
from gpj.iterate import StrategyConfig, run
from gpj.mesh import build_mesh
from gpj.operators import ModelParams, Problem
from gpj.potentials import bubble_initial, harmonic

VARIANTS = {
    "J_damped_shifted": StrategyConfig(method="J", switch_tol=1e-3, tol=1e-8, max_iter=3000),
    "J_damped_only": StrategyConfig(method="J", shift_accel="none", tol=1e-8, max_iter=3000),
    "J_fixed_tau": StrategyConfig(method="J", damping=0.5, shift_accel="none", tol=1e-8, max_iter=3000),
    "A_damped_only": StrategyConfig(method="A", shift_accel="none", tol=1e-8, max_iter=3000),
    "A_damped_shifted": StrategyConfig(method="A", switch_tol=1e-3, tol=1e-8, max_iter=3000),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-cells", type=int, default=64)
    parser.add_argument("--kappa", type=float, default=1000.0)
    parser.add_argument("--out", default="out/harmonic_comparison")
    args = parser.parse_args()

    params = ModelParams(L=8.0, omega=0.0, kappa=args.kappa, potential=harmonic)
    problem = Problem(build_mesh(8.0, args.n_cells), params)
    u0 = bubble_initial(problem.mesh)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, config in VARIANTS.items():
        try:
            history = run(config, u0, problem)
            status = "converged" if history.converged else "max_iter"
        except AbortedRunError as exc:
            history, status = exc.history, "aborted"
        history.to_csv(out / f"{name}.csv")
        last = history.states[-1]
        print(
            f"{name:18s} {status:9s} iters={history.iterations():4d} "
            f"lambda={last.lam:.8f} E={last.energy:.8f} residual={last.residual:.2e}"
        )


if __name__ == "__main__":
    main()
