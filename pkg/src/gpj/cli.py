"""Batch front door: config parsing, presets, run orchestration, output.

Exit codes: 0 on convergence (or an all-pass validation), 2 when the
iteration hits max_iter, 1 on any error. `GPJ_OUTPUT_DIR` overrides the
configured output directory.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import potentials
from .errors import ConfigError, GpjError, SizeCapError
from .field import write_field_csv
from .iterate import RunHistory, StrategyConfig, run
from .mesh import build_mesh
from .operators import ModelParams, Problem, build_A_op
from .oracle import dense_sym_eig
from .presets import PRESETS, preset_config


def _require(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigError(f"missing key {path}.{key}" if path else f"missing key {key}")
    return cfg[key]


def _number(cfg: dict, key: str, path: str, cast=float):
    val = _require(cfg, key, path)
    try:
        return cast(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key {path}.{key} must be a number, got {val!r}") from exc


def build_potential(pcfg: dict, L: float):
    kind = _require(pcfg, "kind", "model.potential")
    if kind == "harmonic":
        return potentials.harmonic
    if kind == "zero":
        return lambda x, y: np.zeros_like(np.asarray(x, dtype=float))
    if kind == "disorder":
        eps = _number(pcfg, "epsilon", "model.potential")
        seed = _number(pcfg, "seed", "model.potential", cast=int)
        return potentials.disorder(L, eps, seed)
    if kind == "file":
        path = _require(pcfg, "path", "model.potential")
        return potentials.potential_from_file(path)
    raise ConfigError(
        f"model.potential.kind must be one of harmonic|zero|disorder|file, got {kind!r}"
    )


def parse_config(cfg: dict):
    """Validate a run configuration; returns (problem, strategy, output cfg)."""
    domain = _require(cfg, "domain", "")
    L = _number(domain, "L", "domain")
    n_cells = _number(domain, "n_cells", "domain", cast=int)
    model = _require(cfg, "model", "")
    omega = _number(model, "omega", "model")
    kappa = _number(model, "kappa", "model")
    pot = build_potential(_require(model, "potential", "model"), L)
    method = _require(cfg, "method", "")
    strat = _require(cfg, "strategy", "")

    known = {"damping", "shift_damped", "shift_accel", "clamp",
             "switch_tol", "tol", "max_iter", "inner_tol"}
    unknown = set(strat) - known
    if unknown:
        raise ConfigError(f"unknown key strategy.{sorted(unknown)[0]}")
    kwargs = dict(strat)
    if "clamp" in kwargs and kwargs["clamp"] is not None:
        kwargs["clamp"] = tuple(kwargs["clamp"])
    try:
        strategy = StrategyConfig(method=method, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid strategy block: {exc}") from exc

    output = cfg.get("output", {})
    out_dir = os.environ.get("GPJ_OUTPUT_DIR", output.get("dir", "out"))
    dump_fields = bool(output.get("dump_fields", True))

    mesh = build_mesh(L, n_cells)
    params = ModelParams(L=L, omega=omega, kappa=kappa, potential=pot)
    problem = Problem(mesh, params)
    return problem, strategy, {"dir": out_dir, "dump_fields": dump_fields}


def _load_config(args) -> dict:
    if args.preset:
        return preset_config(args.preset)
    if not args.config:
        raise ConfigError("either a config path or --preset is required")
    with open(args.config) as fh:
        return json.load(fh)


def write_outputs(history: RunHistory, problem, out_cfg: dict) -> dict:
    out_dir = Path(out_cfg["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    history.to_csv(out_dir / "history.csv")
    if out_cfg["dump_fields"]:
        write_field_csv(history.final, out_dir / "field.csv")
    last = history.states[-1]
    summary = {
        "lambda": last.lam,
        "energy": last.energy,
        "residual": last.residual,
        "iterations": history.iterations(),
        "wall_time": history.wall_time,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def cmd_run(args) -> int:
    cfg = _load_config(args)
    problem, strategy, out_cfg = parse_config(cfg)
    u0 = potentials.bubble_initial(problem.mesh)
    history = run(strategy, u0, problem)
    summary = write_outputs(history, problem, out_cfg)
    status = "converged" if history.converged else "max_iter reached"
    print(
        f"{status}: lambda={summary['lambda']:.10g} energy={summary['energy']:.10g} "
        f"residual={summary['residual']:.3e} iterations={summary['iterations']} "
        f"wall_time={summary['wall_time']:.1f}s -> {out_cfg['dir']}"
    )
    return 0 if history.converged else 2


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    problem, strategy, out_cfg = parse_config(cfg)
    if 2 * problem.n > 5000:
        raise SizeCapError(
            f"spectrum command needs a small mesh (2N <= 5000, got {2 * problem.n})"
        )
    u0 = potentials.bubble_initial(problem.mesh)
    history = run(strategy, u0, problem)
    if not history.converged:
        print("run did not converge; spectrum not computed", file=sys.stderr)
        return 2
    A = build_A_op(history.final, 0.0, problem)
    vals, _ = dense_sym_eig(A, problem.M2, args.k)
    payload = {
        "k": args.k,
        "lambda": history.states[-1].lam,
        "eigenvalues": list(map(float, vals)),
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_validate(args) -> int:
    from .validate import run_validation_suite

    rows = run_validation_suite()
    width = max(len(name) for name, _, _ in rows)
    ok = True
    for name, passed, detail in rows:
        ok &= passed
        print(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}  {detail}")
    print(f"{'overall':<{width}}  {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_presets(args) -> int:
    if args.name:
        print(json.dumps(preset_config(args.name), indent=2))
    else:
        for name in sorted(PRESETS):
            print(name)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gpj",
        description="Finite-element eigensolver for the Gross-Pitaevskii problem",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a solver configuration")
    p_run.add_argument("config", nargs="?", help="JSON config path")
    p_run.add_argument("--preset", help="use a shipped preset instead of a config file")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="run the oracle validation suite")
    p_val.set_defaults(func=cmd_validate)

    p_spec = sub.add_parser("spectrum", help="pencil spectrum at the converged state")
    p_spec.add_argument("config", nargs="?", help="JSON config path")
    p_spec.add_argument("--preset", help="use a shipped preset")
    p_spec.add_argument("--k", type=int, default=5, help="number of eigenvalues")
    p_spec.set_defaults(func=cmd_spectrum)

    p_pre = sub.add_parser("presets", help="list shipped presets or print one")
    p_pre.add_argument("name", nargs="?")
    p_pre.set_defaults(func=cmd_presets)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GpjError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
