"""Readers for the solver's documented CSV outputs.

Run history: `iter,phase,residual,energy,lambda,tau,sigma,mass_tilde,
ortho_defect`, one row per iteration. Field dump: `x,y,re,im,density` over
all mesh nodes in row-major order. Nothing here touches solver internals.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

HISTORY_HEADER = "iter,phase,residual,energy,lambda,tau,sigma,mass_tilde,ortho_defect"
FIELD_HEADER = "x,y,re,im,density"


class PlotInputError(ValueError):
    pass


@dataclass
class History:
    iters: np.ndarray
    residuals: np.ndarray
    phases: list[str]


def read_history(path) -> History:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or ",".join(rows[0]) != HISTORY_HEADER:
        raise PlotInputError(f"{path}: not a run-history CSV (bad header)")
    if len(rows) < 2:
        raise PlotInputError(f"{path}: empty run history")
    iters = np.array([int(r[0]) for r in rows[1:]])
    residuals = np.array([float(r[2]) for r in rows[1:]])
    phases = [r[1] for r in rows[1:]]
    return History(iters=iters, residuals=residuals, phases=phases)


@dataclass
class FieldGrid:
    xs: np.ndarray
    ys: np.ndarray
    density: np.ndarray  # (ny, nx)


def read_field(path) -> FieldGrid:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    with open(path) as fh:
        header = fh.readline().strip()
    if header != FIELD_HEADER:
        raise PlotInputError(f"{path}: not a field CSV (bad header)")
    if data.ndim != 2 or data.shape[1] != 5:
        raise PlotInputError(f"{path}: malformed field table")
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if xs.size * ys.size != data.shape[0]:
        raise PlotInputError(
            f"{path}: {data.shape[0]} rows do not form a {ys.size} x {xs.size} grid"
        )
    # row-major: y outer, x inner
    density = data[:, 4].reshape(ys.size, xs.size)
    return FieldGrid(xs=xs, ys=ys, density=density)
