"""Plotting front end for gpj solver CSV outputs."""

from .io import FieldGrid, History, PlotInputError, read_field, read_history
from .plots import plot_convergence, plot_density

__all__ = [
    "FieldGrid",
    "History",
    "PlotInputError",
    "read_field",
    "read_history",
    "plot_convergence",
    "plot_density",
]
