"""Smooth 1D Lagrangian Euler flows up to gradient blowup.

Modules: :mod:`~eulerlab.gas` (thermodynamics and pressure-law audit),
:mod:`~eulerlab.fields` (grids, snapshots, initial data),
:mod:`~eulerlab.evolution` (semi-Lagrangian solver and blowup detection),
:mod:`~eulerlab.characteristics` (path tracing and Riccati integration),
:mod:`~eulerlab.bounds` (a priori bounds and blowup certificates) and
:mod:`~eulerlab.cli` (scenario runner).
"""

from .gas import GasModel, AdmissibilityError
from .fields import FieldSnapshot, Grid1D, sample_initial
from .evolution import SolverConfig, run, step
from .bounds import certify, verify_run

__version__ = "0.1.0"

__all__ = [
    "GasModel", "AdmissibilityError", "FieldSnapshot", "Grid1D", "sample_initial",
    "SolverConfig", "run", "step", "certify", "verify_run",
]
