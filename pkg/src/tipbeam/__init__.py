"""Spectral and time-domain laboratory for a boundary-damped shear beam with tip load.

The package covers: closed-form characteristic function of the eigenvalue
problem, high-frequency eigenvalue expansions, certified root search in the
complex plane, eigenmode construction and Riesz-basis diagnostics, an
energy-consistent finite-difference simulator, and a small CLI.
"""

from .errors import TipbeamError
from .model import BeamParams, GridState, regime_info, validate_params

__version__ = "0.1.0"

__all__ = [
    "BeamParams",
    "GridState",
    "TipbeamError",
    "__version__",
    "regime_info",
    "validate_params",
]
