"""Simulation of collective recoil lasing (FEL and CARL) in scaled units.

Four descriptions of the same particle-field system are provided: classical
N-particle equations, the quantum momentum ladder, the Wigner and Vlasov
phase-space equations and the two-level Maxwell-Bloch reduction.
"""

__version__ = "0.1.0"

from .errors import CarlFelError, NotTwoLevelError, NumericalAbort, ValidationError
from .integrate import IntegratorConfig
from .params import ScaledParams
from .runs import RunConfig, compare_models, run_model

__all__ = [
    "CarlFelError",
    "IntegratorConfig",
    "NotTwoLevelError",
    "NumericalAbort",
    "RunConfig",
    "ScaledParams",
    "ValidationError",
    "compare_models",
    "run_model",
]
