"""Numerical toolkit for multi-peak solutions of critical Hamiltonian elliptic
systems with Neumann boundary conditions."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .params import ParameterError, SystemParams  # noqa: E402
from .ground_state import RadialProfile, solve_ground_state  # noqa: E402
from .energy_constants import EnergyConstants, compute_energy_constants  # noqa: E402
from .lattice import PeakConfig, Q3_constant, lattice_sum  # noqa: E402
from .reduced_energy import ReducedEnergyModel, lambda_star, maximize_numeric  # noqa: E402
from .bubble_field import CorrectionField, phi0_eval  # noqa: E402
from .estimators import (  # noqa: E402
    EnergyConstantsEstimator,
    GroundStateSolver,
    ReducedEnergyMaximizer,
)

__all__ = [
    "CorrectionField", "EnergyConstants", "EnergyConstantsEstimator", "GroundStateSolver",
    "ParameterError", "PeakConfig", "Q3_constant", "RadialProfile", "ReducedEnergyMaximizer",
    "ReducedEnergyModel", "SystemParams", "compute_energy_constants", "lambda_star",
    "lattice_sum", "maximize_numeric", "phi0_eval", "solve_ground_state", "__version__",
]
