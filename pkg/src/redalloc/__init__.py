"""Active redundancy allocation in coherent systems with dependent components."""

from .errors import DomainError, PoleError, ParameterError, ValidationError
from .structure import CoherentStructure, Distortion, k_out_of_n, parallel, series
from .systems import ComponentLevelSystem, SystemLevelSystem, default_grid

__version__ = "0.1.0"

__all__ = [
    "CoherentStructure", "ComponentLevelSystem", "Distortion", "DomainError", "ParameterError",
    "PoleError", "SystemLevelSystem", "ValidationError", "default_grid", "k_out_of_n",
    "parallel", "series",
]
