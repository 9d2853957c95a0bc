"""Strong-coupling thermodynamics of the anharmonic oscillator, with exact references."""

from .errors import ConvergenceError, DomainError, OutOfRegimeError
from .models import OscillatorModel, ThermalPoint

__version__ = "0.1.0"

__all__ = ["ConvergenceError", "DomainError", "OutOfRegimeError", "OscillatorModel", "ThermalPoint"]
