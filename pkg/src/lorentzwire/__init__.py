"""Reduced dynamics of a relativistic charge near a wire with a modulated current."""
from .model import (CANONICAL, DerivedParams, Equilibrium, PhysParams, RadialState,
                    derived_constants, equilibrium, hamiltonian, vector_field)
from .field import FieldModel

__version__ = "0.1.0"

__all__ = [
    "CANONICAL", "DerivedParams", "Equilibrium", "FieldModel", "PhysParams", "RadialState",
    "derived_constants", "equilibrium", "hamiltonian", "vector_field",
]
