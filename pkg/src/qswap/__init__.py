"""Qudit circuit simulator and certified rewrites from state swapping to teleportation."""
from .core import (Circuit, ControlledByRegister, Gate, Measure, StateVector, fidelity,
                   state_overlap, tensor_embed, tolerance)
from .sim import circuit_unitary, kraus_map, measure_wire, run_circuit

__version__ = "0.1.0"
