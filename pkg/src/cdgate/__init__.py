"""Counterdiabatic geometric gates in Lambda-type three-level systems."""

from .core import DensityMatrix, Operator, StateVector, eigensystem_hermitian, expectation, tensor_product
from .dynamics import (
    AccuracyError,
    LindbladSet,
    TimeGrid,
    Trajectory,
    evolve_lindblad,
    evolve_propagator,
    evolve_schrodinger,
    phase_decomposition,
)
from .gates import GateSpec, average_fidelity, gate_matrix, infer_effective_gate, state_fidelity
from .hamiltonians import HamiltonianModel, three_level_model, qubit_resonator_model
from .pulses import PulseSchedule, build_schedule
from .scenarios import PRESETS, SWEEP_PRESETS, ScenarioConfig, SweepSpec, run_scenario, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "DensityMatrix",
    "GateSpec",
    "HamiltonianModel",
    "LindbladSet",
    "Operator",
    "PRESETS",
    "PulseSchedule",
    "SWEEP_PRESETS",
    "ScenarioConfig",
    "StateVector",
    "SweepSpec",
    "TimeGrid",
    "Trajectory",
    "average_fidelity",
    "build_schedule",
    "eigensystem_hermitian",
    "evolve_lindblad",
    "evolve_propagator",
    "evolve_schrodinger",
    "expectation",
    "gate_matrix",
    "infer_effective_gate",
    "phase_decomposition",
    "qubit_resonator_model",
    "run_scenario",
    "run_sweep",
    "state_fidelity",
    "tensor_product",
    "three_level_model",
]
