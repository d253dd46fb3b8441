"""Simulator and pulse compiler for magnetic-cluster spin qubits."""

__version__ = "0.1.0"

from .spin import SpinValue, expm, fidelity, is_hermitian, is_unitary, project_two_level, spin_operators
from .qubit import (
    ClusterParams,
    EnergyLevel,
    IntegrationError,
    energy_table,
    gate_time,
    gate_x,
    gate_y,
    gate_z,
    larmor_frequency,
    level_energy,
    simulate_lab_frame,
)
from .readout import ReadoutParams, ReadoutState, crossing_voltages, readout_trace, thermal_populations
from .entangle import (
    ChainSpec,
    PulseInstruction,
    PulseProgram,
    compile_cnot,
    compose,
    expand_z,
    ideal_cnot,
    interaction_unitary,
    inverse_program,
    route_cnot,
)
from .decoherence import DecoherenceQuery, LatticeParams, decoherence_time, fig6_sweep, ops_budget, transition_rate
from .audit import run_audit
from .config import ConfigError, RunConfig, parse_config, parse_config_text
