"""Coupled giant spins: ground-state entanglement, classical fixed points and
Husimi phase-space portraits."""

__version__ = "0.1.0"

from .spin import SpinJ, build_jplus, build_jx_jy, build_jz, kron
from .model import ModelParams, apply_hamiltonian, build_hamiltonian, check_symmetries
from .eigen import EigenResult, full_spectrum, ground_state, jacobi_oracle
from .entanglement import QuantumState, entropy_bits, find_mu_qc, reduce, sweep
from .phasespace import SphereAngle, coherent_amps, q_cross_section, q_value, wehrl_entropy
from .classical import (
    ClassicalState,
    bifurcation_diagram,
    classical_energy,
    enumerate_fixed_points,
    equations_of_motion,
    integrate,
    linearize_and_classify,
)
