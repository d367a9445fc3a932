"""Two-species Bose-Hubbard rings with synthetic gauge phases.

Builds the joint Hamiltonian, the analytic zero-energy maximally entangled
states, phase-ramp dynamics and the entanglement / current observables.
"""

from ._backend import available as available_backends
from ._backend import default_backend
from .analytic import MESState, construct_mes, lz_probability, mes_condition_mixed, mes_phases
from .dynamics import RampSchedule, Trajectory, evolve, run_protocol, scan_alpha
from .errors import ConfigError, DomainError, NumericalError
from .fock import Basis, dimension, enumerate_basis, hop
from .measures import current_expectation, fidelity, reduce_to_A, reduce_to_B, schmidt_number
from .model import (
    HermitianOperator,
    ModelParams,
    build_current,
    build_hamiltonian,
    build_interaction,
    build_kinetic,
    build_kinetic_single,
    lift_to_joint,
)
from .spectra import (
    CrossingReport,
    SpectrumScan,
    eigendecompose,
    highest_entanglement_eigenstate,
    locate_crossing,
    scan_spectrum,
)

__version__ = "0.1.0"
