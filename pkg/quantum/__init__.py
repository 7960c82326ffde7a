"""
Quantum core package.

Exact two-qubit polarization algebra for the shared entangled-photon source.
"""

from .interfaces import (
    PairState,
    LocalUnitary,
    OutcomeDistribution,
    QuantumStateError,
    InvalidStateError,
    DomainError,
)
from .state import (
    CHSH_SETTINGS,
    IDENTITY,
    SINGLET_PHASE,
    ideal_pair_state,
    werner_mix,
    werner_parameter,
    werner_fidelity,
    eom_unitary,
    apply_local,
    born_probabilities,
    correlation_value,
    raw_correlation,
    fidelity,
    chsh_analytic,
    is_valid_state,
)

__all__ = [
    # Types
    'PairState',
    'LocalUnitary',
    'OutcomeDistribution',

    # Operations
    'ideal_pair_state',
    'werner_mix',
    'werner_parameter',
    'werner_fidelity',
    'eom_unitary',
    'apply_local',
    'born_probabilities',
    'correlation_value',
    'raw_correlation',
    'fidelity',
    'chsh_analytic',
    'is_valid_state',
    'CHSH_SETTINGS',
    'IDENTITY',
    'SINGLET_PHASE',

    # Exceptions
    'QuantumStateError',
    'InvalidStateError',
    'DomainError',
]
