"""
Two-photon polarization state algebra.

State construction, isotropic noise mixing, EOM rotations, Born-rule
probabilities, fidelity and analytic CHSH values. All functions are pure.
"""
import math
from typing import Sequence, Tuple

import numpy as np

from .interfaces import (
    ALGEBRA_TOLERANCE,
    POSITIVITY_TOLERANCE,
    DomainError,
    LocalUnitary,
    OutcomeDistribution,
    PairState,
)

# Source phase of the singlet
SINGLET_PHASE = math.pi

# Outcome values per PBS port: Alice H=+1, V=-1; Bob H=-1, V=+1
ALICE_PORT_VALUES = np.array([1.0, -1.0])
BOB_PORT_VALUES = np.array([-1.0, 1.0])

# (theta_a_deg, theta_b_deg, sign) for S = E1 + E2 + E3 - E4
CHSH_SETTINGS: Tuple[Tuple[float, float, int], ...] = (
    (0.0, 22.5, 1),
    (45.0, 22.5, 1),
    (45.0, 67.5, 1),
    (0.0, 67.5, -1),
)

_PROJECTORS = (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex))


def ideal_pair_state(phi: float = SINGLET_PHASE) -> PairState:
    """
    Build the ideal source state (|HV> + e^{i phi}|VH>)/sqrt(2).

    Args:
        phi: Source phase in radians

    Returns:
        Pure PairState
    """
    if not math.isfinite(phi):
        raise DomainError("Source phase must be finite")
    vector = np.array([0.0, 1.0, np.exp(1j * phi), 0.0], dtype=complex) / math.sqrt(2)
    return PairState(np.outer(vector, vector.conj()))


def werner_parameter(fidelity_goal: float) -> float:
    """Mixing weight p = (4F - 1)/3 that yields fidelity F."""
    if not 0.25 <= fidelity_goal <= 1.0:
        raise DomainError(f"Fidelity {fidelity_goal} is outside [0.25, 1]")
    return (4.0 * fidelity_goal - 1.0) / 3.0


def werner_fidelity(p: float) -> float:
    """Fidelity (3p + 1)/4 of a Werner state with mixing weight p."""
    return (3.0 * p + 1.0) / 4.0


def werner_mix(target: PairState, fidelity_goal: float) -> PairState:
    """
    Mix a pure target with white noise to reach a given fidelity.

    Args:
        target: Pure target state
        fidelity_goal: Desired fidelity with the target, in [0.25, 1]

    Returns:
        p * target + (1 - p) * I/4 with p = (4F - 1)/3

    Raises:
        DomainError: If the fidelity is out of range or the target is mixed
    """
    if not target.is_pure():
        raise DomainError("Werner mixing requires a pure target state")
    p = werner_parameter(fidelity_goal)
    mixed = p * target.matrix + (1.0 - p) * np.eye(4) / 4.0
    return PairState(mixed)


def eom_unitary(theta: float) -> LocalUnitary:
    """
    Polarization transformation of the electro-optic modulator.

    |H> -> cos(theta)|H> - i sin(theta)|V>,
    |V> -> -i sin(theta)|H> + cos(theta)|V>.
    """
    if not math.isfinite(theta):
        raise DomainError("EOM angle must be finite")
    c, s = math.cos(theta), math.sin(theta)
    return LocalUnitary(np.array([[c, -1j * s], [-1j * s, c]], dtype=complex))


IDENTITY = eom_unitary(0.0)


def apply_local(state: PairState, ua: LocalUnitary, ub: LocalUnitary) -> PairState:
    """Apply (ua x ub) rho (ua x ub)^dagger."""
    u = np.kron(ua.matrix, ub.matrix)
    rotated = u @ state.matrix @ u.conj().T
    # restore exact hermiticity lost to rounding
    return PairState((rotated + rotated.conj().T) / 2.0)


def born_probabilities(state: PairState, theta_a: float, theta_b: float) -> OutcomeDistribution:
    """
    Detection probabilities after the EOMs and polarizing beam splitters.

    Args:
        state: Two-photon state
        theta_a: Alice's EOM angle in radians
        theta_b: Bob's EOM angle in radians

    Returns:
        OutcomeDistribution indexed by (port_A, port_B)
    """
    u = np.kron(eom_unitary(theta_a).matrix, eom_unitary(theta_b).matrix)
    rotated = u @ state.matrix @ u.conj().T
    # diagonal of the rotated state over (HH, HV, VH, VV) is exactly Tr[rho' (P_a x P_b)]
    p = np.clip(np.real(np.diag(rotated)), 0.0, 1.0)
    return OutcomeDistribution((p / p.sum()).reshape(2, 2))


def correlation_value(distribution: OutcomeDistribution) -> float:
    """Expectation of the product of outcome values under the sign convention."""
    return float(ALICE_PORT_VALUES @ distribution.p @ BOB_PORT_VALUES)


def raw_correlation(distribution: OutcomeDistribution) -> float:
    """Port correlation p_HH + p_VV - p_HV - p_VH without the sign convention."""
    p = distribution.p
    return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])


def fidelity(state: PairState, target: PairState) -> float:
    """
    Overlap <Psi|rho|Psi> with a pure target.

    Raises:
        DomainError: If the target is not pure
    """
    if not target.is_pure():
        raise DomainError("Fidelity target must be a pure state")
    value = float(np.real(np.trace(state.matrix @ target.matrix)))
    return min(1.0, max(0.0, value))


def chsh_analytic(
    state: PairState,
    angles: Sequence[Tuple[float, float]] = tuple((a, b) for a, b, _ in CHSH_SETTINGS),
) -> float:
    """
    Exact CHSH value S = E(a1,b1) + E(a2,b1) + E(a2,b2) - E(a1,b2).

    Args:
        state: Two-photon state
        angles: Four (theta_a, theta_b) pairs in degrees, ordered as the
            terms of S

    Returns:
        S under the outcome sign convention
    """
    if len(angles) != 4:
        raise DomainError("CHSH needs exactly four angle pairs")
    signs = [sign for _, _, sign in CHSH_SETTINGS]
    total = 0.0
    for (theta_a, theta_b), sign in zip(angles, signs):
        distribution = born_probabilities(state, math.radians(theta_a), math.radians(theta_b))
        total += sign * correlation_value(distribution)
    return total


def is_valid_state(matrix: np.ndarray) -> bool:
    """Check the PairState invariants without raising."""
    matrix = np.asarray(matrix, dtype=complex)
    return bool(
        matrix.shape == (4, 4)
        and np.max(np.abs(matrix - matrix.conj().T)) <= ALGEBRA_TOLERANCE
        and abs(np.trace(matrix) - 1) <= ALGEBRA_TOLERANCE
        and np.linalg.eigvalsh(matrix).min() >= -POSITIVITY_TOLERANCE
    )
