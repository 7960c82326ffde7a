"""
Quantum Core Interfaces

This module defines the value types and exceptions of the two-photon
polarization algebra.
"""
from dataclasses import dataclass, field

import numpy as np

# Tolerance for algebraic identities (hermiticity, trace, unitarity)
ALGEBRA_TOLERANCE = 1e-12

# Floating-point slack allowed on the smallest eigenvalue
POSITIVITY_TOLERANCE = 1e-10

# Ordered two-photon basis of PairState matrices
PAIR_BASIS = ("HH", "HV", "VH", "VV")


class QuantumStateError(Exception):
    """Base exception for quantum state errors."""
    pass


class InvalidStateError(QuantumStateError):
    """Raised when a matrix violates the density-matrix or unitary invariants."""
    pass


class DomainError(QuantumStateError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""
    pass


@dataclass(frozen=True, eq=False)
class PairState:
    """
    Density matrix of the two-photon polarization state.

    The matrix is expressed over the ordered basis (HH, HV, VH, VV) and is
    validated on construction: Hermitian, unit trace and positive
    semidefinite.
    """

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (4, 4):
            raise InvalidStateError(f"PairState needs a 4x4 matrix, got {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T)) > ALGEBRA_TOLERANCE:
            raise InvalidStateError("PairState matrix is not Hermitian")
        if abs(np.trace(matrix) - 1) > ALGEBRA_TOLERANCE:
            raise InvalidStateError(f"PairState trace is {np.trace(matrix).real:.15f}, expected 1")
        if np.linalg.eigvalsh(matrix).min() < -POSITIVITY_TOLERANCE:
            raise InvalidStateError("PairState matrix is not positive semidefinite")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def purity(self) -> float:
        """Tr(rho^2)."""
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def is_pure(self, tolerance: float = POSITIVITY_TOLERANCE) -> bool:
        return abs(self.purity - 1.0) <= tolerance

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "PairState":
        """Build the projector onto a (normalized) state vector."""
        psi = np.asarray(vector, dtype=complex).reshape(4)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """Single-photon polarization transformation over (H, V)."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (2, 2):
            raise InvalidStateError(f"LocalUnitary needs a 2x2 matrix, got {matrix.shape}")
        if np.max(np.abs(matrix @ matrix.conj().T - np.eye(2))) > ALGEBRA_TOLERANCE:
            raise InvalidStateError("LocalUnitary matrix is not unitary")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def __matmul__(self, other: "LocalUnitary") -> "LocalUnitary":
        return LocalUnitary(self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """
    Joint detection probabilities indexed by (port_A, port_B).

    Port 0 is the H output of the polarizing beam splitter, port 1 the V
    output.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(2, 2)
        if np.any(p < -ALGEBRA_TOLERANCE) or np.any(p > 1 + ALGEBRA_TOLERANCE):
            raise InvalidStateError("Outcome probabilities must lie in [0, 1]")
        if abs(p.sum() - 1.0) > ALGEBRA_TOLERANCE:
            raise InvalidStateError(f"Outcome probabilities sum to {p.sum():.15f}")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def value_table(self) -> np.ndarray:
        """
        Re-index the probabilities by outcome bits.

        Bit 0 stands for value +1 and bit 1 for value -1. Alice's H port
        carries +1, Bob's H port carries -1, so Bob's axis is reversed.

        Returns:
            2x2 array P[bit_a][bit_b]
        """
        return self.p[:, ::-1].copy()
