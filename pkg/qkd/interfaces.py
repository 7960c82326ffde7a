"""
QKD Interfaces

This module defines the key types, the reconciliation and privacy
amplification interfaces and the exceptions of the E91 post-processing
pipeline.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class QkdError(Exception):
    """Base exception for key distribution errors."""
    pass


class ProtocolAbortError(QkdError):
    """
    Raised when a security check aborts the session.

    Attributes:
        stage: Pipeline stage that aborted ("chsh" or "qber")
        gamma: Measured QBER, when known
        s_value: Measured CHSH value, when known
    """

    def __init__(self, message: str, stage: str, gamma: Optional[float] = None, s_value: Optional[float] = None):
        super().__init__(message)
        self.stage = stage
        self.gamma = gamma
        self.s_value = s_value


class QberThresholdExceededError(ProtocolAbortError):
    """Raised when the estimated QBER reaches the security threshold."""

    def __init__(self, gamma: float, threshold: float):
        super().__init__(
            f"QBER {gamma:.4f} reaches the security threshold {threshold:.2f}",
            stage="qber",
            gamma=gamma,
        )
        self.threshold = threshold


class ChshCheckFailedError(ProtocolAbortError):
    """Raised when the CHSH value does not exceed 2 by two standard errors."""

    def __init__(self, s_value: float, std_error: float, gamma: Optional[float] = None):
        super().__init__(
            f"CHSH check failed: S = {s_value:.4f} +/- {std_error:.4f}",
            stage="chsh",
            gamma=gamma,
            s_value=s_value,
        )
        self.std_error = std_error


class CodeConstructionError(QkdError):
    """Raised when a parity-check code cannot be constructed."""
    pass


class InsufficientKeyError(QkdError):
    """Raised when too little key material is left for the requested output."""
    pass


def as_bits(bits: Sequence[int]) -> np.ndarray:
    """Validate and convert a bit sequence to a uint8 array."""
    array = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if array.size and array.max() > 1:
        raise ValueError("Bit strings may only hold 0 and 1")
    return array


@dataclass(frozen=True, eq=False)
class SiftedKey:
    """Key bits of one party with the slots they were measured in."""

    bits: np.ndarray
    source_slots: np.ndarray

    def __post_init__(self):
        bits = as_bits(self.bits)
        slots = np.asarray(self.source_slots, dtype=np.int64).reshape(-1)
        if bits.size != slots.size:
            raise ValueError(f"{bits.size} bits but {slots.size} slots")
        if slots.size > 1 and np.any(np.diff(slots) <= 0):
            raise ValueError("Sifted key slots must be strictly increasing")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "source_slots", slots)

    def __len__(self) -> int:
        return int(self.bits.size)

    def without(self, positions: Sequence[int]) -> "SiftedKey":
        """Key with the given positions removed."""
        keep = np.ones(len(self), dtype=bool)
        keep[np.asarray(positions, dtype=np.int64)] = False
        return SiftedKey(self.bits[keep], self.source_slots[keep])

    def truncate(self, length: int) -> "SiftedKey":
        return SiftedKey(self.bits[:length], self.source_slots[:length])


@dataclass(frozen=True, eq=False)
class QberReport:
    """QBER estimated on a disclosed sample of the sifted keys."""

    gamma: float
    sample_size: int
    disclosed_positions: np.ndarray

    def __post_init__(self):
        positions = np.asarray(self.disclosed_positions, dtype=np.int64)
        if positions.size != self.sample_size:
            raise ValueError("Sample size must equal the number of disclosed positions")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"QBER {self.gamma} outside [0, 1]")
        object.__setattr__(self, "disclosed_positions", positions)


@dataclass(frozen=True, eq=False)
class ReconciliationResult:
    """Outcome of reconciling one block."""

    corrected_bits: np.ndarray
    syndrome_bits_disclosed: int
    verified: bool
    bp_iterations: int
    converged: bool = True


@dataclass
class LeakAccounting:
    """Bits disclosed over the public channel during post-processing."""

    syndrome_bits: int = 0
    hash_bits: int = 0
    qber_sample_bits: int = 0
    discarded_blocks: int = 0

    @property
    def reconciliation_leak(self) -> int:
        """Leak charged against the reconciled key."""
        return self.syndrome_bits + self.hash_bits


@dataclass(frozen=True, eq=False)
class FinalKey:
    """Secret key after privacy amplification."""

    bits: np.ndarray
    security_param: int
    leak_accounting: LeakAccounting = field(default_factory=LeakAccounting)

    def __len__(self) -> int:
        return int(np.asarray(self.bits).size)

    def matches(self, other: "FinalKey") -> bool:
        return bool(np.array_equal(self.bits, other.bits))


class Reconciler(ABC):
    """Interface for information reconciliation of one block."""

    @abstractmethod
    def reconcile(
        self,
        alice_block: np.ndarray,
        bob_block: np.ndarray,
        gamma_prior: float,
        hash_seed: Optional[int] = None
    ) -> ReconciliationResult:
        """
        Correct Bob's block towards Alice's.

        Args:
            alice_block: Alice's bits
            bob_block: Bob's bits
            gamma_prior: Channel error probability used by the decoder
            hash_seed: Seed of the verification hash

        Returns:
            ReconciliationResult
        """
        pass


class PrivacyAmplifier(ABC):
    """Interface for privacy amplification."""

    @abstractmethod
    def amplify(self, key: np.ndarray, output_length: int, seed: Optional[int] = None) -> np.ndarray:
        """
        Compress a reconciled key.

        Args:
            key: Reconciled bits
            output_length: Number of output bits
            seed: Seed of the hash function choice

        Returns:
            Output bits
        """
        pass
