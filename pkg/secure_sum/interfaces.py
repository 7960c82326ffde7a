"""
Secure-Sum Interfaces

This module defines the ring, pad and announcement types, the key source
interface and the exceptions of the secure-sum protocol.

All arithmetic is in Z_{2^n}. Parties are assumed not to collude.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, Sequence, Tuple

import transport

if TYPE_CHECKING:
    from .pads import KeyMaterial

Edge = Tuple[str, str]


class SecureSumError(Exception):
    """Base exception for secure-sum errors."""
    pass


class KeyExhaustedError(SecureSumError):
    """
    Raised when a shared key has too few unconsumed bits.

    Attributes:
        required: Bits needed
        available: Bits left
    """

    def __init__(self, required: int, available: int, edge: str = ""):
        where = f" on {edge}" if edge else ""
        super().__init__(
            f"Key material exhausted{where}: {required} bits required, {available} available; "
            "run a fresh key distribution"
        )
        self.required = required
        self.available = available


class PadReuseError(SecureSumError):
    """Raised when a one-time pad would be used twice."""
    pass


class ProtocolViolationError(SecureSumError, transport.ProtocolViolationError):
    """Raised when announcements break the protocol (missing, duplicate, mixed rounds)."""
    pass


class PartyState(str, Enum):
    """
    States of a secure-sum party.
    """
    KEYED = "KEYED"              # Pads for the round are available
    ANNOUNCED = "ANNOUNCED"      # Own announcement broadcast
    DONE = "DONE"                # Sum of the round computed
    VIOLATION = "VIOLATION"      # Stopped on a protocol violation
    INCOMPLETE = "INCOMPLETE"    # Stopped on a missing announcement


@dataclass(frozen=True)
class RingTopology:
    """
    Parties arranged in a ring.

    Party i shares one key with party i+1 (its clockwise neighbor) and one
    with party i-1, wrapping around.
    """

    parties: Tuple[str, ...]

    def __post_init__(self):
        parties = tuple(self.parties)
        if len(parties) < 3:
            raise ValueError(f"A ring needs at least 3 parties, got {len(parties)}")
        if len(set(parties)) != len(parties):
            raise ValueError(f"Ring parties must be distinct: {parties}")
        object.__setattr__(self, "parties", parties)

    @classmethod
    def of(cls, parties: Sequence[str]) -> "RingTopology":
        return cls(tuple(parties))

    def __len__(self) -> int:
        return len(self.parties)

    def index(self, party: str) -> int:
        try:
            return self.parties.index(party)
        except ValueError:
            raise KeyError(f"{party} is not part of the ring") from None

    def next(self, party: str) -> str:
        """Clockwise neighbor."""
        return self.parties[(self.index(party) + 1) % len(self)]

    def prev(self, party: str) -> str:
        """Counter-clockwise neighbor."""
        return self.parties[(self.index(party) - 1) % len(self)]

    def edges(self) -> List[Edge]:
        """(party, clockwise neighbor) for every party, in ring order."""
        return [(party, self.next(party)) for party in self.parties]

    def peers(self, party: str) -> List[str]:
        """Other parties in ring order, starting after the given one."""
        start = self.index(party)
        return [self.parties[(start + k) % len(self)] for k in range(1, len(self))]


def edge_label(edge: Edge) -> str:
    return f"{edge[0]}->{edge[1]}"


@dataclass
class PadKey:
    """
    One n-bit pad cut from a shared key.

    Attributes:
        value: Integer in [0, 2^n)
        bit_width: n
        consumed: Set once the pad entered an announcement
    """

    value: int
    bit_width: int
    consumed: bool = False

    def __post_init__(self):
        if self.bit_width < 1:
            raise ValueError(f"Pad width must be >= 1, got {self.bit_width}")
        if not 0 <= self.value < (1 << self.bit_width):
            raise ValueError(f"Pad value {self.value} outside [0, 2^{self.bit_width})")

    def consume(self) -> int:
        """
        Use the pad.

        Raises:
            PadReuseError: If the pad was used before
        """
        if self.consumed:
            raise PadReuseError("One-time pad used twice")
        self.consumed = True
        return self.value


@dataclass(frozen=True)
class Announcement:
    """Public value X_i of one party in one round."""

    party: str
    round: int
    x: int


@dataclass(frozen=True)
class SumResult:
    """Sum t = sum of announcements mod 2^n of one round."""

    t: int
    round: int


class KeySource(ABC):
    """
    Interface for the pairwise keys of a ring.
    """

    name = "abstract"

    @abstractmethod
    def edge_keys(self, ring: RingTopology, bits_needed: int) -> Dict[Edge, Tuple["KeyMaterial", "KeyMaterial"]]:
        """
        Provide the key of every ring edge.

        Args:
            ring: Ring of parties
            bits_needed: Bits each edge key should hold

        Returns:
            Dict mapping each edge (left, right) to the copies held by the
            left and the right party
        """
        pass
