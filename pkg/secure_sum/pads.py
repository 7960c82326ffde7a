"""
One-time pads and the announcement arithmetic of the secure sum.

Party i announces X_i = v_i + R_{i,i+1} - R_{i-1,i} mod 2^n, so the pads
telescope away in the sum of all announcements.
"""

import threading
from typing import Iterable, Optional, Sequence

import numpy as np

from qkd import FinalKey
from qkd.interfaces import as_bits

from .interfaces import (
    Announcement,
    KeyExhaustedError,
    PadKey,
    PadReuseError,
    ProtocolViolationError,
    SumResult,
)


class KeyMaterial:
    """
    One party's copy of a shared key with a map of consumed bits.

    Attributes:
        bits: Key bits
        label: Edge name used in messages
    """

    def __init__(self, bits: Sequence[int], label: str = ""):
        self.bits = as_bits(bits).copy()
        self.label = label
        self._consumed = np.zeros(self.bits.size, dtype=bool)
        self._lock = threading.Lock()

    @classmethod
    def from_final_key(cls, key: FinalKey, label: str = "") -> "KeyMaterial":
        return cls(key.bits, label)

    def __len__(self) -> int:
        return int(self.bits.size)

    @property
    def available(self) -> int:
        """Number of unconsumed bits."""
        return int(self.bits.size - self._consumed.sum())

    def take(self, offset: int, length: int) -> np.ndarray:
        """
        Consume bits [offset, offset + length).

        Raises:
            KeyExhaustedError: If the key is too short
            PadReuseError: If any of the bits was consumed before
        """
        if offset < 0 or length < 1:
            raise ValueError(f"Invalid key slice: offset {offset}, length {length}")
        with self._lock:
            if offset + length > self.bits.size:
                raise KeyExhaustedError(offset + length, self.bits.size, self.label)
            window = self._consumed[offset:offset + length]
            if window.any():
                raise PadReuseError(f"Key bits {offset}..{offset + length - 1} of {self.label or 'key'} already used")
            window[:] = True
        return self.bits[offset:offset + length]


def bits_to_int(bits: Sequence[int]) -> int:
    """Big-endian integer value of a bit string."""
    value = 0
    for bit in as_bits(bits).tolist():
        value = (value << 1) | bit
    return value


def derive_pad(key: KeyMaterial, n: int, offset: int) -> PadKey:
    """
    Cut an n-bit pad from a shared key.

    Args:
        key: Key material of one party
        n: Pad width in bits
        offset: First key bit of the pad

    Returns:
        PadKey whose value reads bits [offset, offset + n) big-endian

    Raises:
        KeyExhaustedError: If fewer than offset + n bits exist
        PadReuseError: If any of the bits was already used
    """
    return PadKey(value=bits_to_int(key.take(offset, n)), bit_width=n)


def _check_width(value: int, n: int, what: str) -> None:
    if n < 1:
        raise ValueError(f"Bit width must be >= 1, got {n}")
    if not 0 <= value < (1 << n):
        raise ValueError(f"{what} {value} outside [0, 2^{n})")


def compute_announcement(
    v: int,
    pad_next: PadKey,
    pad_prev: PadKey,
    n: int,
    party: str = "",
    round_index: int = 0
) -> Announcement:
    """
    X = v + pad_next - pad_prev mod 2^n; consumes both pads.

    Raises:
        ValueError: If v or a pad width does not fit n bits
        PadReuseError: If a pad was used before
    """
    _check_width(v, n, "Input")
    for pad in (pad_next, pad_prev):
        if pad.bit_width != n:
            raise ValueError(f"Pad width {pad.bit_width} does not match n={n}")
    if pad_next is pad_prev:
        raise PadReuseError("The same pad cannot serve both ring edges")
    if pad_next.consumed or pad_prev.consumed:
        raise PadReuseError(f"{party or 'party'} reused a pad in round {round_index}")
    x = (v + pad_next.consume() - pad_prev.consume()) % (1 << n)
    return Announcement(party=party, round=round_index, x=x)


def aggregate(
    announcements: Iterable[Announcement],
    n: int,
    parties: Optional[Sequence[str]] = None
) -> SumResult:
    """
    t = sum of announcements mod 2^n.

    Args:
        announcements: One announcement per party of the same round
        n: Bit width
        parties: Expected parties; when given every one must be present

    Raises:
        ProtocolViolationError: On duplicate or missing parties, mixed
            rounds or values outside [0, 2^n)
    """
    announcements = list(announcements)
    if not announcements:
        raise ProtocolViolationError("No announcements to aggregate")
    rounds = {a.round for a in announcements}
    if len(rounds) != 1:
        raise ProtocolViolationError(f"Announcements mix rounds {sorted(rounds)}")
    seen = [a.party for a in announcements]
    duplicates = sorted({p for p in seen if seen.count(p) > 1})
    if duplicates:
        raise ProtocolViolationError(f"Duplicate announcements from {', '.join(duplicates)}")
    if parties is not None:
        missing = sorted(set(parties) - set(seen))
        unknown = sorted(set(seen) - set(parties))
        if missing or unknown:
            raise ProtocolViolationError(f"Announcements missing from {missing}, unknown senders {unknown}")
    for a in announcements:
        if not 0 <= a.x < (1 << n):
            raise ProtocolViolationError(f"Announcement {a.x} of {a.party} outside [0, 2^{n})")
    t = sum(a.x for a in announcements) % (1 << n)
    return SumResult(t=t, round=rounds.pop())


def ring_announcements(values: np.ndarray, pads: np.ndarray, n: int) -> np.ndarray:
    """
    Vectorized announcements.

    Args:
        values: (..., N) inputs
        pads: (..., N) pads; pads[..., i] is shared by parties i and i+1
        n: Bit width, at most 61

    Returns:
        (..., N) announcements
    """
    if not 1 <= n <= 61:
        raise ValueError(f"Vectorized announcements support 1 <= n <= 61, got {n}")
    values = np.asarray(values, dtype=np.int64)
    pads = np.asarray(pads, dtype=np.int64)
    return np.mod(values + pads - np.roll(pads, 1, axis=-1), 1 << n)
