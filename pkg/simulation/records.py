"""
Record types of the entanglement access network.

End users, routing schedules, coincidence records and aggregated count
tables.
"""
import enum
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .interfaces import ScheduleError

# Decimal places used when angles become dictionary keys
ANGLE_KEY_DECIMALS = 6

_USER_PATTERN = re.compile(r"^\s*([ABab])\s*(\d+)\s*$")
_PAIR_PATTERN = re.compile(r"^\s*([Aa]\d+)\s*[-_,]?\s*([Bb]\d+)\s*$")


class Side(str, enum.Enum):
    """Side of the network a photon is routed to."""
    A = "A"
    B = "B"


@dataclass(frozen=True, order=True)
class EndUser:
    """An end user behind one output port of a 1xN switch."""

    side: Side
    port: int

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        if self.port < 1:
            raise ValueError(f"Port must be >= 1, got {self.port}")

    def check_ports(self, ports_per_side: int) -> None:
        """Raise ValueError when the port does not exist on the switch."""
        if not 1 <= self.port <= ports_per_side:
            raise ValueError(f"Port {self.port} outside [1, {ports_per_side}] for {self}")

    @classmethod
    def parse(cls, text: str) -> "EndUser":
        """Parse names such as ``A3`` or ``b1``."""
        match = _USER_PATTERN.match(text)
        if not match:
            raise ValueError(f"Invalid end user: {text!r}")
        return cls(Side(match.group(1).upper()), int(match.group(2)))

    def __str__(self) -> str:
        return f"{self.side.value}{self.port}"


UserPair = Tuple[EndUser, EndUser]


def parse_pair(text: str) -> UserPair:
    """
    Parse a pair of end users such as ``A1B2`` or ``A1-B2``.

    Returns:
        (Alice-side user, Bob-side user)
    """
    match = _PAIR_PATTERN.match(text)
    if not match:
        raise ValueError(f"Invalid pair {text!r}; expected e.g. A1B2")
    return EndUser.parse(match.group(1)), EndUser.parse(match.group(2))


def pair_label(pair: UserPair) -> str:
    return f"{pair[0]}{pair[1]}"


def angle_key(theta_deg: float) -> float:
    """Canonical float used to key angles in dictionaries."""
    return round(float(theta_deg), ANGLE_KEY_DECIMALS) + 0.0


@dataclass(frozen=True)
class ScheduleEntry:
    """Switch setting for an inclusive slot interval."""

    slot_start: int
    slot_end: int
    pair: UserPair

    def __post_init__(self):
        if self.slot_start > self.slot_end:
            raise ScheduleError(f"Entry starts after it ends: {self.slot_start} > {self.slot_end}")
        if self.pair[0].side != Side.A or self.pair[1].side != Side.B:
            raise ScheduleError(f"Pair must be (A user, B user), got {self.pair}")


class RoutingSchedule:
    """
    Ordered, non-overlapping switch schedule.

    Slots not covered by any entry are not routed to any end user.
    """

    def __init__(self, entries: Iterable[ScheduleEntry] = ()):
        self.entries: Tuple[ScheduleEntry, ...] = tuple(sorted(entries, key=lambda e: e.slot_start))
        for previous, current in zip(self.entries, self.entries[1:]):
            if current.slot_start <= previous.slot_end:
                raise ScheduleError(
                    f"Overlapping schedule entries at slots {previous.slot_end}/{current.slot_start}"
                )
        self._starts = np.array([e.slot_start for e in self.entries], dtype=np.int64)
        self._ends = np.array([e.slot_end for e in self.entries], dtype=np.int64)

    @classmethod
    def single(cls, pair: UserPair, n_slots: int) -> "RoutingSchedule":
        """Route every slot of a run to one pair."""
        return cls([ScheduleEntry(0, n_slots - 1, pair)])

    @classmethod
    def round_robin(cls, pairs: Sequence[UserPair], slots_per_pair: int, cycles: int = 1) -> "RoutingSchedule":
        """Time-share the source among several pairs in equal contiguous blocks."""
        entries = []
        start = 0
        for _ in range(cycles):
            for pair in pairs:
                entries.append(ScheduleEntry(start, start + slots_per_pair - 1, pair))
                start += slots_per_pair
        return cls(entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def pairs(self) -> Tuple[UserPair, ...]:
        """Distinct pairs in order of first appearance."""
        seen: Dict[UserPair, None] = {}
        for entry in self.entries:
            seen.setdefault(entry.pair, None)
        return tuple(seen)

    def entry_indices(self, slots: np.ndarray) -> np.ndarray:
        """
        Vectorized lookup of the entry covering each slot.

        Returns:
            Entry index per slot, -1 where no entry covers it
        """
        slots = np.asarray(slots, dtype=np.int64)
        if not self.entries:
            return np.full(slots.shape, -1, dtype=np.int64)
        idx = np.searchsorted(self._starts, slots, side="right") - 1
        covered = (idx >= 0) & (slots <= self._ends[np.clip(idx, 0, None)])
        return np.where(covered, idx, -1)

    def route(self, slot: int) -> Optional[UserPair]:
        """Return the pair the switches serve in a slot, or None."""
        idx = int(self.entry_indices(np.array([slot]))[0])
        return self.entries[idx].pair if idx >= 0 else None


@dataclass(frozen=True)
class CoincidenceRecord:
    """
    One coincidence between the two ends.

    Outcome bits follow the sign convention: 0 is value +1, 1 is value -1.
    """

    slot: int
    pair: UserPair
    theta_a: float
    theta_b: float
    outcome_a: int
    outcome_b: int


@dataclass
class LossStatistics:
    """Counters of one simulation run."""

    slots: int = 0
    routed_slots: int = 0
    pairs_generated: int = 0
    arrived_a: int = 0
    arrived_b: int = 0
    dark_counts_a: int = 0
    dark_counts_b: int = 0
    coincidences: int = 0

    def merge(self, other: "LossStatistics") -> "LossStatistics":
        return LossStatistics(**{
            name: getattr(self, name) + getattr(other, name)
            for name in self.__dataclass_fields__
        })

    @property
    def coincidence_rate(self) -> float:
        return self.coincidences / self.slots if self.slots else 0.0


@dataclass
class CoincidenceLog:
    """
    Columnar container of coincidence records.

    Iterating yields CoincidenceRecord objects; the numpy columns are used
    directly by the analysis and key-sifting code.
    """

    pairs: Tuple[UserPair, ...] = ()
    slot: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    pair_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    theta_a: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=float))
    theta_b: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=float))
    outcome_a: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    outcome_b: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))

    def __len__(self) -> int:
        return int(self.slot.size)

    def __iter__(self) -> Iterator[CoincidenceRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def record(self, i: int) -> CoincidenceRecord:
        return CoincidenceRecord(
            slot=int(self.slot[i]),
            pair=self.pairs[int(self.pair_index[i])],
            theta_a=float(self.theta_a[i]),
            theta_b=float(self.theta_b[i]),
            outcome_a=int(self.outcome_a[i]),
            outcome_b=int(self.outcome_b[i]),
        )

    def select(self, mask: np.ndarray) -> "CoincidenceLog":
        """Keep the records where mask is true."""
        return CoincidenceLog(
            pairs=self.pairs,
            slot=self.slot[mask],
            pair_index=self.pair_index[mask],
            theta_a=self.theta_a[mask],
            theta_b=self.theta_b[mask],
            outcome_a=self.outcome_a[mask],
            outcome_b=self.outcome_b[mask],
        )

    def for_pair(self, pair: UserPair) -> "CoincidenceLog":
        if pair not in self.pairs:
            return self.select(np.zeros(len(self), dtype=bool))
        return self.select(self.pair_index == self.pairs.index(pair))

    @classmethod
    def from_records(cls, records: Sequence[CoincidenceRecord]) -> "CoincidenceLog":
        pairs: List[UserPair] = []
        for record in records:
            if record.pair not in pairs:
                pairs.append(record.pair)
        return cls(
            pairs=tuple(pairs),
            slot=np.array([r.slot for r in records], dtype=np.int64),
            pair_index=np.array([pairs.index(r.pair) for r in records], dtype=np.int64),
            theta_a=np.array([r.theta_a for r in records], dtype=float),
            theta_b=np.array([r.theta_b for r in records], dtype=float),
            outcome_a=np.array([r.outcome_a for r in records], dtype=np.uint8),
            outcome_b=np.array([r.outcome_b for r in records], dtype=np.uint8),
        )

    @classmethod
    def concatenate(cls, logs: Sequence["CoincidenceLog"], slot_offsets: Sequence[int]) -> "CoincidenceLog":
        """
        Join logs of consecutive runs, shifting each run's slots by its offset.
        """
        pairs: List[UserPair] = []
        for log in logs:
            for pair in log.pairs:
                if pair not in pairs:
                    pairs.append(pair)
        if not logs:
            return cls()
        remapped = [
            np.array([pairs.index(p) for p in log.pairs], dtype=np.int64)[log.pair_index]
            if len(log) else np.zeros(0, dtype=np.int64)
            for log in logs
        ]
        return cls(
            pairs=tuple(pairs),
            slot=np.concatenate([log.slot + offset for log, offset in zip(logs, slot_offsets)]),
            pair_index=np.concatenate(remapped),
            theta_a=np.concatenate([log.theta_a for log in logs]),
            theta_b=np.concatenate([log.theta_b for log in logs]),
            outcome_a=np.concatenate([log.outcome_a for log in logs]),
            outcome_b=np.concatenate([log.outcome_b for log in logs]),
        )


class CountTable:
    """
    Coincidence counts per setting.

    Maps (theta_a_deg, theta_b_deg) to a 2x2 integer matrix
    N[outcome_a][outcome_b].
    """

    def __init__(self, counts: Optional[Dict[Tuple[float, float], np.ndarray]] = None):
        self._counts: Dict[Tuple[float, float], np.ndarray] = {}
        for key, matrix in (counts or {}).items():
            matrix = np.asarray(matrix, dtype=np.int64).reshape(2, 2)
            if np.any(matrix < 0):
                raise ValueError(f"Negative counts for setting {key}")
            self._counts[(angle_key(key[0]), angle_key(key[1]))] = matrix

    @classmethod
    def from_log(cls, log: CoincidenceLog) -> "CountTable":
        counts: Dict[Tuple[float, float], np.ndarray] = {}
        if not len(log):
            return cls()
        settings = np.stack([np.round(log.theta_a, ANGLE_KEY_DECIMALS),
                             np.round(log.theta_b, ANGLE_KEY_DECIMALS)], axis=1)
        unique, inverse = np.unique(settings, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        cell = log.outcome_a.astype(np.int64) * 2 + log.outcome_b.astype(np.int64)
        for k, (theta_a, theta_b) in enumerate(unique):
            matrix = np.bincount(cell[inverse == k], minlength=4).reshape(2, 2)
            counts[(float(theta_a), float(theta_b))] = matrix
        return cls(counts)

    def __contains__(self, key: Tuple[float, float]) -> bool:
        return (angle_key(key[0]), angle_key(key[1])) in self._counts

    def __getitem__(self, key: Tuple[float, float]) -> np.ndarray:
        return self._counts[(angle_key(key[0]), angle_key(key[1]))]

    def __len__(self) -> int:
        return len(self._counts)

    def keys(self) -> List[Tuple[float, float]]:
        return sorted(self._counts)

    def items(self) -> List[Tuple[Tuple[float, float], np.ndarray]]:
        return [(key, self._counts[key]) for key in self.keys()]

    def total(self) -> int:
        return int(sum(matrix.sum() for matrix in self._counts.values()))

    def restricted(self, keys: Iterable[Tuple[float, float]]) -> "CountTable":
        """Sub-table with only the given settings (missing ones are skipped)."""
        return CountTable({key: self[key] for key in keys if key in self})

    def map_counts(self, func) -> "CountTable":
        """Apply func to every count matrix, returning a new table."""
        return CountTable({key: func(matrix) for key, matrix in self._counts.items()})
