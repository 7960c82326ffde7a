"""
Secure-sum protocol runs over a transport session.
"""

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from transport import (
    DEFAULT_TIMEOUT_S,
    IncompleteRoundError,
    NodeOutcome,
    PeerAbortError,
    Session,
    run_nodes,
)
from utils.metrics import SECURE_SUM_ROUNDS

from .interfaces import Announcement, KeySource, PartyState, ProtocolViolationError, RingTopology, SumResult
from .key_sources import SeededKeySource, check_key_length
from .party import SecureSumParty

logger = logging.getLogger(__name__)

DEFAULT_BIT_WIDTH = 25
DEFAULT_ROUNDS = 30

# Inputs of the four-party demonstration; they sum to 4,000,000
DEMO_RING = ("A1", "B1", "A2", "B2")
DEMO_INPUTS = (55406, 116559, 988150, 2839885)

ANNOUNCEMENT_COLUMNS = ["round", "party", "x"]
SUM_COLUMNS = ["round", "t"]


@dataclass
class ProtocolRun:
    """Announcements, sums and node outcomes of a protocol run."""

    ring: RingTopology
    n: int
    rounds: int
    session_id: str
    announcements: List[Announcement] = field(default_factory=list)
    results: List[SumResult] = field(default_factory=list)
    outcomes: Dict[str, NodeOutcome] = field(default_factory=dict)
    wraparound: bool = False

    def sums(self) -> List[int]:
        return [result.t for result in self.results]

    def announcements_csv(self) -> str:
        """CSV round,party,x in round and ring order."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(ANNOUNCEMENT_COLUMNS)
        for a in self.announcements:
            writer.writerow([a.round, a.party, a.x])
        return buffer.getvalue()

    def sums_csv(self) -> str:
        """CSV round,t."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(SUM_COLUMNS)
        for result in self.results:
            writer.writerow([result.round, result.t])
        return buffer.getvalue()


def _raise_for_outcomes(outcomes: Dict[str, NodeOutcome]) -> None:
    failed = [outcome for outcome in outcomes.values() if outcome.error is not None]
    if not failed:
        return
    # report the node that detected the problem, not the peers it aborted
    first = next((o for o in failed if not isinstance(o.error, PeerAbortError)), failed[0])
    if first.state == PartyState.INCOMPLETE.value:
        raise IncompleteRoundError(str(first.error)) from first.error
    raise ProtocolViolationError(str(first.error)) from first.error


def run_protocol(
    ring: RingTopology,
    inputs: Sequence[int],
    n: int = DEFAULT_BIT_WIDTH,
    rounds: int = DEFAULT_ROUNDS,
    key_source: Optional[KeySource] = None,
    transport: str = "inprocess",
    mode: str = "deterministic",
    session_id: Optional[str] = None,
    timeout: float = DEFAULT_TIMEOUT_S
) -> ProtocolRun:
    """
    Run the secure sum for several rounds.

    Every round uses fresh n-bit pads on every ring edge; all parties
    broadcast their announcement and aggregate the sum independently.

    Args:
        ring: Ring of parties
        inputs: Private input of each party, in ring order
        n: Bit width of inputs, pads and sums
        rounds: Number of rounds
        key_source: Source of the edge keys (seeded pads by default)
        transport: "inprocess" or "socket"
        mode: "deterministic" or "threaded" node scheduling
        session_id: Session identifier (random by default)
        timeout: Receive timeout per round, in seconds

    Returns:
        ProtocolRun

    Raises:
        ValueError: If inputs do not match the ring or do not fit n bits
        KeyExhaustedError: If an edge key is shorter than rounds * n bits
        ProtocolViolationError: If a party detected a protocol violation or
            the parties disagree on a sum
        IncompleteRoundError: If a round could not complete
    """
    inputs = [int(v) for v in inputs]
    if len(inputs) != len(ring):
        raise ValueError(f"{len(inputs)} inputs for a ring of {len(ring)} parties")
    if n < 1 or rounds < 1:
        raise ValueError(f"Bit width and rounds must be >= 1, got n={n}, rounds={rounds}")
    for party, value in zip(ring.parties, inputs):
        if not 0 <= value < (1 << n):
            raise ValueError(f"Input {value} of {party} outside [0, 2^{n})")
    total = sum(inputs)
    wraparound = total >= (1 << n)
    if wraparound:
        logger.warning(
            "Inputs sum to %d >= 2^%d; every round yields the sum modulo 2^%d = %d",
            total, n, n, total % (1 << n)
        )

    source = key_source or SeededKeySource()
    bits_needed = rounds * n
    keys = source.edge_keys(ring, bits_needed)
    check_key_length(keys, bits_needed)

    with Session(ring.parties, transport=transport, session_id=session_id, timeout=timeout) as session:
        machines = []
        for party, value in zip(ring.parties, inputs):
            next_edge = (party, ring.next(party))
            prev_edge = (ring.prev(party), party)
            machines.append(SecureSumParty(
                party, ring, value, n,
                next_key=keys[next_edge][0],
                prev_key=keys[prev_edge][1],
                session_id=session.session_id,
            ))
        outcomes = run_nodes(machines, session, rounds, mode=mode, timeout=timeout)
        run = ProtocolRun(ring=ring, n=n, rounds=rounds, session_id=session.session_id,
                          outcomes=outcomes, wraparound=wraparound)

    _raise_for_outcomes(outcomes)
    reference = machines[0].results
    for machine in machines[1:]:
        if [r.t for r in machine.results] != [r.t for r in reference]:
            raise ProtocolViolationError(f"{machine.party_id} disagrees on the sums")
    if len(reference) != rounds:
        raise IncompleteRoundError(f"Only {len(reference)} of {rounds} rounds completed")

    for round_index in range(rounds):
        for machine in machines:
            run.announcements.append(machine.announcements[round_index])
        run.results.append(reference[round_index])
        SECURE_SUM_ROUNDS.inc()
        logger.info("Round %d: t = %d", round_index + 1, reference[round_index].t)
    return run


def demo_ring() -> RingTopology:
    return RingTopology(DEMO_RING)
