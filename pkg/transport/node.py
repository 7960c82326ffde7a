"""
Node runtime: drives one party state machine over a session.

A node broadcasts what its machine emits at the start of a round, then reads
its peers' channels in ring order until the machine stops waiting. Messages
that arrive early for a later round are held back for that round.
"""

import logging
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Sequence

from .interfaces import (
    ChannelClosedError,
    IncompleteRoundError,
    MessageKind,
    PartyMachine,
    PeerAbortError,
    ProtocolViolationError,
    ReceiveTimeoutError,
    TranscriptEntry,
    TransportError,
)
from .messages import Message
from .session import Session

logger = logging.getLogger(__name__)

SCHEDULER_MODES = ("deterministic", "threaded")


@dataclass
class NodeOutcome:
    """Terminal state and transcript of one node."""

    party: str
    state: str
    transcript: List[TranscriptEntry] = field(default_factory=list)
    error: Optional[TransportError] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class Node:
    """Runtime of one party."""

    def __init__(self, machine: PartyMachine, session: Session, timeout: Optional[float] = None):
        if machine.party_id not in session.members:
            raise ValueError(f"{machine.party_id} is not a member of session {session.session_id}")
        self.machine = machine
        self.session = session
        self.timeout = session.timeout if timeout is None else timeout
        self.error: Optional[TransportError] = None
        self.round = 0
        self._held: Dict[str, Deque[Message]] = {peer: deque() for peer in machine.peers}

    @property
    def party(self) -> str:
        return self.machine.party_id

    def start_round(self, round_index: int) -> None:
        """Begin a round and broadcast the machine's messages."""
        if self.machine.is_terminal:
            return
        self.round = round_index
        try:
            for message in self.machine.begin_round(round_index):
                self.session.broadcast(message)
        except TransportError as e:
            self._fail(e)

    def collect_round(self, round_index: int) -> None:
        """Read peer messages until the round completes or fails."""
        if self.machine.is_terminal:
            return
        deadline = time.monotonic() + self.timeout
        try:
            for peer in self.machine.peers:
                while peer in self.machine.awaiting():
                    message = self._next(peer, max(0.0, deadline - time.monotonic()), round_index)
                    self._deliver(peer, message)
            self._drain(round_index)
        except TransportError as e:
            self._fail(e)

    def _next(self, peer: str, timeout: float, round_index: int) -> Message:
        if self._held[peer]:
            return self._held[peer].popleft()
        try:
            return self.session.recv(peer, self.party, timeout)
        except ReceiveTimeoutError as e:
            missing = ", ".join(sorted(self.machine.awaiting()))
            raise IncompleteRoundError(
                f"{self.party}: round {round_index} incomplete, no messages from {missing}"
            ) from e

    def _deliver(self, peer: str, message: Message) -> None:
        if message.sender != peer:
            raise ProtocolViolationError(
                f"{self.party}: message on the channel of {peer} claims sender {message.sender}"
            )
        self.machine.on_message(message)

    def _drain(self, round_index: int) -> None:
        """Inspect already delivered messages; later rounds are held back."""
        for peer in self.machine.peers:
            while True:
                try:
                    message = self.session.recv(peer, self.party, 0.0)
                except (ReceiveTimeoutError, ChannelClosedError):
                    break
                if message.round > round_index and message.kind is not MessageKind.CONTROL:
                    self._held[peer].append(message)
                else:
                    self._deliver(peer, message)

    def _fail(self, error: TransportError) -> None:
        self.error = error
        self.machine.fail(error)
        logger.warning("%s stopped in %s: %s", self.party, self.machine.state, error)
        if isinstance(error, ProtocolViolationError) and not isinstance(error, PeerAbortError):
            abort = Message.control(
                self.session.session_id, self.round, self.party, "abort", reason=str(error)
            )
            try:
                self.session.broadcast(abort)
            except TransportError as e:
                logger.warning("%s could not announce its abort: %s", self.party, e)

    def outcome(self) -> NodeOutcome:
        return NodeOutcome(
            party=self.party,
            state=self.machine.state,
            transcript=list(self.machine.transcript),
            error=self.error,
        )


def run_node(
    machine: PartyMachine,
    session: Session,
    rounds: int,
    timeout: Optional[float] = None
) -> NodeOutcome:
    """
    Run one party through rounds 1..rounds.

    Args:
        machine: Initialized party state machine
        session: Session holding the party's channels
        rounds: Number of rounds
        timeout: Per-round receive timeout (defaults to the session's)

    Returns:
        NodeOutcome with the terminal state and transcript
    """
    node = Node(machine, session, timeout)
    for round_index in range(1, rounds + 1):
        node.start_round(round_index)
        node.collect_round(round_index)
        if machine.is_terminal:
            break
    return node.outcome()


def run_nodes(
    machines: Sequence[PartyMachine],
    session: Session,
    rounds: int,
    mode: str = "deterministic",
    timeout: Optional[float] = None
) -> Dict[str, NodeOutcome]:
    """
    Run all parties of a session.

    In deterministic mode every round first lets all nodes announce in ring
    order and then lets them collect in ring order on the calling thread. In
    threaded mode each node runs on its own thread.

    Returns:
        Party identifier -> NodeOutcome
    """
    if mode not in SCHEDULER_MODES:
        raise ValueError(f"Unknown scheduler mode {mode!r}; choose from {', '.join(SCHEDULER_MODES)}")
    if mode == "threaded":
        with ThreadPoolExecutor(max_workers=len(machines)) as executor:
            futures = [executor.submit(run_node, machine, session, rounds, timeout) for machine in machines]
            outcomes = [future.result() for future in futures]
        return {outcome.party: outcome for outcome in outcomes}

    nodes = [Node(machine, session, timeout) for machine in machines]
    for round_index in range(1, rounds + 1):
        for node in nodes:
            node.start_round(round_index)
        for node in nodes:
            node.collect_round(round_index)
        if all(node.machine.is_terminal for node in nodes):
            break
    return {node.party: node.outcome() for node in nodes}
