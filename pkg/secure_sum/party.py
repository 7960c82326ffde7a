"""
Secure-sum party state machine.

Per round a party moves KEYED -> ANNOUNCED -> DONE: it cuts the pads of its
two ring edges at offset (round - 1) * n, broadcasts the offset of its
clockwise edge (KEY_SYNC) and its announcement (ANNOUNCE), and computes the
sum once every peer's announcement arrived.
"""

import logging
from typing import Dict, List, Optional, Set

from transport import (
    IncompleteRoundError,
    Message,
    MessageKind,
    PartyMachine,
    PeerAbortError,
    TranscriptEntry,
    TransportError,
)
from utils.metrics import ANNOUNCEMENTS

from .interfaces import Announcement, PartyState, ProtocolViolationError, RingTopology, SumResult, edge_label
from .pads import KeyMaterial, aggregate, compute_announcement, derive_pad

logger = logging.getLogger(__name__)

_TERMINAL = (PartyState.VIOLATION, PartyState.INCOMPLETE)


class SecureSumParty(PartyMachine):
    """
    One ring party.

    Args:
        party: Own identifier
        ring: Ring topology
        value: Private input v, in [0, 2^n)
        n: Bit width
        next_key: Key shared with the clockwise neighbor
        prev_key: Key shared with the counter-clockwise neighbor
        session_id: Session identifier expected on every message
    """

    def __init__(
        self,
        party: str,
        ring: RingTopology,
        value: int,
        n: int,
        next_key: KeyMaterial,
        prev_key: KeyMaterial,
        session_id: str
    ):
        if not 0 <= value < (1 << n):
            raise ValueError(f"Input {value} of {party} outside [0, 2^{n})")
        ring.index(party)
        self._party = party
        self.ring = ring
        self.value = value
        self.n = n
        self.next_key = next_key
        self.prev_key = prev_key
        self.session_id = session_id
        self._state = PartyState.KEYED
        self._transcript: List[TranscriptEntry] = []
        self.round = 0
        self.announcements: List[Announcement] = []
        self.results: List[SumResult] = []
        self._received: Dict[str, Announcement] = {}
        self._synced: Optional[int] = None
        self.error: Optional[TransportError] = None

    @property
    def party_id(self) -> str:
        return self._party

    @property
    def peers(self) -> List[str]:
        return self.ring.peers(self._party)

    @property
    def state(self) -> str:
        return self._state.value

    @property
    def is_terminal(self) -> bool:
        return self._state in _TERMINAL

    @property
    def transcript(self) -> List[TranscriptEntry]:
        return self._transcript

    def offset(self, round_index: int) -> int:
        return (round_index - 1) * self.n

    def _move(self, target: PartyState, detail: str = "") -> None:
        self._transcript.append(TranscriptEntry(
            round=self.round, party=self._party, source=self._state.value, target=target.value, detail=detail
        ))
        self._state = target

    def begin_round(self, round_index: int) -> List[Message]:
        if self.is_terminal:
            raise ProtocolViolationError(f"{self._party} already stopped in {self.state}")
        if round_index != self.round + 1:
            raise ProtocolViolationError(f"{self._party} cannot start round {round_index} after {self.round}")
        if self._state is PartyState.DONE:
            self.round = round_index
            self._move(PartyState.KEYED)
        elif self._state is PartyState.KEYED:
            self.round = round_index
        else:
            raise ProtocolViolationError(f"{self._party} cannot start a round in state {self.state}")

        offset = self.offset(round_index)
        pad_next = derive_pad(self.next_key, self.n, offset)
        pad_prev = derive_pad(self.prev_key, self.n, offset)
        own = compute_announcement(self.value, pad_next, pad_prev, self.n, self._party, round_index)
        self.announcements.append(own)
        self._received = {self._party: own}
        self._synced = None
        self._move(PartyState.ANNOUNCED, f"x={own.x}")
        ANNOUNCEMENTS.inc()

        clockwise = edge_label((self._party, self.ring.next(self._party)))
        return [
            Message.key_sync(self.session_id, round_index, self._party, clockwise, offset),
            Message.announce(self.session_id, round_index, self._party, own.x),
        ]

    def awaiting(self) -> Set[str]:
        if self._state is not PartyState.ANNOUNCED:
            return set()
        return set(self.peers) - set(self._received)

    def on_message(self, message: Message) -> None:
        if message.session != self.session_id:
            raise ProtocolViolationError(f"{self._party}: message of foreign session {message.session}")
        if message.sender not in self.ring.parties or message.sender == self._party:
            raise ProtocolViolationError(f"{self._party}: unknown sender {message.sender}")
        if message.kind is MessageKind.CONTROL:
            reason = message.fields().get("reason", "")
            raise PeerAbortError(f"{self._party}: {message.sender} aborted the session {reason}".rstrip())
        if message.round != self.round:
            raise ProtocolViolationError(
                f"{self._party}: {message.kind.value} of round {message.round} from {message.sender} "
                f"during round {self.round}"
            )
        if message.kind is MessageKind.KEY_SYNC:
            self._on_key_sync(message)
        else:
            self._on_announce(message)

    def _on_key_sync(self, message: Message) -> None:
        fields = message.fields()
        left, _, right = fields["edge"].partition("->")
        if left != message.sender or right not in self.ring.parties or self.ring.next(left) != right:
            raise ProtocolViolationError(f"{self._party}: {message.sender} syncs foreign edge {fields['edge']}")
        if right != self._party:
            return
        offset = int(fields["offset"])
        if offset != self.offset(self.round):
            raise ProtocolViolationError(
                f"{self._party}: pad offset mismatch on {fields['edge']}: {offset} != {self.offset(self.round)}"
            )
        self._synced = offset

    def _on_announce(self, message: Message) -> None:
        sender = message.sender
        if self._state is not PartyState.ANNOUNCED or sender in self._received:
            raise ProtocolViolationError(f"{self._party}: duplicate announcement from {sender} in round {self.round}")
        if sender == self.ring.prev(self._party) and self._synced is None:
            raise ProtocolViolationError(f"{self._party}: announcement of {sender} before its key sync")
        self._received[sender] = Announcement(party=sender, round=self.round, x=int(message.fields()["x"]))
        if not self.awaiting():
            result = aggregate(self._received.values(), self.n, self.ring.parties)
            self.results.append(result)
            self._move(PartyState.DONE, f"t={result.t}")
            logger.debug("%s: round %d sum %d", self._party, self.round, result.t)

    def fail(self, error: TransportError) -> None:
        self.error = error
        target = PartyState.INCOMPLETE if isinstance(error, IncompleteRoundError) else PartyState.VIOLATION
        self._move(target, str(error))
