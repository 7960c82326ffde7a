"""
Sessions: the full mesh of directed channels among a set of members.
"""

import logging
import re
import uuid
from typing import Dict, List, Optional, Sequence, Tuple

from .inprocess import InProcessChannel
from .interfaces import DEFAULT_TIMEOUT_S, BroadcastError, Channel, TransportError
from .messages import IDENTIFIER_PATTERN, Message
from .sockets import SocketChannel

logger = logging.getLogger(__name__)

TRANSPORTS = ("inprocess", "socket")


class Session:
    """
    Channel mesh of one protocol session.

    Attributes:
        session_id: Identifier stamped on every message
        members: Member identifiers in ring order
        transport: "inprocess" or "socket"
        timeout: Receive timeout per message, in seconds
    """

    def __init__(
        self,
        members: Sequence[str],
        transport: str = "inprocess",
        session_id: Optional[str] = None,
        timeout: float = DEFAULT_TIMEOUT_S
    ):
        members = [check_identifier(member) for member in members]
        if len(set(members)) != len(members):
            raise ValueError(f"Session members must be distinct: {members}")
        if transport not in TRANSPORTS:
            raise ValueError(f"Unknown transport {transport!r}; choose from {', '.join(TRANSPORTS)}")
        if timeout <= 0:
            raise ValueError(f"Timeout must be positive, got {timeout}")
        self.session_id = check_identifier(session_id or uuid.uuid4().hex[:12])
        self.members = members
        self.transport = transport
        self.timeout = timeout
        self._channels: Dict[Tuple[str, str], Channel] = {}
        for source in members:
            for target in members:
                if source != target:
                    self._channels[(source, target)] = self._open(source, target)
        logger.debug(
            "Session %s opened with %d members over %s", self.session_id, len(members), transport
        )

    def _open(self, source: str, target: str) -> Channel:
        if self.transport == "socket":
            return SocketChannel(source, target, timeout=self.timeout)
        return InProcessChannel(source, target)

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def peers(self, member: str) -> List[str]:
        return [other for other in self.members if other != member]

    def channel(self, source: str, target: str) -> Channel:
        try:
            return self._channels[(source, target)]
        except KeyError:
            raise KeyError(f"No channel {source}->{target} in session {self.session_id}") from None

    def send(self, source: str, target: str, message: Message) -> int:
        return self.channel(source, target).send(message)

    def recv(self, source: str, target: str, timeout: Optional[float] = None) -> Message:
        """Next message from source on target's inbound channel."""
        return self.channel(source, target).recv(self.timeout if timeout is None else timeout)

    def broadcast(self, message: Message) -> int:
        """
        Deliver a copy of the message to every other member.

        The in-process transport delivers to all peers or to none; the socket
        transport attempts every peer and reports the failed ones.

        Returns:
            int: Number of deliveries

        Raises:
            BroadcastError: If the session has fewer than 2 members or a
                delivery failed
        """
        if len(self.members) < 2:
            raise BroadcastError(f"Broadcast needs at least 2 members, session has {len(self.members)}")
        sender = message.sender
        if sender not in self.members:
            raise BroadcastError(f"{sender} is not a member of session {self.session_id}")
        channels = [self.channel(sender, peer) for peer in self.peers(sender)]

        if self.transport == "inprocess":
            closed = {channel.target: TransportError("channel closed") for channel in channels if channel.closed}
            if closed:
                raise BroadcastError(f"Broadcast from {sender} refused: closed channels", closed)

        failures: Dict[str, Exception] = {}
        for channel in channels:
            try:
                channel.send(message)
            except TransportError as e:
                failures[channel.target] = e
        if failures:
            raise BroadcastError(
                f"Broadcast from {sender} failed for {', '.join(sorted(failures))}", failures
            )
        return len(channels)

    def close(self) -> None:
        for channel in self._channels.values():
            if isinstance(channel, SocketChannel):
                channel.release()
            else:
                channel.close()


def check_identifier(value: str) -> str:
    """Validate a party or session identifier for the wire format."""
    if not isinstance(value, str) or not re.fullmatch(IDENTIFIER_PATTERN, value):
        raise ValueError(f"Identifier {value!r} may only hold letters, digits and _.:-")
    return value
