"""
Transport Interfaces

This module defines the channel contract, the party state machine driven by
a node and the exceptions of the classical message layer.

Channels are reliable and FIFO. Authentication of the classical channel is
assumed and not implemented.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Set

if TYPE_CHECKING:
    from .messages import Message

DEFAULT_TIMEOUT_S = 5.0


class MessageKind(str, Enum):
    """
    Kinds of protocol messages.
    """
    ANNOUNCE = "ANNOUNCE"    # Public secure-sum announcement x
    KEY_SYNC = "KEY_SYNC"    # Pad offset used on a ring edge
    CONTROL = "CONTROL"      # Session control, e.g. abort


class TransportError(Exception):
    """Base exception for transport errors."""
    pass


class ChannelClosedError(TransportError):
    """Raised when sending on, or reading from, a closed channel."""
    pass


class ReceiveTimeoutError(TransportError, TimeoutError):
    """Raised when no message arrives before the receive deadline."""
    pass


class FrameError(TransportError, ValueError):
    """Raised when a frame or payload cannot be decoded."""
    pass


class BroadcastError(TransportError):
    """
    Raised when a broadcast could not reach every peer.

    Attributes:
        failures: Peer identifier -> error for every failed delivery
    """

    def __init__(self, message: str, failures: Optional[Mapping[str, Exception]] = None):
        super().__init__(message)
        self.failures: Dict[str, Exception] = dict(failures or {})


class ProtocolViolationError(TransportError):
    """Raised when a peer breaks the message protocol."""
    pass


class PeerAbortError(ProtocolViolationError):
    """Raised when a peer announces that it aborted the session."""
    pass


class IncompleteRoundError(TransportError):
    """Raised when a round cannot complete because messages are missing."""
    pass


@dataclass(frozen=True)
class TranscriptEntry:
    """One state transition of a party."""

    round: int
    party: str
    source: str
    target: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"round={self.round} party={self.party} {self.source}->{self.target}"
        return f"{text} {self.detail}" if self.detail else text


class Channel(ABC):
    """
    One-directional reliable FIFO channel between two endpoints.

    A channel is safe for one producer and one consumer running concurrently.
    """

    source: str
    target: str

    @abstractmethod
    def send(self, message: "Message") -> int:
        """
        Enqueue a message.

        Args:
            message: Message to deliver

        Returns:
            int: Sequence number of the message on this channel

        Raises:
            ChannelClosedError: If the channel is closed
        """
        pass

    @abstractmethod
    def recv(self, timeout: Optional[float] = None) -> "Message":
        """
        Take the next message.

        Args:
            timeout: Seconds to wait; None blocks

        Returns:
            Message: The oldest undelivered message

        Raises:
            ReceiveTimeoutError: If nothing arrives in time
            ChannelClosedError: If the channel is closed and drained
        """
        pass

    @abstractmethod
    def close(self) -> None:
        pass

    @property
    @abstractmethod
    def closed(self) -> bool:
        pass


class PartyMachine(ABC):
    """
    Sequential state machine of one protocol party.

    A node feeds the machine the messages of its peers one at a time; the
    machine never touches channels itself.
    """

    @property
    @abstractmethod
    def party_id(self) -> str:
        pass

    @property
    @abstractmethod
    def peers(self) -> List[str]:
        """Other parties, in the order the node reads from them."""
        pass

    @property
    @abstractmethod
    def state(self) -> str:
        """Name of the current state."""
        pass

    @property
    @abstractmethod
    def is_terminal(self) -> bool:
        """True once the machine stopped in an error state."""
        pass

    @property
    @abstractmethod
    def transcript(self) -> List[TranscriptEntry]:
        pass

    @abstractmethod
    def begin_round(self, round_index: int) -> List["Message"]:
        """
        Start a round.

        Returns:
            List[Message]: Messages to broadcast to every peer
        """
        pass

    @abstractmethod
    def on_message(self, message: "Message") -> None:
        """
        Process one inbound message.

        Raises:
            ProtocolViolationError: If the message breaks the protocol
        """
        pass

    @abstractmethod
    def awaiting(self) -> Set[str]:
        """Peers whose messages for the current round are still missing."""
        pass

    @abstractmethod
    def fail(self, error: TransportError) -> None:
        """Move to the terminal error state matching the error."""
        pass
