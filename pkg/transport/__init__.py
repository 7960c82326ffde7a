"""
Transport package.

Reliable FIFO channels (in-process queues or loopback TCP), sessions with a
broadcast primitive, and the node runtime that drives party state machines.
"""

from .interfaces import (
    DEFAULT_TIMEOUT_S,
    BroadcastError,
    Channel,
    ChannelClosedError,
    FrameError,
    IncompleteRoundError,
    MessageKind,
    PartyMachine,
    PeerAbortError,
    ProtocolViolationError,
    ReceiveTimeoutError,
    TranscriptEntry,
    TransportError,
)
from .messages import Message, decode_frame, encode_frame
from .inprocess import InProcessChannel
from .sockets import SocketChannel
from .session import TRANSPORTS, Session
from .node import Node, NodeOutcome, run_node, run_nodes

__all__ = [
    # Messages
    'Message',
    'MessageKind',
    'encode_frame',
    'decode_frame',

    # Channels and sessions
    'Channel',
    'InProcessChannel',
    'SocketChannel',
    'Session',
    'TRANSPORTS',
    'DEFAULT_TIMEOUT_S',

    # Node runtime
    'PartyMachine',
    'TranscriptEntry',
    'Node',
    'NodeOutcome',
    'run_node',
    'run_nodes',

    # Exceptions
    'TransportError',
    'ChannelClosedError',
    'ReceiveTimeoutError',
    'FrameError',
    'BroadcastError',
    'ProtocolViolationError',
    'PeerAbortError',
    'IncompleteRoundError',
]
