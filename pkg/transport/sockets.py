"""
Loopback TCP transport.

Each directed channel owns one TCP connection on 127.0.0.1 carrying
length-prefixed frames.
"""

import logging
import socket
import threading
import time
from typing import Optional, Tuple

from utils.metrics import FRAMES_SENT

from .interfaces import Channel, ChannelClosedError, ReceiveTimeoutError
from .messages import FRAME_HEADER, Message, decode_body, encode_frame, frame_length

logger = logging.getLogger(__name__)

LOOPBACK = "127.0.0.1"
_RECV_CHUNK = 65536


def connected_pair(host: str = LOOPBACK, timeout: float = 5.0) -> Tuple[socket.socket, socket.socket]:
    """
    Open one TCP connection on the loopback interface.

    Returns:
        (sending socket, receiving socket)
    """
    with socket.create_server((host, 0)) as server:
        server.settimeout(timeout)
        sender = socket.create_connection(server.getsockname()[:2], timeout=timeout)
        receiver, _ = server.accept()
    sender.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    sender.settimeout(timeout)
    return sender, receiver


class SocketChannel(Channel):
    """Directed channel over a loopback TCP connection."""

    transport = "socket"

    def __init__(self, source: str, target: str, timeout: float = 5.0):
        self.source = source
        self.target = target
        self._sender, self._receiver = connected_pair(timeout=timeout)
        self._buffer = bytearray()
        self._send_lock = threading.Lock()
        self._closed = False
        self._sent = 0

    @property
    def closed(self) -> bool:
        return self._closed

    @property
    def address(self) -> Tuple[str, int]:
        """Local address of the receiving end."""
        return self._receiver.getsockname()[:2]

    def send(self, message: Message) -> int:
        frame = encode_frame(message)
        with self._send_lock:
            if self._closed:
                raise ChannelClosedError(f"Channel {self.source}->{self.target} is closed")
            try:
                self._sender.sendall(frame)
            except OSError as e:
                raise ChannelClosedError(f"Send on {self.source}->{self.target} failed: {e}") from e
            self._sent += 1
            sequence = self._sent
        FRAMES_SENT.labels(transport=self.transport).inc()
        return sequence

    def _frame_in_buffer(self) -> Optional[bytes]:
        if len(self._buffer) < FRAME_HEADER.size:
            return None
        length = frame_length(bytes(self._buffer[:FRAME_HEADER.size]))
        end = FRAME_HEADER.size + length
        if len(self._buffer) < end:
            return None
        body = bytes(self._buffer[FRAME_HEADER.size:end])
        del self._buffer[:end]
        return body

    def recv(self, timeout: Optional[float] = None) -> Message:
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            body = self._frame_in_buffer()
            if body is not None:
                return decode_body(body)
            # past the deadline the socket is polled without blocking
            remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
            try:
                self._receiver.settimeout(remaining)
                chunk = self._receiver.recv(_RECV_CHUNK)
            except (socket.timeout, BlockingIOError):
                raise ReceiveTimeoutError(
                    f"No message on {self.source}->{self.target} within {timeout} s"
                ) from None
            except OSError as e:
                raise ChannelClosedError(f"Channel {self.source}->{self.target} failed: {e}") from e
            if not chunk:
                raise ChannelClosedError(f"Channel {self.source}->{self.target} is closed")
            self._buffer.extend(chunk)

    def close(self) -> None:
        with self._send_lock:
            if self._closed:
                return
            self._closed = True
            try:
                self._sender.shutdown(socket.SHUT_WR)
            except OSError:
                pass
            self._sender.close()
        logger.debug("Closed socket channel %s->%s", self.source, self.target)

    def release(self) -> None:
        """Close both sockets after the reader is done."""
        self.close()
        self._receiver.close()
