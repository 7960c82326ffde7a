"""
In-process reference transport.

Every channel is a thread-safe FIFO queue of encoded frames, so messages
take the same codec path as on the socket transport.
"""

import logging
import queue
import threading
from typing import Optional

from utils.metrics import FRAMES_SENT

from .interfaces import Channel, ChannelClosedError, ReceiveTimeoutError
from .messages import Message, decode_frame, encode_frame

logger = logging.getLogger(__name__)

_CLOSED = object()


class InProcessChannel(Channel):
    """Unbounded in-memory channel."""

    transport = "inprocess"

    def __init__(self, source: str, target: str):
        self.source = source
        self.target = target
        self._queue: "queue.Queue" = queue.Queue()
        self._lock = threading.Lock()
        self._closed = False
        self._sent = 0

    @property
    def closed(self) -> bool:
        return self._closed

    def send(self, message: Message) -> int:
        frame = encode_frame(message)
        with self._lock:
            if self._closed:
                raise ChannelClosedError(f"Channel {self.source}->{self.target} is closed")
            self._sent += 1
            sequence = self._sent
            self._queue.put(frame)
        FRAMES_SENT.labels(transport=self.transport).inc()
        return sequence

    def recv(self, timeout: Optional[float] = None) -> Message:
        try:
            item = self._queue.get(timeout=timeout) if timeout is None or timeout > 0 else self._queue.get_nowait()
        except queue.Empty:
            if self._closed:
                raise ChannelClosedError(f"Channel {self.source}->{self.target} is closed") from None
            raise ReceiveTimeoutError(
                f"No message on {self.source}->{self.target} within {timeout} s"
            ) from None
        if item is _CLOSED:
            # keep the marker for later readers
            self._queue.put(_CLOSED)
            raise ChannelClosedError(f"Channel {self.source}->{self.target} is closed")
        return decode_frame(item)

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            self._queue.put(_CLOSED)
        logger.debug("Closed channel %s->%s", self.source, self.target)
