"""
Tests for protocol messages and the frame codec.
"""

import pytest
from pydantic import ValidationError

from transport import FrameError, Message, MessageKind, decode_frame, encode_frame


def test_announce_frame_is_bit_exact():
    frame = encode_frame(Message.announce("s1", 3, "A1", 42))
    body = b"session=s1\nround=3\nsender=A1\nkind=ANNOUNCE\nx=42\n"
    assert frame == len(body).to_bytes(4, "big") + body
    assert frame[:4] == b"\x00\x00\x00\x30"


def test_frame_decodes_to_same_message():
    message = Message.key_sync("s1", 2, "B1", "B1->A2", 25)
    decoded = decode_frame(encode_frame(message))
    assert decoded == message
    assert decoded.kind is MessageKind.KEY_SYNC
    assert decoded.fields() == {"edge": "B1->A2", "offset": "25"}


def test_control_reason_is_single_line():
    message = Message.control("s1", 1, "A1", reason="duplicate\nannouncement")
    assert message.fields() == {"action": "abort", "reason": "duplicate announcement"}


@pytest.mark.parametrize("kind, payload", [
    (MessageKind.ANNOUNCE, b""),
    (MessageKind.ANNOUNCE, b"x=-4\n"),
    (MessageKind.ANNOUNCE, b"x=4\ny=5\n"),
    (MessageKind.KEY_SYNC, b"edge=A1B1\noffset=0\n"),
    (MessageKind.CONTROL, b"action=restart\n"),
    (MessageKind.ANNOUNCE, b"x=4"),
])
def test_payload_schema_enforced(kind, payload):
    with pytest.raises(ValidationError):
        Message(session="s1", round=1, sender="A1", kind=kind, payload=payload)


def test_identifiers_validated():
    with pytest.raises(ValidationError):
        Message.announce("s 1", 1, "A1", 3)
    with pytest.raises(ValidationError):
        Message.announce("s1", 1, "A1=B1", 3)
    with pytest.raises(ValidationError):
        Message.announce("s1", -1, "A1", 3)


def test_truncated_frame_rejected():
    frame = encode_frame(Message.announce("s1", 1, "A1", 3))
    with pytest.raises(FrameError):
        decode_frame(frame[:-1])
    with pytest.raises(FrameError):
        decode_frame(frame[:3])


def test_non_canonical_frame_rejected():
    body = b"round=1\nsession=s1\nsender=A1\nkind=ANNOUNCE\nx=3\n"
    with pytest.raises(FrameError):
        decode_frame(len(body).to_bytes(4, "big") + body)
    body = b"session=s1\nround=01\nsender=A1\nkind=ANNOUNCE\nx=3\n"
    with pytest.raises(FrameError):
        decode_frame(len(body).to_bytes(4, "big") + body)


def test_unknown_kind_rejected():
    body = b"session=s1\nround=1\nsender=A1\nkind=HELLO\n"
    with pytest.raises(FrameError):
        decode_frame(len(body).to_bytes(4, "big") + body)
