"""
Protocol messages and their canonical wire encoding.

A frame is a 4-byte big-endian body length followed by the UTF-8 body

    session=<id>\nround=<int>\nsender=<id>\nkind=<KIND>\n<payload lines>

where the payload holds the kind-specific ``field=value`` lines, each
terminated by a newline (ANNOUNCE carries ``x=<decimal>``).
"""

import struct
from typing import Dict, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .interfaces import FrameError, MessageKind

FRAME_HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 1 << 20
IDENTIFIER_PATTERN = r"^[A-Za-z0-9_.:\-]+$"

HEADER_FIELDS = ("session", "round", "sender", "kind")

CONTROL_ACTIONS = ("abort",)

# Required and optional payload fields per kind
_PAYLOAD_SCHEMAS = {
    MessageKind.ANNOUNCE: (("x",), ()),
    MessageKind.KEY_SYNC: (("edge", "offset"), ()),
    MessageKind.CONTROL: (("action",), ("reason",)),
}


def encode_fields(fields: Mapping[str, object]) -> bytes:
    """Render field=value lines; values may not contain newlines."""
    lines = []
    for key, value in fields.items():
        text = str(value)
        if "\n" in text or "=" in key:
            raise FrameError(f"Field {key!r} cannot be encoded")
        lines.append(f"{key}={text}\n")
    return "".join(lines).encode("utf-8")


def parse_fields(payload: bytes) -> Dict[str, str]:
    """Parse field=value lines into an ordered dict."""
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as e:
        raise FrameError(f"Payload is not UTF-8: {e}") from e
    if text and not text.endswith("\n"):
        raise FrameError("Payload must end with a newline")
    fields: Dict[str, str] = {}
    for line in text.splitlines():
        key, sep, value = line.partition("=")
        if not sep or not key:
            raise FrameError(f"Malformed payload line: {line!r}")
        if key in fields:
            raise FrameError(f"Repeated payload field: {key}")
        fields[key] = value
    return fields


def _check_payload(kind: MessageKind, fields: Dict[str, str]) -> None:
    required, optional = _PAYLOAD_SCHEMAS[kind]
    missing = [key for key in required if key not in fields]
    unknown = [key for key in fields if key not in required and key not in optional]
    if missing or unknown:
        raise ValueError(f"{kind.value} payload has missing {missing} or unknown {unknown} fields")
    if kind is MessageKind.ANNOUNCE:
        if not fields["x"].isdigit():
            raise ValueError(f"Announcement x must be a non-negative decimal, got {fields['x']!r}")
    elif kind is MessageKind.KEY_SYNC:
        left, arrow, right = fields["edge"].partition("->")
        if not arrow or not left or not right:
            raise ValueError(f"Edge must read <party>-><party>, got {fields['edge']!r}")
        if not fields["offset"].isdigit():
            raise ValueError(f"Offset must be a non-negative decimal, got {fields['offset']!r}")
    elif fields["action"] not in CONTROL_ACTIONS:
        raise ValueError(f"Unknown control action: {fields['action']}")


class Message(BaseModel):
    """
    A protocol message.

    Attributes:
        session: Session identifier
        round: Protocol round
        sender: Identifier of the sending party
        kind: Message kind
        payload: Kind-specific field=value lines
    """

    model_config = ConfigDict(frozen=True)

    session: str = Field(pattern=IDENTIFIER_PATTERN)
    round: int = Field(ge=0)
    sender: str = Field(pattern=IDENTIFIER_PATTERN)
    kind: MessageKind
    payload: bytes = b""

    @model_validator(mode="after")
    def _validate_payload(self) -> "Message":
        try:
            fields = parse_fields(self.payload)
        except FrameError as e:
            raise ValueError(str(e)) from e
        _check_payload(self.kind, fields)
        return self

    def fields(self) -> Dict[str, str]:
        return parse_fields(self.payload)

    @classmethod
    def announce(cls, session: str, round_index: int, sender: str, x: int) -> "Message":
        return cls(session=session, round=round_index, sender=sender, kind=MessageKind.ANNOUNCE,
                   payload=encode_fields({"x": int(x)}))

    @classmethod
    def key_sync(cls, session: str, round_index: int, sender: str, edge: str, offset: int) -> "Message":
        return cls(session=session, round=round_index, sender=sender, kind=MessageKind.KEY_SYNC,
                   payload=encode_fields({"edge": edge, "offset": int(offset)}))

    @classmethod
    def control(
        cls, session: str, round_index: int, sender: str, action: str = "abort", reason: Optional[str] = None
    ) -> "Message":
        fields = {"action": action}
        if reason:
            fields["reason"] = " ".join(reason.split())
        return cls(session=session, round=round_index, sender=sender, kind=MessageKind.CONTROL,
                   payload=encode_fields(fields))


def encode_body(message: Message) -> bytes:
    header = encode_fields({
        "session": message.session,
        "round": message.round,
        "sender": message.sender,
        "kind": message.kind.value,
    })
    return header + message.payload


def encode_frame(message: Message) -> bytes:
    """Length-prefixed frame of a message."""
    body = encode_body(message)
    if len(body) > MAX_FRAME_BYTES:
        raise FrameError(f"Frame of {len(body)} bytes exceeds {MAX_FRAME_BYTES}")
    return FRAME_HEADER.pack(len(body)) + body


def frame_length(header: bytes) -> int:
    """Body length announced by a 4-byte frame header."""
    if len(header) != FRAME_HEADER.size:
        raise FrameError(f"Frame header needs {FRAME_HEADER.size} bytes, got {len(header)}")
    (length,) = FRAME_HEADER.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise FrameError(f"Frame of {length} bytes exceeds {MAX_FRAME_BYTES}")
    return length


def decode_body(body: bytes) -> Message:
    """
    Decode a frame body.

    Raises:
        FrameError: If the body is malformed or not in canonical form
    """
    fields = parse_fields(body)
    keys = list(fields)
    if keys[:len(HEADER_FIELDS)] != list(HEADER_FIELDS):
        raise FrameError(f"Frame must start with {', '.join(HEADER_FIELDS)}, got {keys[:4]}")
    payload = {key: fields[key] for key in keys[len(HEADER_FIELDS):]}
    try:
        message = Message(
            session=fields["session"],
            round=int(fields["round"]),
            sender=fields["sender"],
            kind=MessageKind(fields["kind"]),
            payload=encode_fields(payload),
        )
    except (ValidationError, ValueError) as e:
        raise FrameError(f"Invalid frame: {e}") from e
    if encode_body(message) != body:
        raise FrameError("Frame is not in canonical form")
    return message


def decode_frame(frame: bytes) -> Message:
    """Decode one complete length-prefixed frame."""
    length = frame_length(frame[:FRAME_HEADER.size])
    body = frame[FRAME_HEADER.size:]
    if len(body) != length:
        raise FrameError(f"Frame announces {length} body bytes, got {len(body)}")
    return decode_body(body)
