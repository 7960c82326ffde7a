"""
Hexadecimal key files.

A key file holds two lines, "bits=<count>" and "hex=<digits>"; the bits are
packed big-endian and zero-padded to whole bytes.
"""

from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .interfaces import as_bits


def bits_to_hex(bits: Sequence[int]) -> str:
    return np.packbits(as_bits(bits)).tobytes().hex()


def hex_to_bits(text: str, length: int) -> np.ndarray:
    raw = np.frombuffer(bytes.fromhex(text.strip()), dtype=np.uint8)
    bits = np.unpackbits(raw)
    if length > bits.size:
        raise ValueError(f"Hex string holds {bits.size} bits, {length} requested")
    return bits[:length].astype(np.uint8)


def export_key_hex(bits: Sequence[int], path: Union[str, Path]) -> Path:
    """Write a key file."""
    array = as_bits(bits)
    path = Path(path)
    path.write_text(f"bits={array.size}\nhex={bits_to_hex(array)}\n", encoding="utf-8")
    return path


def import_key_hex(path: Union[str, Path]) -> np.ndarray:
    """
    Read a key file.

    Raises:
        ValueError: If the file is malformed
    """
    fields = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"Malformed key file line: {line!r}")
        fields[key.strip()] = value.strip()
    if "bits" not in fields or "hex" not in fields:
        raise ValueError(f"Key file {path} needs bits= and hex= lines")
    return hex_to_bits(fields["hex"], int(fields["bits"]))
