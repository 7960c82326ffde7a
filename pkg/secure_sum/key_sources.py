"""
Sources of the pairwise ring keys.

Keys come from seeded uniform bits (tests and quick runs), from a live E91
session per ring edge, from final keys already at hand, or from hex key
files written by an earlier run.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from qkd import FinalKey, export_key_hex, import_key_hex, run_qkd_session
from simulation import EndUser, NetworkConfig, Side

from .interfaces import Edge, KeyExhaustedError, KeySource, edge_label
from .pads import KeyMaterial

logger = logging.getLogger(__name__)

EdgeKeys = Dict[Edge, Tuple[KeyMaterial, KeyMaterial]]


def _copies(edge: Edge, left_bits, right_bits) -> Tuple[KeyMaterial, KeyMaterial]:
    label = edge_label(edge)
    return KeyMaterial(left_bits, label), KeyMaterial(right_bits, label)


def check_key_length(keys: EdgeKeys, bits_needed: int) -> None:
    """
    Raises:
        KeyExhaustedError: If any copy holds fewer than bits_needed bits
    """
    for edge, pair in keys.items():
        available = min(len(copy) for copy in pair)
        if available < bits_needed:
            raise KeyExhaustedError(bits_needed, available, edge_label(edge))


class SeededKeySource(KeySource):
    """Uniform random keys from a seeded generator."""

    name = "seeded"

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed

    def edge_keys(self, ring, bits_needed):
        rng = np.random.default_rng(self.seed)
        keys: EdgeKeys = {}
        for edge in ring.edges():
            bits = rng.integers(0, 2, size=bits_needed, dtype=np.uint8)
            keys[edge] = _copies(edge, bits, bits)
        return keys


def qkd_pair(edge: Edge) -> Tuple[EndUser, EndUser]:
    """
    Order a ring edge as (Alice-side user, Bob-side user).

    Raises:
        ValueError: If the edge does not join an A-side and a B-side user
    """
    users = [EndUser.parse(party) for party in edge]
    sides = {user.side for user in users}
    if sides != {Side.A, Side.B}:
        raise ValueError(f"Edge {edge_label(edge)} must join an A-side and a B-side user")
    return tuple(sorted(users, key=lambda user: user.side.value))


class QkdKeySource(KeySource):
    """
    One E91 session per ring edge.

    Ring parties must be end users ("A1", "B1", ...) and every edge must join
    the two sides of the network.
    """

    name = "qkd"

    def __init__(self, config: Optional[NetworkConfig] = None, seed: Optional[int] = None, **session_options: Any):
        self.config = config
        self.seed = seed
        self.session_options = session_options
        self.reports: Dict[Edge, Any] = {}

    def edge_keys(self, ring, bits_needed):
        edges = ring.edges()
        seeds = np.random.SeedSequence(self.seed).spawn(len(edges))
        keys: EdgeKeys = {}
        for edge, child in zip(edges, seeds):
            pair = qkd_pair(edge)
            final_a, final_b, report = run_qkd_session(
                pair, self.config, seed=int(child.generate_state(1)[0]), **self.session_options
            )
            self.reports[edge] = report
            by_user = {str(pair[0]): final_a, str(pair[1]): final_b}
            keys[edge] = _copies(edge, by_user[edge[0]].bits, by_user[edge[1]].bits)
            logger.info("Key for %s: %d bits", edge_label(edge), len(final_a))
        return keys


class FinalKeySource(KeySource):
    """Keys already distilled, given per edge as (left copy, right copy)."""

    name = "final"

    def __init__(self, keys: Mapping[Edge, Tuple[FinalKey, FinalKey]]):
        self.keys = dict(keys)

    def edge_keys(self, ring, bits_needed):
        keys: EdgeKeys = {}
        for edge in ring.edges():
            if edge not in self.keys:
                raise KeyExhaustedError(bits_needed, 0, edge_label(edge))
            left, right = self.keys[edge]
            keys[edge] = _copies(edge, left.bits, right.bits)
        return keys


def key_file_name(edge: Edge, holder: str) -> str:
    return f"{edge[0]}-{edge[1]}.{holder}.key"


class KeyFileSource(KeySource):
    """
    Hex key files in one directory, named <left>-<right>.<holder>.key.
    """

    name = "files"

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def edge_keys(self, ring, bits_needed):
        keys: EdgeKeys = {}
        for edge in ring.edges():
            left = import_key_hex(self.directory / key_file_name(edge, edge[0]))
            right = import_key_hex(self.directory / key_file_name(edge, edge[1]))
            keys[edge] = _copies(edge, left, right)
        return keys


def write_key_files(keys: EdgeKeys, directory: Union[str, Path]) -> Dict[Edge, Tuple[Path, Path]]:
    """Store edge keys in the layout read by KeyFileSource."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = {}
    for edge, (left, right) in keys.items():
        written[edge] = (
            export_key_hex(left.bits, directory / key_file_name(edge, edge[0])),
            export_key_hex(right.bits, directory / key_file_name(edge, edge[1])),
        )
    return written


def key_source_from_name(name: str, seed: Optional[int] = None, config: Optional[NetworkConfig] = None,
                         directory: Optional[Union[str, Path]] = None) -> KeySource:
    """Build a key source by name (seeded, qkd, files)."""
    if name == "seeded":
        return SeededKeySource(seed)
    if name == "qkd":
        return QkdKeySource(config, seed)
    if name == "files":
        if directory is None:
            raise ValueError("The files key source needs a directory")
        return KeyFileSource(directory)
    raise ValueError(f"Unknown key source: {name}")
