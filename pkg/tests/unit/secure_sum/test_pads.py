"""
Tests for pads, announcements and aggregation.
"""

import numpy as np
import pytest

from secure_sum import (
    Announcement,
    KeyExhaustedError,
    KeyMaterial,
    PadKey,
    PadReuseError,
    ProtocolViolationError,
    RingTopology,
    aggregate,
    compute_announcement,
    derive_pad,
    ring_announcements,
)

HAND_VALUES = (1, 2, 3, 4)
HAND_PADS = (5, 9, 2, 14)


def test_ring_neighbors():
    ring = RingTopology(("A1", "B1", "A2", "B2"))
    assert ring.next("A1") == "B1"
    assert ring.prev("A1") == "B2"
    assert ring.next("B2") == "A1"
    assert ring.edges() == [("A1", "B1"), ("B1", "A2"), ("A2", "B2"), ("B2", "A1")]
    assert ring.peers("A2") == ["B2", "A1", "B1"]


def test_ring_needs_three_distinct_parties():
    with pytest.raises(ValueError):
        RingTopology(("A1", "B1"))
    with pytest.raises(ValueError):
        RingTopology(("A1", "B1", "A1"))


@pytest.mark.parametrize("bits, n, expected", [
    ([0] * 25, 25, 0),
    ([1] + [0] * 24, 25, 2 ** 24),
    ([1, 0, 1, 1], 4, 11),
])
def test_derive_pad_reads_big_endian(bits, n, expected):
    pad = derive_pad(KeyMaterial(bits), n, 0)
    assert pad.value == expected
    assert pad.bit_width == n
    assert not pad.consumed


def test_derive_pad_consumes_key_bits():
    key = KeyMaterial([1, 0, 1, 1, 0, 0, 1, 0], label="A1->B1")
    assert derive_pad(key, 4, 4).value == 2
    assert key.available == 4
    with pytest.raises(PadReuseError):
        derive_pad(key, 4, 4)
    with pytest.raises(PadReuseError):
        derive_pad(key, 4, 2)
    assert derive_pad(key, 4, 0).value == 11


def test_derive_pad_beyond_key():
    key = KeyMaterial([1] * 30, label="A1->B1")
    with pytest.raises(KeyExhaustedError) as excinfo:
        derive_pad(key, 25, 25)
    assert excinfo.value.required == 50
    assert excinfo.value.available == 30
    assert "A1->B1" in str(excinfo.value)


def test_equal_pads_reveal_input():
    assert compute_announcement(9, PadKey(6, 4), PadKey(6, 4), 4).x == 9


def test_announcement_wraps_around():
    assert compute_announcement(0, PadKey(0, 4), PadKey(1, 4), 4).x == 15


def test_hand_computed_ring():
    announcements = [
        compute_announcement(
            v, PadKey(HAND_PADS[i], 4), PadKey(HAND_PADS[i - 1], 4), 4, party=f"P{i}", round_index=1
        )
        for i, v in enumerate(HAND_VALUES)
    ]
    assert [a.x for a in announcements] == [8, 6, 12, 0]
    result = aggregate(announcements, 4)
    assert result.t == 10
    assert result.round == 1


def test_vectorized_matches_hand_computation():
    x = ring_announcements(np.array(HAND_VALUES), np.array(HAND_PADS), 4)
    assert x.tolist() == [8, 6, 12, 0]


def test_pads_are_single_use():
    pad_next, pad_prev = PadKey(3, 4), PadKey(5, 4)
    compute_announcement(1, pad_next, pad_prev, 4)
    assert pad_next.consumed and pad_prev.consumed
    with pytest.raises(PadReuseError):
        compute_announcement(1, pad_next, PadKey(2, 4), 4)
    shared = PadKey(2, 4)
    with pytest.raises(PadReuseError):
        compute_announcement(1, shared, shared, 4)


def test_announcement_arguments_checked():
    with pytest.raises(ValueError):
        compute_announcement(16, PadKey(0, 4), PadKey(0, 4), 4)
    with pytest.raises(ValueError):
        compute_announcement(1, PadKey(0, 5), PadKey(0, 4), 4)
    with pytest.raises(ValueError):
        PadKey(16, 4)


def test_aggregate_of_zeros():
    announcements = [Announcement(p, 1, 0) for p in "ABC"]
    assert aggregate(announcements, 8).t == 0


def test_aggregate_rejects_protocol_violations():
    with pytest.raises(ProtocolViolationError):
        aggregate([Announcement("A", 1, 1), Announcement("A", 1, 2), Announcement("B", 1, 3)], 4)
    with pytest.raises(ProtocolViolationError):
        aggregate([Announcement("A", 1, 1), Announcement("B", 2, 2)], 4)
    with pytest.raises(ProtocolViolationError):
        aggregate([Announcement("A", 1, 1), Announcement("B", 1, 2)], 4, parties=["A", "B", "C"])
    with pytest.raises(ProtocolViolationError):
        aggregate([Announcement("A", 1, 16)], 4)
    with pytest.raises(ProtocolViolationError):
        aggregate([], 4)


def test_telescoping_over_random_rings():
    rng = np.random.default_rng(42)
    for _ in range(10_000):
        parties = int(rng.integers(3, 11))
        n = int(rng.integers(1, 41))
        values = rng.integers(0, 1 << n, size=parties)
        pads = rng.integers(0, 1 << n, size=parties)
        x = ring_announcements(values, pads, n)
        assert (x >= 0).all() and (x < (1 << n)).all()
        assert int(x.sum()) % (1 << n) == int(values.sum()) % (1 << n)
