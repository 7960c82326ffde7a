"""
Tests for multi-round secure-sum runs.
"""

import logging

import numpy as np
import pytest

from qkd import FinalKey
from secure_sum import (
    DEMO_INPUTS,
    FinalKeySource,
    KeyExhaustedError,
    RingTopology,
    SeededKeySource,
    demo_ring,
    run_protocol,
)
from utils.metrics import REGISTRY


def test_demo_inputs_sum_to_four_million_every_round():
    run = run_protocol(demo_ring(), DEMO_INPUTS, n=25, rounds=30, key_source=SeededKeySource(7))
    assert run.sums() == [4_000_000] * 30
    assert [r.round for r in run.results] == list(range(1, 31))
    assert len(run.announcements) == 120
    assert {o.state for o in run.outcomes.values()} == {"DONE"}
    a1 = [a.x for a in run.announcements if a.party == "A1"]
    assert len(set(a1)) > 1
    assert all(0 <= a.x < 2 ** 25 for a in run.announcements)


def test_zero_inputs_still_vary_announcements():
    run = run_protocol(demo_ring(), (0, 0, 0, 0), n=25, rounds=10, key_source=SeededKeySource(8))
    assert run.sums() == [0] * 10
    assert len({a.x for a in run.announcements}) > 4


def test_five_party_ring():
    rng = np.random.default_rng(9)
    inputs = rng.integers(0, 2 ** 20, size=5).tolist()
    ring = RingTopology(("A1", "B1", "A2", "B2", "A3"))
    run = run_protocol(ring, inputs, n=25, rounds=5, key_source=SeededKeySource(10))
    assert run.sums() == [sum(inputs)] * 5


def test_sum_wraps_modulo_two_to_the_n(caplog):
    with caplog.at_level(logging.WARNING, logger="secure_sum.protocol"):
        run = run_protocol(RingTopology(("P1", "P2", "P3", "P4")), (8, 7, 6, 5), n=4, rounds=3,
                           key_source=SeededKeySource(11))
    assert run.sums() == [10, 10, 10]
    assert run.wraparound
    assert "modulo" in caplog.text


@pytest.mark.parametrize("transport, mode", [("socket", "deterministic"), ("inprocess", "threaded")])
def test_transports_and_modes_agree(transport, mode):
    reference = run_protocol(demo_ring(), DEMO_INPUTS, rounds=5, key_source=SeededKeySource(12))
    other = run_protocol(demo_ring(), DEMO_INPUTS, rounds=5, key_source=SeededKeySource(12),
                         transport=transport, mode=mode)
    assert other.announcements_csv() == reference.announcements_csv()
    assert other.sums_csv() == reference.sums_csv()


def test_runs_are_reproducible():
    runs = [
        run_protocol(demo_ring(), DEMO_INPUTS, rounds=4, key_source=SeededKeySource(13), session_id="fixed")
        for _ in range(2)
    ]
    assert runs[0].announcements_csv() == runs[1].announcements_csv()
    assert runs[0].outcomes["B2"].transcript == runs[1].outcomes["B2"].transcript


def test_csv_layouts():
    run = run_protocol(demo_ring(), DEMO_INPUTS, rounds=2, key_source=SeededKeySource(14))
    announcements = run.announcements_csv().splitlines()
    assert announcements[0] == "round,party,x"
    assert [line.split(",")[:2] for line in announcements[1:5]] == [["1", p] for p in ("A1", "B1", "A2", "B2")]
    assert run.sums_csv() == "round,t\n1,4000000\n2,4000000\n"


def test_short_keys_are_exhausted():
    ring = demo_ring()
    short = FinalKey(bits=np.ones(100, dtype=np.uint8), security_param=300)
    source = FinalKeySource({edge: (short, short) for edge in ring.edges()})
    with pytest.raises(KeyExhaustedError) as excinfo:
        run_protocol(ring, DEMO_INPUTS, n=25, rounds=30, key_source=source)
    assert excinfo.value.required == 750
    assert excinfo.value.available == 100


def test_inputs_checked():
    with pytest.raises(ValueError):
        run_protocol(demo_ring(), (1, 2, 3), rounds=1)
    with pytest.raises(ValueError):
        run_protocol(demo_ring(), (1, 2, 3, 2 ** 25), rounds=1)


def test_round_metrics():
    before = REGISTRY.get_sample_value("entnet_secure_sum_rounds_total") or 0.0
    run_protocol(demo_ring(), DEMO_INPUTS, rounds=3, key_source=SeededKeySource(15))
    assert REGISTRY.get_sample_value("entnet_secure_sum_rounds_total") == before + 3
