"""
Tests for sifting, the CHSH security check and QBER estimation.
"""

import math

import numpy as np
import pytest

from analysis import CHSH_KEYS, IncompleteDataError
from qkd import (
    QberThresholdExceededError,
    SiftedKey,
    chsh_security_check,
    estimate_qber,
    sift,
)
from simulation import (
    CoincidenceLog,
    CoincidenceRecord,
    E91Policy,
    RoutingSchedule,
    ideal_network_config,
    parse_pair,
    run_slots,
    werner_network_config,
)

PAIR = parse_pair("A2B3")


def e91_log(config, n_slots, seed):
    log, _ = run_slots(config, RoutingSchedule.single(PAIR, n_slots), E91Policy(), n_slots, seed=seed)
    return log


def test_sift_excludes_mismatched_settings():
    records = [
        CoincidenceRecord(0, PAIR, 0.0, 22.5, 0, 0),
        CoincidenceRecord(1, PAIR, 22.5, 22.5, 1, 1),
        CoincidenceRecord(2, PAIR, 45.0, 45.0, 0, 1),
        CoincidenceRecord(3, PAIR, 45.0, 67.5, 1, 1),
    ]
    key_a, key_b = sift(CoincidenceLog.from_records(records))
    assert key_a.source_slots.tolist() == [1, 2]
    assert key_a.bits.tolist() == [1, 0]
    assert key_b.bits.tolist() == [1, 1]


def test_sift_fraction_is_two_ninths():
    log = e91_log(ideal_network_config(), 100_000, seed=1)
    key_a, key_b = sift(log)
    assert len(log) == 100_000
    assert len(key_a) / len(log) == pytest.approx(2 / 9, abs=0.005)
    assert np.array_equal(key_a.source_slots, key_b.source_slots)


def test_noiseless_keys_identical():
    key_a, key_b = sift(e91_log(ideal_network_config(), 20_000, seed=2))
    assert len(key_a) > 0
    assert np.array_equal(key_a.bits, key_b.bits)


def test_sifted_key_invariants():
    with pytest.raises(ValueError):
        SiftedKey([0, 1], [3])
    with pytest.raises(ValueError):
        SiftedKey([0, 1], [3, 3])
    key = SiftedKey([0, 1, 1, 0], [1, 4, 6, 9])
    trimmed = key.without([1, 3])
    assert trimmed.bits.tolist() == [0, 1]
    assert trimmed.source_slots.tolist() == [1, 6]


def test_qber_identical_keys():
    bits = np.random.default_rng(3).integers(0, 2, 1000)
    key = SiftedKey(bits, np.arange(1000))
    report = estimate_qber(key, key, seed=4)
    assert report.gamma == 0.0
    assert report.sample_size == 200
    assert len(set(report.disclosed_positions.tolist())) == 200


def test_qber_complement_aborts():
    bits = np.random.default_rng(5).integers(0, 2, 500)
    key_a = SiftedKey(bits, np.arange(500))
    key_b = SiftedKey(1 - bits, np.arange(500))
    with pytest.raises(QberThresholdExceededError) as excinfo:
        estimate_qber(key_a, key_b, seed=6)
    assert excinfo.value.gamma == 1.0
    assert excinfo.value.stage == "qber"
    assert estimate_qber(key_a, key_b, seed=6, threshold=None).gamma == 1.0


def test_qber_preconditions():
    short = SiftedKey([0] * 10, np.arange(10))
    with pytest.raises(ValueError):
        estimate_qber(short, short)
    with pytest.raises(ValueError):
        estimate_qber(SiftedKey([0] * 60, np.arange(60)), SiftedKey([0] * 70, np.arange(70)))


def test_qber_of_werner_source_at_measured_fidelity():
    key_a, key_b = sift(e91_log(werner_network_config(0.9), 60_000, seed=7))
    key_a, key_b = key_a.truncate(12_000), key_b.truncate(12_000)
    assert len(key_a) == 12_000
    report = estimate_qber(key_a, key_b, seed=8)
    assert report.gamma == pytest.approx(0.05, abs=0.01)


@pytest.mark.parametrize("p", [0.8, 0.9, 1.0])
def test_qber_converges_to_werner_prediction(p):
    key_a, key_b = sift(e91_log(werner_network_config(p), 90_000, seed=int(100 * p)))
    report = estimate_qber(key_a, key_b, fraction=1.0, seed=9, threshold=None)
    expected = (1 - p) / 2
    sigma = math.sqrt(expected * (1 - expected) / report.sample_size)
    assert abs(report.gamma - expected) <= 3 * sigma


def test_chsh_check_passes_for_ideal_source():
    estimate = chsh_security_check(e91_log(ideal_network_config(), 100_000, seed=10), seed=11)
    assert estimate.s_value == pytest.approx(2 * math.sqrt(2), abs=0.05)
    assert estimate.violates()


def test_chsh_check_fails_for_noisy_source():
    estimate = chsh_security_check(e91_log(werner_network_config(0.7), 100_000, seed=12), seed=13)
    assert estimate.s_value == pytest.approx(2 * math.sqrt(2) * 0.7, abs=0.06)
    assert not estimate.violates()


def test_chsh_check_fails_for_deterministic_data():
    records = [
        CoincidenceRecord(i, PAIR, theta_a, theta_b, 0, 0)
        for i, (theta_a, theta_b) in enumerate(CHSH_KEYS * 200)
    ]
    estimate = chsh_security_check(CoincidenceLog.from_records(records), resamples=200, seed=14)
    assert estimate.s_value == 2.0
    assert not estimate.violates()


def test_chsh_check_needs_every_setting():
    records = [CoincidenceRecord(i, PAIR, 0.0, 22.5, 0, 0) for i in range(500)]
    with pytest.raises(IncompleteDataError):
        chsh_security_check(CoincidenceLog.from_records(records))
