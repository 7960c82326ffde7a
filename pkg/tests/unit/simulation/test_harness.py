"""
Tests for the network simulation harness.
"""

import math

import numpy as np
import pytest

from quantum import fidelity, ideal_pair_state
from simulation import (
    ChshPolicy,
    E91Policy,
    EndUser,
    FixedPolicy,
    FringePolicy,
    NetworkConfig,
    NetworkHarness,
    RoutingSchedule,
    ScheduleEntry,
    ScheduleError,
    Side,
    bernoulli_slots,
    channel_state,
    ideal_network_config,
    parse_pair,
    route,
    run_slots,
    transmittance,
)


@pytest.fixture
def lossy_config():
    """Both sides at 20 km x 0.2 dB/km + 1 dB, transmittance ~0.316."""
    return NetworkConfig(
        fiber_length_km=20.0,
        attenuation_db_per_km=0.2,
        switch_insertion_loss_db=1.0,
        pair_gen_prob_per_pulse=0.01,
        residual_rotation={},
    )


def test_harness_initialization(default_config):
    harness = NetworkHarness(default_config)

    assert harness.config is default_config
    assert harness.harness_id is not None
    assert harness.transmittance_a == pytest.approx(10 ** -0.3)
    assert harness.transmittance_b == pytest.approx(10 ** -0.3)


def test_transmittance_lossless():
    config = ideal_network_config()
    assert transmittance(config, Side.A) == pytest.approx(1.0)


def test_transmittance_ten_db():
    config = NetworkConfig(fiber_length_km=50.0, attenuation_db_per_km=0.2, switch_insertion_loss_db=0.0)
    assert transmittance(config, Side.B) == pytest.approx(0.1)


def test_transmittance_per_side():
    config = NetworkConfig(fiber_length_km={"A": 20.0, "B": 0.0}, switch_insertion_loss_db=1.0)
    assert transmittance(config, Side.A) == pytest.approx(10 ** -0.5)
    assert transmittance(config, Side.B) == pytest.approx(10 ** -0.1)


def test_transmittance_includes_detector_efficiency():
    config = ideal_network_config(detector_efficiency=0.5)
    assert transmittance(config, "A") == pytest.approx(0.5)


def test_route_single_entry(pair_a1b1):
    schedule = RoutingSchedule([ScheduleEntry(0, 99, pair_a1b1)])
    assert route(schedule, 50) == pair_a1b1
    assert route(schedule, 100) is None


def test_route_disjoint_entries():
    first, second = parse_pair("A1B1"), parse_pair("A2B3")
    schedule = RoutingSchedule([ScheduleEntry(10, 19, second), ScheduleEntry(0, 9, first)])
    assert route(schedule, 3) == first
    assert route(schedule, 15) == second
    assert route(schedule, 25) is None


def test_channel_state_ideal(ideal_config, pair_a1b1):
    state = channel_state(ideal_config, pair_a1b1)
    assert np.allclose(state.matrix, ideal_pair_state().matrix, atol=1e-12)


def test_channel_state_source_fidelity(pair_a1b1):
    config = NetworkConfig(source_fidelity=0.9512, residual_rotation={})
    assert fidelity(channel_state(config, pair_a1b1), ideal_pair_state()) == pytest.approx(0.9512, abs=1e-12)


def test_channel_state_residual_rotation_lowers_fidelity(pair_a1b1):
    config = NetworkConfig(source_fidelity=0.9512, residual_rotation={"A": 5.0})
    assert fidelity(channel_state(config, pair_a1b1), ideal_pair_state()) < 0.9512


def test_channel_state_port_override():
    config = NetworkConfig(residual_rotation={"A": 4.0, "B": -4.0, "A3": 0.0, "B2": 0.0}, source_fidelity=1.0)
    untouched = channel_state(config, parse_pair("A3B2"))
    rotated = channel_state(config, parse_pair("A1B1"))
    assert fidelity(untouched, ideal_pair_state()) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(rotated, ideal_pair_state()) == pytest.approx(math.cos(math.radians(8.0)) ** 2, abs=1e-12)


def test_bernoulli_slots_edges():
    rng = np.random.default_rng(0)
    assert bernoulli_slots(100, 0.0, rng).size == 0
    assert np.array_equal(bernoulli_slots(5, 1.0, rng), np.arange(5))
    slots = bernoulli_slots(10_000, 0.3, rng)
    assert np.all(np.diff(slots) > 0)
    assert slots.max() < 10_000


def test_every_slot_correlated_when_ideal(ideal_config, pair_a1b1):
    log, stats = run_slots(ideal_config, RoutingSchedule.single(pair_a1b1, 1000), FixedPolicy(0, 0), 1000, seed=1)

    assert len(log) == 1000
    assert stats.coincidences == 1000
    assert np.array_equal(log.outcome_a, log.outcome_b)


def test_zero_transmittance_gives_no_records(pair_a1b1):
    config = ideal_network_config(fiber_length_km={"A": 0.0, "B": 0.0}, detector_efficiency=0.0)
    log, stats = run_slots(config, RoutingSchedule.single(pair_a1b1, 500), FixedPolicy(), 500, seed=2)
    assert len(log) == 0
    assert stats.pairs_generated == 500


def test_record_rate_matches_expectation(lossy_config, pair_a1b1):
    n_slots = 4_000_000
    log, _ = run_slots(lossy_config, RoutingSchedule.single(pair_a1b1, n_slots), E91Policy(), n_slots, seed=3)
    expected = n_slots * 0.01 * 10 ** -0.5 * 10 ** -0.5
    assert abs(len(log) - expected) < 0.1 * expected


def test_record_rate_within_five_sigma(lossy_config, pair_a1b1):
    n_slots = 1_000_000
    log, stats = run_slots(lossy_config, RoutingSchedule.single(pair_a1b1, n_slots), E91Policy(), n_slots, seed=4)
    q = 0.01 * 10 ** -1.0
    sigma = math.sqrt(n_slots * q * (1 - q))
    assert abs(len(log) - n_slots * q) < 5 * sigma
    assert stats.arrived_a >= len(log)


def test_run_is_deterministic(default_config, pair_a1b1):
    schedule = RoutingSchedule.single(pair_a1b1, 200_000)
    first, _ = run_slots(default_config, schedule, E91Policy(), 200_000, seed=42)
    second, _ = run_slots(default_config, schedule, E91Policy(), 200_000, seed=42)
    for column in ("slot", "theta_a", "theta_b", "outcome_a", "outcome_b"):
        assert np.array_equal(getattr(first, column), getattr(second, column))


def test_only_scheduled_pair_appears(ideal_config):
    pairs = [parse_pair("A1B1"), parse_pair("A2B2"), parse_pair("A8B5")]
    schedule = RoutingSchedule.round_robin(pairs, slots_per_pair=50, cycles=3)
    log, stats = run_slots(ideal_config, schedule, FixedPolicy(), 500, seed=5)

    assert stats.routed_slots == 450
    assert len(log) == 450
    for record in log:
        assert record.pair == route(schedule, record.slot)


def test_matched_fringe_angle_fully_correlated(ideal_config, pair_a1b1):
    policy = FringePolicy("Z", [0.0, 45.0, 90.0, 135.0, 22.5])
    log, _ = run_slots(ideal_config, RoutingSchedule.single(pair_a1b1, 5000), policy, 5000, seed=6)
    matched = log.select(log.theta_b == 0.0)
    assert len(matched) == 1000
    assert np.all(matched.outcome_a == matched.outcome_b)


def test_fringe_x_basis_alice_angle(ideal_config, pair_a1b1):
    log, _ = run_slots(ideal_config, RoutingSchedule.single(pair_a1b1, 100), FringePolicy("X"), 100, seed=6)
    assert np.all(log.theta_a == 45.0)


def test_chsh_policy_covers_four_settings(ideal_config, pair_a1b1):
    log, _ = run_slots(ideal_config, RoutingSchedule.single(pair_a1b1, 400), ChshPolicy(), 400, seed=7)
    settings = set(zip(log.theta_a.tolist(), log.theta_b.tolist()))
    assert settings == {(0.0, 22.5), (45.0, 22.5), (45.0, 67.5), (0.0, 67.5)}


def test_dark_counts_without_pairs_are_random(pair_a1b1):
    config = ideal_network_config(pair_gen_prob_per_pulse=0.0, dark_count_prob_per_slot=0.5)
    log, stats = run_slots(config, RoutingSchedule.single(pair_a1b1, 20_000), FixedPolicy(), 20_000, seed=8)
    assert stats.pairs_generated == 0
    assert abs(len(log) - 5000) < 5 * math.sqrt(20_000 * 0.25 * 0.75)
    agreement = np.mean(log.outcome_a == log.outcome_b)
    assert abs(agreement - 0.5) < 0.05


def test_empty_schedule_yields_statistics_only(ideal_config):
    log, stats = run_slots(ideal_config, RoutingSchedule(), FixedPolicy(), 100, seed=9)
    assert len(log) == 0
    assert stats.slots == 100
    assert stats.coincidences == 0


def test_rejects_unknown_port(ideal_config):
    schedule = RoutingSchedule.single((EndUser(Side.A, 9), EndUser(Side.B, 1)), 10)
    with pytest.raises(ScheduleError):
        run_slots(ideal_config, schedule, FixedPolicy(), 10, seed=0)


def test_rejects_zero_slots(ideal_config, pair_a1b1):
    with pytest.raises(ValueError):
        run_slots(ideal_config, RoutingSchedule.single(pair_a1b1, 10), FixedPolicy(), 0, seed=0)


def test_e91_policy_seeded_generator_is_reused_per_run():
    policy = E91Policy(seed=12)
    slots = np.arange(50)
    first = policy.settings(slots, 50, np.random.default_rng(1))
    second = policy.settings(slots, 50, np.random.default_rng(2))
    assert np.array_equal(first[0], second[0])
    assert set(first[0]) <= {0.0, 22.5, 45.0}
    assert set(first[1]) <= {22.5, 45.0, 67.5}
