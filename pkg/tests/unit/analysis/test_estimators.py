"""
Tests for the count-data estimators.
"""

import itertools
import math

import numpy as np
import pytest

from analysis import (
    CHSH_KEYS,
    ChshEstimate,
    FitFailureError,
    FringeCurve,
    IncompleteDataError,
    UndefinedEstimateError,
    chsh_estimate,
    chsh_value,
    correlation,
    fidelity_bound,
    fringe_curve,
    pair_entanglement_summary,
    poisson_bootstrap,
    raw_visibility,
    visibility,
    visibility_error,
)
from quantum import CHSH_SETTINGS, fidelity, ideal_pair_state
from simulation import (
    ChshPolicy,
    CountTable,
    FringePolicy,
    RoutingSchedule,
    channel_state,
    default_fringe_angles,
    ideal_network_config,
    parse_pair,
    run_slots,
    werner_network_config,
)

PAIR = parse_pair("A1B1")
ANGLES = np.arange(0.0, 180.0, 20.0)


def simulate_chsh_tables(config, records_per_setting, seed):
    n_slots = 4 * records_per_setting
    log, _ = run_slots(config, RoutingSchedule.single(PAIR, n_slots), ChshPolicy(), n_slots, seed=seed)
    return CountTable.from_log(log)


def simulate_fringe(config, basis, records_per_angle, seed):
    angles = default_fringe_angles(9)
    n_slots = len(angles) * records_per_angle
    policy = FringePolicy(basis, angles)
    log, _ = run_slots(config, RoutingSchedule.single(PAIR, n_slots), policy, n_slots, seed=seed)
    return fringe_curve(log, basis)


def test_correlation_examples():
    assert correlation([[50, 0], [0, 50]]) == 1.0
    assert correlation([[25, 25], [25, 25]]) == 0.0
    with pytest.raises(UndefinedEstimateError):
        correlation([[0, 0], [0, 0]])


def test_correlation_antisymmetric_under_cell_swap():
    counts = np.array([[31, 7], [12, 40]])
    swapped = counts[:, ::-1]
    assert correlation(swapped) == pytest.approx(-correlation(counts))


def test_correlation_of_sampled_singlet():
    rng = np.random.default_rng(0)
    # value-indexed probabilities of the singlet at (0, 22.5) degrees
    e = math.cos(math.radians(45.0))
    p = np.array([1 + e, 1 - e, 1 - e, 1 + e]) / 4
    counts = rng.multinomial(100_000, p).reshape(2, 2)
    assert correlation(counts) == pytest.approx(0.7071, abs=0.01)


def test_visibility_noiseless_fringe():
    curve = FringeCurve.from_arrays("Z", ANGLES, 100 * (1 + np.cos(2 * np.radians(ANGLES))))
    assert visibility(curve) == pytest.approx(1.0, abs=1e-6)


def test_visibility_noiseless_fringe_with_phase():
    counts = np.round(5000 * (1 + 0.8 * np.cos(2 * np.radians(ANGLES) - 1.1))).astype(int)
    curve = FringeCurve.from_arrays("X", ANGLES, counts)
    assert visibility(curve) == pytest.approx(0.8, abs=1e-3)


def test_visibility_constant_curve():
    curve = FringeCurve.from_arrays("Z", ANGLES, [40] * len(ANGLES))
    assert visibility(curve) == 0.0


def test_visibility_rejects_empty_and_short_curves():
    with pytest.raises(FitFailureError):
        visibility(FringeCurve.from_arrays("Z", ANGLES, [0] * len(ANGLES)))
    with pytest.raises(IncompleteDataError):
        visibility(FringeCurve.from_arrays("Z", [0, 10, 20], [1, 2, 3]))


def test_visibility_of_werner_fringe():
    rng = np.random.default_rng(1)
    p = 0.93
    probability = (1 + p * np.cos(2 * np.radians(ANGLES))) / 4
    counts = rng.binomial(40_000, probability)
    curve = FringeCurve.from_arrays("Z", ANGLES, counts)
    assert visibility(curve) == pytest.approx(0.93, abs=0.02)


def test_visibility_scale_invariant():
    rng = np.random.default_rng(2)
    counts = rng.integers(100, 1000, len(ANGLES))
    curve = FringeCurve.from_arrays("Z", ANGLES, counts)
    scaled = FringeCurve.from_arrays("Z", ANGLES, counts * 7)
    assert visibility(scaled) == pytest.approx(visibility(curve), abs=1e-8)


def _ideal_counts(angles):
    return np.round(100 * (1 + np.cos(2 * np.radians(angles)))).astype(int)


def test_raw_visibility():
    angles = np.array(default_fringe_angles(8))
    assert 90.0 in angles
    curve = FringeCurve.from_arrays("Z", angles, _ideal_counts(angles))
    assert raw_visibility(curve) == pytest.approx(1.0, abs=1e-9)


def test_raw_visibility_misses_unsampled_minimum():
    # 20 degree steps never reach 2 theta = 180, so the smallest count is 6 and not 0
    counts = _ideal_counts(ANGLES)
    assert counts.min() == 6
    curve = FringeCurve.from_arrays("Z", ANGLES, counts)
    assert raw_visibility(curve) == pytest.approx(194 / 206, abs=1e-12)
    assert visibility(curve) == pytest.approx(1.0, abs=0.01)


def test_fidelity_bound():
    assert fidelity_bound(1.0, 1.0) == 1.0
    assert fidelity_bound(0.92, 0.90) == pytest.approx(0.91)
    for v in np.linspace(0, 1, 11):
        assert fidelity_bound(v, v) == pytest.approx(v)
    with pytest.raises(ValueError):
        fidelity_bound(1.2, 0.5)


def test_chsh_ideal_singlet():
    tables = simulate_chsh_tables(ideal_network_config(), 100_000, seed=10)
    estimate = chsh_estimate(tables, seed=1)
    assert estimate.s_value == pytest.approx(2 * math.sqrt(2), abs=0.02)
    assert estimate.violates()


def test_chsh_werner_source():
    tables = simulate_chsh_tables(werner_network_config(0.9349), 100_000, seed=11)
    assert chsh_estimate(tables, seed=2).s_value == pytest.approx(2.644, abs=0.03)


@pytest.mark.parametrize("p", [0.8, 0.9, 1.0])
def test_chsh_scales_with_werner_weight(p):
    tables = simulate_chsh_tables(werner_network_config(p), 50_000, seed=int(p * 100))
    estimate = chsh_estimate(tables, seed=3)
    assert abs(estimate.s_value - 2 * math.sqrt(2) * p) < 3 * estimate.std_error + 1e-9


def test_chsh_classical_deterministic_outcomes():
    tables = CountTable({key: [[1000, 0], [0, 0]] for key in CHSH_KEYS})
    estimate = chsh_estimate(tables, seed=4)
    assert estimate.s_value == 2.0
    assert estimate.std_error == 0.0
    assert not estimate.violates()


def test_chsh_local_deterministic_strategies_bounded():
    for a_values in itertools.product((0, 1), repeat=2):
        for b_values in itertools.product((0, 1), repeat=2):
            alice = {0.0: a_values[0], 45.0: a_values[1]}
            bob = {22.5: b_values[0], 67.5: b_values[1]}
            counts = {}
            for theta_a, theta_b, _ in CHSH_SETTINGS:
                matrix = np.zeros((2, 2), dtype=int)
                matrix[alice[theta_a], bob[theta_b]] = 500
                counts[(theta_a, theta_b)] = matrix
            assert -2.0 <= chsh_value(CountTable(counts)) <= 2.0


def test_chsh_requires_all_settings():
    tables = CountTable({key: [[100, 0], [0, 100]] for key in CHSH_KEYS[:3]})
    with pytest.raises(IncompleteDataError):
        chsh_estimate(tables)


def test_chsh_requires_enough_counts():
    tables = CountTable({key: [[10, 0], [0, 10]] for key in CHSH_KEYS})
    with pytest.raises(IncompleteDataError):
        chsh_estimate(tables)


def test_chsh_estimate_rejects_negative_error():
    with pytest.raises(ValueError):
        ChshEstimate(2.5, -0.1)


def test_poisson_bootstrap_constant_statistic():
    tables = CountTable({(0.0, 0.0): [[10, 3], [4, 9]]})
    _, std = poisson_bootstrap(tables, lambda t: 1.5, resamples=200, seed=5)
    assert std == 0.0


def test_poisson_bootstrap_single_cell_variance():
    tables = CountTable({(0.0, 0.0): [[10_000, 0], [0, 0]]})
    mean, std = poisson_bootstrap(tables, lambda t: float(t[(0.0, 0.0)][0, 0]), seed=6)
    assert mean == pytest.approx(10_000, rel=0.01)
    assert std == pytest.approx(100, rel=0.1)


def test_poisson_bootstrap_rejects_few_resamples():
    with pytest.raises(ValueError):
        poisson_bootstrap(CountTable(), lambda t: 0.0, resamples=10)


def test_chsh_error_shrinks_with_counts():
    e = math.cos(math.radians(45.0))
    base = {}
    for theta_a, theta_b, sign in CHSH_SETTINGS:
        value = e * sign
        base[(theta_a, theta_b)] = np.round(2500 * np.array([[1 + value, 1 - value], [1 - value, 1 + value]]))
    small = CountTable(base)
    large = small.map_counts(lambda m: 4 * m)
    _, std_small = poisson_bootstrap(small, chsh_value, seed=7)
    _, std_large = poisson_bootstrap(large, chsh_value, seed=8)
    assert std_large / std_small == pytest.approx(0.5, rel=0.2)


def test_fringe_curve_counts_plus_plus_cell():
    config = ideal_network_config()
    curve = simulate_fringe(config, "Z", 20_000, seed=12)
    assert curve.basis == "Z"
    assert len(curve.points) == 9
    # at theta_b = 0 the singlet gives (+1,+1) half of the time
    assert curve.points[0][1] == pytest.approx(10_000, abs=5 * math.sqrt(5000))
    assert visibility(curve) == pytest.approx(1.0, abs=0.02)


@pytest.mark.parametrize("p", [0.8, 0.9, 1.0])
def test_fidelity_bound_below_true_fidelity(p):
    config = werner_network_config(p)
    z_curve = simulate_fringe(config, "Z", 20_000, seed=20)
    x_curve = simulate_fringe(config, "X", 20_000, seed=21)
    bound = fidelity_bound(visibility(z_curve), visibility(x_curve))
    error = math.hypot(visibility_error(z_curve, 200, 1), visibility_error(x_curve, 200, 2)) / 2
    true_fidelity = fidelity(channel_state(config, PAIR), ideal_pair_state())
    assert bound <= true_fidelity + 3 * error + 1e-9


def test_pair_entanglement_summary_with_residual_rotation():
    config = ideal_network_config(residual_rotation={"A": 4.0, "B": -4.0}, source_fidelity=0.9512)
    z_curve = simulate_fringe(config, "Z", 20_000, seed=30)
    x_curve = simulate_fringe(config, "X", 20_000, seed=31)
    tables = simulate_chsh_tables(config, 20_000, seed=32)
    summary = pair_entanglement_summary("A1B1", z_curve, x_curve, tables, resamples=200, seed=9)

    assert summary.fidelity_bound >= 0.90
    assert summary.violates
    # the 8 degree relative rotation shifts every correlation phase by 16 degrees
    expected = 2 * math.sqrt(2) * 0.93493 * math.cos(math.radians(16))
    assert summary.s_value == pytest.approx(expected, abs=0.05)
