"""
Tests for the network configuration layer.
"""

import pydantic
import pytest

from simulation import EndUser, NetworkConfig, NetworkConfigError, Side
from simulation.harness import (
    CALIBRATED_NETWORK_DEFAULTS,
    dump_network_config,
    ideal_network_config,
    load_network_config,
    werner_network_config,
)


def test_defaults_match_calibration():
    config = NetworkConfig()
    assert config.model_dump(mode="json") == NetworkConfig(**CALIBRATED_NETWORK_DEFAULTS).model_dump(mode="json")
    assert config.ports_per_side == 8
    assert config.pulse_rate_hz == 76e6
    assert config.rotation_deg(EndUser.parse("A5")) == 4.0
    assert config.rotation_deg(EndUser.parse("B2")) == -4.0


@pytest.mark.parametrize(
    "field,value",
    [
        ("pair_gen_prob_per_pulse", 1.5),
        ("source_fidelity", 0.2),
        ("detector_efficiency", -0.1),
        ("dark_count_prob_per_slot", 2.0),
        ("attenuation_db_per_km", -1.0),
        ("fiber_length_km", -3.0),
        ("ports_per_side", 0),
    ],
)
def test_invalid_ranges_rejected(field, value):
    with pytest.raises(pydantic.ValidationError):
        NetworkConfig(**{field: value})


def test_config_is_frozen():
    config = NetworkConfig()
    with pytest.raises(pydantic.ValidationError):
        config.source_fidelity = 0.5


def test_scalar_fiber_length_applies_to_both_sides():
    config = NetworkConfig(fiber_length_km=7.5)
    assert config.fiber_length_km == {Side.A: 7.5, Side.B: 7.5}


@pytest.mark.parametrize(
    "lengths",
    [-3.0, -0.5, float("inf"), float("nan"), {"A": -1.0, "B": 2.0}, {"B": float("inf")}],
)
def test_fiber_lengths_must_be_finite_and_non_negative(lengths):
    with pytest.raises(pydantic.ValidationError):
        NetworkConfig(fiber_length_km=lengths)


def test_negative_fiber_length_in_file_rejected(tmp_path):
    path = tmp_path / "negative.env"
    path.write_text("fiber_length_km = -3\n")
    with pytest.raises(NetworkConfigError):
        load_network_config(path, environ={})


def test_presets():
    assert ideal_network_config().source_fidelity == 1.0
    assert ideal_network_config().residual_rotation == {}
    assert werner_network_config(0.9).source_fidelity == pytest.approx(0.925)


def test_load_from_file(tmp_path):
    path = tmp_path / "network.env"
    path.write_text(
        "# lab network\n"
        "fiber_length_km = A:12,B:8\n"
        "source_fidelity = 0.9\n"
        "residual_rotation = A:2,B:-2,a3:5\n"
    )
    config = load_network_config(path, environ={})

    assert config.fiber_length_km == {Side.A: 12.0, Side.B: 8.0}
    assert config.source_fidelity == 0.9
    assert config.rotation_deg(EndUser.parse("A3")) == 5.0
    assert config.rotation_deg(EndUser.parse("A1")) == 2.0


def test_environment_overrides_file(tmp_path):
    path = tmp_path / "network.env"
    path.write_text("source_fidelity = 0.9\n")
    config = load_network_config(path, environ={"ENTNET_SOURCE_FIDELITY": "0.97"})
    assert config.source_fidelity == 0.97


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "network.env"
    path.write_text("fibre_length = 3\n")
    with pytest.raises(NetworkConfigError):
        load_network_config(path, environ={})


def test_invalid_value_rejected(tmp_path):
    path = tmp_path / "network.env"
    path.write_text("source_fidelity = 3\n")
    with pytest.raises(NetworkConfigError):
        load_network_config(path, environ={})


def test_missing_file_rejected(tmp_path):
    with pytest.raises(NetworkConfigError):
        load_network_config(tmp_path / "absent.env", environ={})


def test_dump_reloads_to_same_config(tmp_path):
    config = NetworkConfig(fiber_length_km={"A": 3.0, "B": 4.5}, residual_rotation={"A": 1.0, "B7": -2.5})
    path = tmp_path / "dump.env"
    path.write_text(dump_network_config(config))
    assert load_network_config(path, environ={}).model_dump() == config.model_dump()


def test_dump_of_ideal_config_reloads(tmp_path):
    path = tmp_path / "ideal.env"
    path.write_text(dump_network_config(ideal_network_config()))
    assert load_network_config(path, environ={}).model_dump() == ideal_network_config().model_dump()
