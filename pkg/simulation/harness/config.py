"""
Configuration for the network simulation.

Holds the NetworkConfig model, the key-value file loader and the presets
used by the command line and the tests.
"""

import math
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from quantum import LocalUnitary, eom_unitary, werner_fidelity
from simulation.interfaces import NetworkConfigError
from simulation.records import EndUser, Side

ENV_PREFIX = "ENTNET_"

# Calibrated defaults: 76 MHz pump, 1x8 switches, ~20 km of fiber in total
CALIBRATED_NETWORK_DEFAULTS: Dict[str, Any] = {
    "fiber_length_km": {"A": 10.0, "B": 10.0},
    "attenuation_db_per_km": 0.2,
    "switch_insertion_loss_db": 1.0,
    "ports_per_side": 8,
    "pulse_rate_hz": 76e6,
    "pair_gen_prob_per_pulse": 0.01,
    "source_fidelity": 0.9512,
    "source_phase_deg": 180.0,
    "residual_rotation": {"A": 4.0, "B": -4.0},
    "detector_efficiency": 1.0,
    "dark_count_prob_per_slot": 0.0,
}

_MAPPING_FIELDS = ("fiber_length_km", "residual_rotation")


def _finite(value: float, name: str) -> float:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite")
    return value


class NetworkConfig(BaseModel):
    """
    Physical parameters of the access network.

    Residual rotations are EOM-style rotation angles in degrees, keyed by
    side ("A", "B") for the default of every port on that side and by end
    user ("A3") for port-specific overrides.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    fiber_length_km: Dict[Side, float] = Field(default_factory=lambda: {Side.A: 10.0, Side.B: 10.0})
    attenuation_db_per_km: float = Field(0.2, ge=0.0)
    switch_insertion_loss_db: float = Field(1.0, ge=0.0)
    ports_per_side: int = Field(8, ge=1)
    pulse_rate_hz: float = Field(76e6, gt=0.0)
    pair_gen_prob_per_pulse: float = Field(0.01, ge=0.0, le=1.0)
    source_fidelity: float = Field(0.9512, ge=0.25, le=1.0)
    source_phase_deg: float = 180.0
    residual_rotation: Dict[str, float] = Field(default_factory=lambda: {"A": 4.0, "B": -4.0})
    detector_efficiency: float = Field(1.0, ge=0.0, le=1.0)
    dark_count_prob_per_slot: float = Field(0.0, ge=0.0, le=1.0)

    @field_validator("fiber_length_km", mode="before")
    @classmethod
    def _expand_lengths(cls, value: Any) -> Any:
        if isinstance(value, (int, float)):
            return {Side.A: float(value), Side.B: float(value)}
        if isinstance(value, Mapping):
            lengths = {Side(str(getattr(k, "value", k)).upper()): float(v) for k, v in value.items()}
            for side in Side:
                lengths.setdefault(side, 0.0)
            return lengths
        return value

    @field_validator("fiber_length_km")
    @classmethod
    def _check_lengths(cls, value: Dict[Side, float]) -> Dict[Side, float]:
        for side, length in value.items():
            if length < 0 or not math.isfinite(length):
                raise ValueError(f"Fiber length for side {side.value} must be finite and >= 0")
        return value

    @field_validator("residual_rotation", mode="before")
    @classmethod
    def _normalize_rotations(cls, value: Any) -> Any:
        if not isinstance(value, Mapping):
            return value
        rotations: Dict[str, float] = {}
        for key, degrees in value.items():
            name = str(getattr(key, "value", key)).strip().upper()
            if name not in ("A", "B"):
                name = str(EndUser.parse(name))
            rotations[name] = _finite(float(degrees), f"residual_rotation[{name}]")
        return rotations

    @field_validator("pulse_rate_hz", "attenuation_db_per_km", "switch_insertion_loss_db", "source_phase_deg")
    @classmethod
    def _check_finite(cls, value: float, info) -> float:
        return _finite(value, info.field_name)

    def rotation_deg(self, user: EndUser) -> float:
        """Residual rotation angle (degrees) on the path of one end user."""
        return self.residual_rotation.get(str(user), self.residual_rotation.get(user.side.value, 0.0))

    def residual_unitary(self, user: EndUser) -> LocalUnitary:
        """Residual rotation of one end user's path as a LocalUnitary."""
        return eom_unitary(math.radians(self.rotation_deg(user)))

    def slot_duration_s(self) -> float:
        return 1.0 / self.pulse_rate_hz


def ideal_network_config(**overrides: Any) -> NetworkConfig:
    """Lossless network with a perfect source, one pair per pulse and no residual rotation."""
    values: Dict[str, Any] = {
        "fiber_length_km": 0.0,
        "switch_insertion_loss_db": 0.0,
        "pair_gen_prob_per_pulse": 1.0,
        "source_fidelity": 1.0,
        "residual_rotation": {},
    }
    values.update(overrides)
    return NetworkConfig(**values)


def werner_network_config(p: float, **overrides: Any) -> NetworkConfig:
    """Lossless network whose source is a Werner state with mixing weight p."""
    return ideal_network_config(source_fidelity=werner_fidelity(p), **overrides)


def _parse_value(field_name: str, text: str) -> Any:
    text = text.strip()
    if field_name in _MAPPING_FIELDS:
        if not text:
            return {}
        if ":" not in text:
            return float(text) if field_name == "fiber_length_km" else {"A": float(text), "B": float(text)}
        mapping = {}
        for item in filter(None, (part.strip() for part in text.split(","))):
            key, _, value = item.partition(":")
            mapping[key.strip()] = float(value)
        return mapping
    return text


def network_config_from_mapping(values: Mapping[str, Optional[str]]) -> NetworkConfig:
    """
    Build a NetworkConfig from raw key-value strings.

    Raises:
        NetworkConfigError: On unknown keys or invalid values
    """
    unknown = sorted(set(values) - set(NetworkConfig.model_fields))
    if unknown:
        raise NetworkConfigError(f"Unknown configuration keys: {', '.join(unknown)}")
    try:
        parsed = {key: _parse_value(key, value or "") for key, value in values.items()}
        return NetworkConfig(**parsed)
    except (ValidationError, ValueError) as e:
        raise NetworkConfigError(f"Invalid network configuration: {e}") from e


def load_network_config(
    path: Optional[Union[str, Path]] = None,
    environ: Optional[Mapping[str, str]] = None
) -> NetworkConfig:
    """
    Load the network configuration.

    Values come from the defaults, then the key-value file at path, then
    ENTNET_<FIELD> environment variables.

    Args:
        path: Optional configuration file
        environ: Environment to read overrides from (defaults to os.environ)

    Returns:
        Validated NetworkConfig

    Raises:
        NetworkConfigError: If the file is missing or holds invalid values
    """
    values: Dict[str, Optional[str]] = {}
    if path is not None:
        if not Path(path).is_file():
            raise NetworkConfigError(f"Configuration file not found: {path}")
        values.update(dotenv_values(path))
    environ = os.environ if environ is None else environ
    for field_name in NetworkConfig.model_fields:
        env_value = environ.get(ENV_PREFIX + field_name.upper())
        if env_value is not None:
            values[field_name] = env_value
    return network_config_from_mapping(values)


def _format_value(value: Any) -> str:
    if isinstance(value, dict):
        items = sorted((getattr(k, "value", k), v) for k, v in value.items())
        return ",".join(f"{k}:{v!r}" for k, v in items)
    return repr(value)


def dump_network_config(config: NetworkConfig) -> str:
    """Render the canonical key-value text of a configuration."""
    lines = [f"{name} = {_format_value(getattr(config, name))}" for name in NetworkConfig.model_fields]
    return "\n".join(lines) + "\n"
