"""
Run manifests.

A manifest records what produced an output directory: the subcommand, its
arguments, the canonical network configuration, the seed and the SHA-256
hash of every artifact. Replaying a manifest must reproduce the artifacts
byte for byte.
"""

import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from simulation import NetworkConfig, dump_network_config
from simulation.harness import network_config_from_mapping

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


class ManifestError(ValueError):
    """Raised when a manifest cannot be parsed or does not fit the run."""
    pass


class RunManifest(BaseModel):
    """Provenance of one output directory."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    version: int = MANIFEST_VERSION
    subcommand: str
    seed: int = Field(ge=0)
    arguments: Dict[str, Any] = Field(default_factory=dict)
    config: str
    outputs: Dict[str, str] = Field(default_factory=dict)

    def network_config(self) -> NetworkConfig:
        """Rebuild the configuration snapshot."""
        return network_config_from_mapping(dotenv_values(stream=io.StringIO(self.config)))


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def hash_outputs(directory: Union[str, Path], names: Iterable[str]) -> Dict[str, str]:
    """SHA-256 of every named artifact, keyed by its path relative to directory."""
    directory = Path(directory)
    return {name: sha256_file(directory / name) for name in sorted(names)}


def build_manifest(
    subcommand: str,
    seed: int,
    arguments: Dict[str, Any],
    config: NetworkConfig,
    directory: Union[str, Path],
    names: Iterable[str]
) -> RunManifest:
    return RunManifest(
        subcommand=subcommand,
        seed=seed,
        arguments=dict(sorted(arguments.items())),
        config=dump_network_config(config),
        outputs=hash_outputs(directory, names),
    )


def write_manifest(manifest: RunManifest, directory: Union[str, Path]) -> Path:
    path = Path(directory) / MANIFEST_NAME
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Manifest written to %s (%d artifacts)", path, len(manifest.outputs))
    return path


def load_manifest(path: Union[str, Path]) -> RunManifest:
    """
    Read a manifest file.

    Raises:
        OSError: If the file cannot be read
        ManifestError: If the file is not a valid manifest
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        manifest = RunManifest.model_validate(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ManifestError(f"Invalid manifest {path}: {e}") from e
    if manifest.version != MANIFEST_VERSION:
        raise ManifestError(f"Unsupported manifest version {manifest.version}")
    return manifest


def verify_outputs(manifest: RunManifest, directory: Union[str, Path]) -> List[str]:
    """
    Compare artifacts on disk with the hashes of a manifest.

    Returns:
        Names of artifacts that are missing or differ
    """
    directory = Path(directory)
    mismatched = []
    for name, expected in manifest.outputs.items():
        path = directory / name
        if not path.is_file() or sha256_file(path) != expected:
            mismatched.append(name)
    return mismatched
