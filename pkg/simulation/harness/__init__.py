"""
Simulation harness package.

Network configuration and measurement-setting policies.
"""

from simulation.harness.config import (
    ENV_PREFIX,
    CALIBRATED_NETWORK_DEFAULTS,
    NetworkConfig,
    dump_network_config,
    ideal_network_config,
    load_network_config,
    network_config_from_mapping,
    werner_network_config,
)
from simulation.harness.policies import (
    ChshPolicy,
    E91Policy,
    FixedPolicy,
    FringePolicy,
    default_fringe_angles,
    policy_from_name,
)

__all__ = [
    'ENV_PREFIX',
    'CALIBRATED_NETWORK_DEFAULTS',
    'NetworkConfig',
    'dump_network_config',
    'ideal_network_config',
    'load_network_config',
    'network_config_from_mapping',
    'werner_network_config',
    'ChshPolicy',
    'E91Policy',
    'FixedPolicy',
    'FringePolicy',
    'default_fringe_angles',
    'policy_from_name',
]
