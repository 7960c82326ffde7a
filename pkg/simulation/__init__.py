"""
Optics network simulation package.

Shared photon-pair source, lossy fibers, 1xN switches and detectors of the
entanglement access network.
"""

from simulation.interfaces import NetworkConfigError, ScheduleError, SettingPolicy, SimulationError
from simulation.records import (
    CoincidenceLog,
    CoincidenceRecord,
    CountTable,
    EndUser,
    LossStatistics,
    RoutingSchedule,
    ScheduleEntry,
    Side,
    angle_key,
    pair_label,
    parse_pair,
)
from simulation.harness import (
    ChshPolicy,
    E91Policy,
    FixedPolicy,
    FringePolicy,
    NetworkConfig,
    default_fringe_angles,
    dump_network_config,
    ideal_network_config,
    load_network_config,
    werner_network_config,
)
from simulation.sim_harness import (
    NetworkHarness,
    bernoulli_slots,
    channel_state,
    route,
    run_slots,
    transmittance,
)

__all__ = [
    # Records
    'CoincidenceLog',
    'CoincidenceRecord',
    'CountTable',
    'EndUser',
    'LossStatistics',
    'RoutingSchedule',
    'ScheduleEntry',
    'Side',
    'angle_key',
    'pair_label',
    'parse_pair',

    # Configuration and policies
    'NetworkConfig',
    'dump_network_config',
    'ideal_network_config',
    'load_network_config',
    'werner_network_config',
    'SettingPolicy',
    'ChshPolicy',
    'E91Policy',
    'FixedPolicy',
    'FringePolicy',
    'default_fringe_angles',

    # Engine
    'NetworkHarness',
    'bernoulli_slots',
    'channel_state',
    'route',
    'run_slots',
    'transmittance',

    # Exceptions
    'SimulationError',
    'NetworkConfigError',
    'ScheduleError',
]
