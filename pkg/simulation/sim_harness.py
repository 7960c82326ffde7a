"""
Slot-level simulation of the entanglement access network.

One slot per pump pulse: the shared source emits a pair with a fixed
probability, the 1xN switches route both photons to the scheduled end users,
each photon survives its fiber and switch with the side transmittance and
the detectors register coincidences with Born-rule outcomes.
"""

import logging
import math
import uuid
from typing import Dict, Optional, Tuple

import numpy as np

from quantum import PairState, apply_local, born_probabilities, ideal_pair_state, werner_mix
from simulation.harness.config import NetworkConfig
from simulation.interfaces import ScheduleError, SettingPolicy
from simulation.records import (
    CoincidenceLog,
    LossStatistics,
    RoutingSchedule,
    Side,
    UserPair,
)
from utils.metrics import COINCIDENCES, SIMULATED_SLOTS

logger = logging.getLogger(__name__)


def transmittance(config: NetworkConfig, side: Side) -> float:
    """
    Probability that a photon sent to one side is detected.

    Args:
        config: Network configuration
        side: Side.A or Side.B

    Returns:
        10^(-(length * attenuation + switch_loss)/10) * detector_efficiency
    """
    side = Side(side)
    loss_db = config.fiber_length_km[side] * config.attenuation_db_per_km + config.switch_insertion_loss_db
    return 10.0 ** (-loss_db / 10.0) * config.detector_efficiency


def route(schedule: RoutingSchedule, slot: int) -> Optional[UserPair]:
    """Pair served by the switches in a slot, or None."""
    return schedule.route(slot)


def channel_state(config: NetworkConfig, pair: UserPair) -> PairState:
    """
    State shared by a pair of end users.

    The source state is mixed to the configured fidelity, then each photon
    picks up the residual rotation of its path.
    """
    source = werner_mix(ideal_pair_state(math.radians(config.source_phase_deg)), config.source_fidelity)
    return apply_local(source, config.residual_unitary(pair[0]), config.residual_unitary(pair[1]))


def bernoulli_slots(n_slots: int, probability: float, rng: np.random.Generator) -> np.ndarray:
    """
    Sorted indices of the slots in which a Bernoulli(probability) event occurs.

    Draws geometric gaps between events, so the cost scales with the number
    of events rather than the number of slots.
    """
    if probability <= 0.0 or n_slots <= 0:
        return np.zeros(0, dtype=np.int64)
    if probability >= 1.0:
        return np.arange(n_slots, dtype=np.int64)
    expected = n_slots * probability
    chunk = int(expected + 6.0 * math.sqrt(expected) + 16)
    positions = np.cumsum(rng.geometric(probability, size=chunk)) - 1
    while positions[-1] < n_slots:
        more = np.cumsum(rng.geometric(probability, size=chunk)) + positions[-1]
        positions = np.concatenate([positions, more])
    return positions[positions < n_slots].astype(np.int64)


class NetworkHarness:
    """
    Harness for running slot simulations of the access network.

    Caches the channel state of every pair and the cumulative outcome tables
    of every (pair, setting) combination it has seen. A harness owns no
    random state; each run builds its generator from the seed it is given.
    """

    def __init__(self, config: Optional[NetworkConfig] = None):
        """
        Initialize the harness.

        Args:
            config: Network configuration (defaults to NetworkConfig())
        """
        self.config = config or NetworkConfig()
        self.harness_id = str(uuid.uuid4())
        self.transmittance_a = transmittance(self.config, Side.A)
        self.transmittance_b = transmittance(self.config, Side.B)
        self._states: Dict[UserPair, PairState] = {}
        self._tables: Dict[Tuple[UserPair, float, float], np.ndarray] = {}

    def state_for(self, pair: UserPair) -> PairState:
        if pair not in self._states:
            self._states[pair] = channel_state(self.config, pair)
        return self._states[pair]

    def _cumulative(self, pair: UserPair, theta_a: float, theta_b: float) -> np.ndarray:
        key = (pair, theta_a, theta_b)
        if key not in self._tables:
            distribution = born_probabilities(self.state_for(pair), math.radians(theta_a), math.radians(theta_b))
            table = np.cumsum(distribution.p.reshape(-1))
            table[-1] = 1.0
            self._tables[key] = table
        return self._tables[key]

    def _check_schedule(self, schedule: RoutingSchedule) -> None:
        for entry in schedule.entries:
            for user in entry.pair:
                try:
                    user.check_ports(self.config.ports_per_side)
                except ValueError as e:
                    raise ScheduleError(str(e)) from e

    def _sample_ports(
        self,
        pairs: Tuple[UserPair, ...],
        pair_index: np.ndarray,
        theta_a: np.ndarray,
        theta_b: np.ndarray,
        rng: np.random.Generator
    ) -> np.ndarray:
        """Joint detector-port cell (2 * port_a + port_b) for each coincidence."""
        cells = np.zeros(pair_index.size, dtype=np.int64)
        if not pair_index.size:
            return cells
        uniforms = rng.random(pair_index.size)
        settings = np.stack([pair_index.astype(float), theta_a, theta_b], axis=1)
        unique, inverse = np.unique(settings, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for k, (index, a, b) in enumerate(unique):
            members = inverse == k
            table = self._cumulative(pairs[int(index)], float(a), float(b))
            cells[members] = np.minimum(np.searchsorted(table, uniforms[members], side="right"), 3)
        return cells

    def run(
        self,
        schedule: RoutingSchedule,
        policy: SettingPolicy,
        n_slots: int,
        seed: Optional[int] = None
    ) -> Tuple[CoincidenceLog, LossStatistics]:
        """
        Simulate a run of consecutive slots.

        Args:
            schedule: Switch schedule; slots outside it are not routed
            policy: Setting policy of both ends
            n_slots: Number of pump pulses
            seed: Seed of the run's generator (OS entropy when None)

        Returns:
            Tuple of (coincidence log, loss statistics)

        Raises:
            ValueError: If n_slots < 1
            ScheduleError: If the schedule names ports the switches do not have
        """
        if n_slots < 1:
            raise ValueError(f"n_slots must be >= 1, got {n_slots}")
        self._check_schedule(schedule)
        rng = np.random.default_rng(seed)
        config = self.config
        stats = LossStatistics(slots=n_slots)

        generated = bernoulli_slots(n_slots, config.pair_gen_prob_per_pulse, rng)
        stats.pairs_generated = int(generated.size)
        if not len(schedule):
            logger.info("Empty schedule: %d slots simulated, no records", n_slots)
            SIMULATED_SLOTS.inc(n_slots)
            return CoincidenceLog(), stats

        stats.routed_slots = int(sum(
            max(0, min(entry.slot_end, n_slots - 1) - entry.slot_start + 1) for entry in schedule.entries
        ))
        routed = generated[schedule.entry_indices(generated) >= 0]
        arrived_a = routed[rng.random(routed.size) < self.transmittance_a]
        arrived_b = routed[rng.random(routed.size) < self.transmittance_b]

        dark_a = bernoulli_slots(n_slots, config.dark_count_prob_per_slot, rng)
        dark_b = bernoulli_slots(n_slots, config.dark_count_prob_per_slot, rng)
        dark_a = dark_a[schedule.entry_indices(dark_a) >= 0]
        dark_b = dark_b[schedule.entry_indices(dark_b) >= 0]

        clicks_a = np.union1d(arrived_a, dark_a)
        clicks_b = np.union1d(arrived_b, dark_b)
        slots = np.intersect1d(clicks_a, clicks_b)

        stats.arrived_a = int(arrived_a.size)
        stats.arrived_b = int(arrived_b.size)
        stats.dark_counts_a = int(dark_a.size)
        stats.dark_counts_b = int(dark_b.size)
        stats.coincidences = int(slots.size)

        pairs = schedule.pairs
        entry_pair = np.array([pairs.index(entry.pair) for entry in schedule.entries], dtype=np.int64)
        pair_index = entry_pair[schedule.entry_indices(slots)]
        theta_a, theta_b = policy.settings(slots, n_slots, rng)
        theta_a = np.asarray(theta_a, dtype=float)
        theta_b = np.asarray(theta_b, dtype=float)

        cells = self._sample_ports(pairs, pair_index, theta_a, theta_b, rng)
        outcome_a = (cells // 2).astype(np.uint8)
        # Bob's H port carries value -1, i.e. bit 1
        outcome_b = (1 - cells % 2).astype(np.uint8)

        # a click without its own photon, or with a dark count, is a coin flip
        noisy_a = ~np.isin(slots, arrived_a) | np.isin(slots, dark_a)
        noisy_b = ~np.isin(slots, arrived_b) | np.isin(slots, dark_b)
        outcome_a[noisy_a] = rng.integers(0, 2, int(noisy_a.sum()), dtype=np.uint8)
        outcome_b[noisy_b] = rng.integers(0, 2, int(noisy_b.sum()), dtype=np.uint8)

        log = CoincidenceLog(
            pairs=pairs,
            slot=slots.astype(np.int64),
            pair_index=pair_index,
            theta_a=theta_a,
            theta_b=theta_b,
            outcome_a=outcome_a,
            outcome_b=outcome_b,
        )
        SIMULATED_SLOTS.inc(n_slots)
        COINCIDENCES.inc(len(log))
        logger.info(
            "Simulated %d slots with %s policy: %d coincidences",
            n_slots, policy.describe(), len(log)
        )
        return log, stats


def run_slots(
    config: NetworkConfig,
    schedule: RoutingSchedule,
    policy: SettingPolicy,
    n_slots: int,
    seed: Optional[int] = None
) -> Tuple[CoincidenceLog, LossStatistics]:
    """
    Create a harness and simulate one run.

    Args:
        config: Network configuration
        schedule: Switch schedule
        policy: Setting policy
        n_slots: Number of slots
        seed: Seed of the run

    Returns:
        Tuple of (coincidence log, loss statistics)
    """
    harness = NetworkHarness(config)
    return harness.run(schedule, policy, n_slots, seed)
