"""
Optics Network Interfaces

This module defines the setting-policy interface and the exceptions of the
network simulation.
"""
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np


class SimulationError(Exception):
    """Base exception for network simulation errors."""
    pass


class NetworkConfigError(SimulationError, ValueError):
    """Raised when a network configuration is invalid or cannot be loaded."""
    pass


class ScheduleError(SimulationError, ValueError):
    """Raised when a routing schedule violates its invariants."""
    pass


class SettingPolicy(ABC):
    """
    Interface for measurement-setting policies.

    A policy decides the EOM angles (in degrees) of both ends for the slots
    that produced a coincidence.
    """

    name: str = "generic"

    @abstractmethod
    def settings(
        self,
        slots: np.ndarray,
        n_slots: int,
        rng: np.random.Generator
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Choose the angles for the given slots.

        Args:
            slots: Sorted slot indices within the run
            n_slots: Total number of slots in the run
            rng: Generator of the simulation session

        Returns:
            Tuple of (theta_a_deg, theta_b_deg) arrays aligned with slots
        """
        pass

    def describe(self) -> str:
        """Short human-readable policy description."""
        return self.name
