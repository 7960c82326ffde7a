"""
Analysis Interfaces

Result types and exceptions of the count-data analysis.
"""
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

# A curve must span at least one period of cos(2 theta_b)
MIN_FRINGE_ANGLES = 5
MIN_FRINGE_SPAN_DEG = 90.0

FRINGE_BASES = ("Z", "X")


class AnalysisError(Exception):
    """Base exception for analysis errors."""
    pass


class UndefinedEstimateError(AnalysisError, ValueError):
    """Raised when an estimate is undefined, e.g. a correlation of zero counts."""
    pass


class FitFailureError(AnalysisError):
    """Raised when the fringe fit degenerates."""
    pass


class IncompleteDataError(AnalysisError):
    """Raised when required settings are missing or undersampled."""
    pass


@dataclass(frozen=True)
class FringeCurve:
    """
    Coincidence counts versus Bob's analyzer angle.

    Attributes:
        basis: "Z" (Alice at 0 degrees) or "X" (Alice at 45 degrees)
        points: (theta_b in degrees, count) pairs sorted by angle
    """

    basis: str
    points: Tuple[Tuple[float, int], ...] = field(default=())

    def __post_init__(self):
        basis = self.basis.upper()
        if basis not in FRINGE_BASES:
            raise ValueError(f"Unknown fringe basis: {self.basis}")
        points = tuple(sorted((float(theta), int(count)) for theta, count in self.points))
        if any(count < 0 for _, count in points):
            raise ValueError("Fringe counts must be >= 0")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_arrays(cls, basis: str, angles: Sequence[float], counts: Sequence[int]) -> "FringeCurve":
        return cls(basis, tuple(zip(angles, counts)))

    @property
    def angles(self) -> np.ndarray:
        return np.array([theta for theta, _ in self.points], dtype=float)

    @property
    def counts(self) -> np.ndarray:
        return np.array([count for _, count in self.points], dtype=float)

    def is_fittable(self) -> bool:
        """At least five distinct angles spanning 180 degrees of 2 theta_b."""
        angles = np.unique(self.angles)
        return angles.size >= MIN_FRINGE_ANGLES and angles[-1] - angles[0] >= MIN_FRINGE_SPAN_DEG


@dataclass(frozen=True)
class ChshEstimate:
    """CHSH value with its bootstrap standard error."""

    s_value: float
    std_error: float

    def __post_init__(self):
        if not math.isfinite(self.std_error) or self.std_error < 0:
            raise ValueError(f"Invalid CHSH standard error: {self.std_error}")

    def violates(self, sigmas: float = 2.0) -> bool:
        """True when S exceeds the classical bound by more than sigmas standard errors."""
        return self.s_value - sigmas * self.std_error > 2.0


@dataclass(frozen=True)
class PairSummary:
    """One row of the pairwise entanglement table."""

    pair: str
    v_z: float
    v_z_error: float
    v_x: float
    v_x_error: float
    fidelity_bound: float
    fidelity_bound_error: float
    s_value: float
    s_error: float

    @property
    def violates(self) -> bool:
        return self.s_value - 2.0 * self.s_error > 2.0
