"""
Measurement-setting policies.

FRINGE sweeps Bob's angle with Alice fixed, E91 draws random settings for
key distribution and CHSH cycles the four Bell-test settings.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from quantum import CHSH_SETTINGS
from simulation.interfaces import SettingPolicy

# Alice's fixed angle per fringe basis, in degrees
FRINGE_ALICE_ANGLE = {"Z": 0.0, "X": 45.0}

E91_ALICE_ANGLES = (0.0, 22.5, 45.0)
E91_BOB_ANGLES = (22.5, 45.0, 67.5)


def _block_index(slots: np.ndarray, n_slots: int, n_blocks: int) -> np.ndarray:
    """Index of the equal contiguous block each slot falls in."""
    return np.minimum((np.asarray(slots, dtype=np.int64) * n_blocks) // max(n_slots, 1), n_blocks - 1)


def default_fringe_angles(points: int = 9) -> Tuple[float, ...]:
    """Evenly spaced Bob angles covering one fringe period, [0, 180) degrees."""
    if points < 5:
        raise ValueError("A fringe needs at least 5 angles")
    return tuple(float(x) for x in np.linspace(0.0, 180.0, points, endpoint=False))


class FixedPolicy(SettingPolicy):
    """Both ends keep one setting for the whole run."""

    name = "FIXED"

    def __init__(self, theta_a: float = 0.0, theta_b: float = 0.0):
        self.theta_a = float(theta_a)
        self.theta_b = float(theta_b)

    def settings(self, slots, n_slots, rng):
        size = len(slots)
        return np.full(size, self.theta_a), np.full(size, self.theta_b)

    def describe(self) -> str:
        return f"FIXED({self.theta_a:g},{self.theta_b:g})"


class FringePolicy(SettingPolicy):
    """
    Alice fixed at 0 degrees (Z) or 45 degrees (X); Bob stepped through the
    angle list, each angle holding an equal share of the slots.
    """

    name = "FRINGE"

    def __init__(self, basis: str = "Z", theta_b_list: Optional[Sequence[float]] = None):
        basis = basis.upper()
        if basis not in FRINGE_ALICE_ANGLE:
            raise ValueError(f"Unknown fringe basis: {basis}")
        self.basis = basis
        self.theta_b_list = tuple(float(t) for t in (theta_b_list or default_fringe_angles()))
        if not self.theta_b_list:
            raise ValueError("Fringe policy needs at least one angle")

    @property
    def theta_a(self) -> float:
        return FRINGE_ALICE_ANGLE[self.basis]

    def settings(self, slots, n_slots, rng):
        angles = np.asarray(self.theta_b_list)
        theta_b = angles[_block_index(slots, n_slots, len(angles))]
        return np.full(len(slots), self.theta_a), theta_b

    def describe(self) -> str:
        return f"FRINGE({self.basis},{len(self.theta_b_list)} angles)"


class E91Policy(SettingPolicy):
    """
    Independent uniform choices: Alice over {0, 22.5, 45}, Bob over
    {22.5, 45, 67.5} degrees.

    With a seed the policy draws from its own generator, reset on every run;
    otherwise it uses the session generator.
    """

    name = "E91"

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed

    def settings(self, slots, n_slots, rng):
        source = np.random.default_rng(self.seed) if self.seed is not None else rng
        size = len(slots)
        theta_a = np.asarray(E91_ALICE_ANGLES)[source.integers(0, 3, size)]
        theta_b = np.asarray(E91_BOB_ANGLES)[source.integers(0, 3, size)]
        return theta_a, theta_b


class ChshPolicy(SettingPolicy):
    """The four CHSH settings, one after the other in equal slot blocks."""

    name = "CHSH"

    def settings(self, slots, n_slots, rng):
        table = np.array([(a, b) for a, b, _ in CHSH_SETTINGS])
        chosen = table[_block_index(slots, n_slots, len(table))]
        return chosen[:, 0].copy(), chosen[:, 1].copy()


def policy_from_name(name: str, **kwargs) -> SettingPolicy:
    """Instantiate a policy by its name (FIXED, FRINGE, E91, CHSH)."""
    policies = {"FIXED": FixedPolicy, "FRINGE": FringePolicy, "E91": E91Policy, "CHSH": ChshPolicy}
    try:
        return policies[name.upper()](**kwargs)
    except KeyError:
        raise ValueError(f"Unknown setting policy: {name}") from None
