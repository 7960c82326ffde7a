"""
Statistical privacy audit of secure-sum announcements.

With uniform pads every announcement is uniform on Z_{2^n} whatever the
inputs. The audit checks this per party with a chi-square goodness-of-fit
test, and compares the announcements of two input vectors with a two-sample
chi-square test of homogeneity.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from .pads import ring_announcements

logger = logging.getLogger(__name__)

MAX_AUDIT_BITS = 12
MIN_AUDIT_ROUNDS = 10_000


def sample_announcements(
    inputs: Sequence[int],
    n: int,
    rounds: int,
    seed: Optional[int] = None,
    constant_pads: bool = False
) -> np.ndarray:
    """
    Announcements of many rounds with fresh uniform pads.

    Args:
        inputs: Input of every party
        n: Bit width
        rounds: Number of rounds
        seed: Pad seed
        constant_pads: Reuse one set of pads in every round (broken on purpose)

    Returns:
        (rounds, N) array of announcements
    """
    values = np.asarray(inputs, dtype=np.int64)
    if np.any(values < 0) or np.any(values >= (1 << n)):
        raise ValueError(f"Inputs must lie in [0, 2^{n})")
    rng = np.random.default_rng(seed)
    shape = (1 if constant_pads else rounds, values.size)
    pads = rng.integers(0, 1 << n, size=shape, dtype=np.int64)
    if constant_pads:
        pads = np.repeat(pads, rounds, axis=0)
    return ring_announcements(np.broadcast_to(values, pads.shape), pads, n)


@dataclass
class PartyAudit:
    """Test results of one party."""

    party: int
    uniformity_statistic: float
    uniformity_p: float
    two_sample_statistic: float
    two_sample_p: float


@dataclass
class AuditReport:
    """Privacy audit over all parties."""

    n: int
    rounds: int
    parties: List[PartyAudit] = field(default_factory=list)

    def min_uniformity_p(self) -> float:
        return min(p.uniformity_p for p in self.parties)

    def min_two_sample_p(self) -> float:
        return min(p.two_sample_p for p in self.parties)

    def passes(self, alpha: float = 1e-3) -> bool:
        return self.min_uniformity_p() > alpha and self.min_two_sample_p() > alpha


def value_histogram(samples: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(np.asarray(samples, dtype=np.int64), minlength=1 << n)


def uniformity_test(samples: np.ndarray, n: int):
    """Chi-square goodness of fit against the uniform law on Z_{2^n}."""
    result = stats.chisquare(value_histogram(samples, n))
    return float(result.statistic), float(result.pvalue)


def two_sample_test(first: np.ndarray, second: np.ndarray, n: int):
    """Chi-square test that two samples share one distribution."""
    table = np.vstack([value_histogram(first, n), value_histogram(second, n)])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return 0.0, 1.0
    statistic, p_value, _, _ = stats.chi2_contingency(table, correction=False)
    return float(statistic), float(p_value)


def privacy_audit(
    inputs_a: Sequence[int],
    inputs_b: Sequence[int],
    n: int = 8,
    rounds: int = 100_000,
    seed: Optional[int] = None,
    constant_pads: bool = False
) -> AuditReport:
    """
    Audit announcements for two input vectors.

    Args:
        inputs_a: First input vector
        inputs_b: Second input vector of the same length
        n: Bit width, at most 12
        rounds: Rounds per input vector, at least 10^4
        seed: Seed of the pads
        constant_pads: Reuse one set of pads (broken on purpose)

    Returns:
        AuditReport with per-party uniformity and two-sample p-values
    """
    if not 1 <= n <= MAX_AUDIT_BITS:
        raise ValueError(f"Audit needs 1 <= n <= {MAX_AUDIT_BITS}, got {n}")
    if rounds < MIN_AUDIT_ROUNDS:
        raise ValueError(f"Audit needs at least {MIN_AUDIT_ROUNDS} rounds, got {rounds}")
    if len(inputs_a) != len(inputs_b):
        raise ValueError("Input vectors differ in length")
    seed_a, seed_b = np.random.SeedSequence(seed).spawn(2)
    first = sample_announcements(inputs_a, n, rounds, seed_a, constant_pads)
    second = sample_announcements(inputs_b, n, rounds, seed_b, constant_pads)

    report = AuditReport(n=n, rounds=rounds)
    for party in range(first.shape[1]):
        u_stat, u_p = uniformity_test(first[:, party], n)
        t_stat, t_p = two_sample_test(first[:, party], second[:, party], n)
        report.parties.append(PartyAudit(party, u_stat, u_p, t_stat, t_p))
        logger.debug("Party %d: uniformity p=%.4g, two-sample p=%.4g", party, u_p, t_p)
    logger.info(
        "Privacy audit n=%d, %d rounds: min uniformity p=%.4g, min two-sample p=%.4g",
        n, rounds, report.min_uniformity_p(), report.min_two_sample_p()
    )
    return report
