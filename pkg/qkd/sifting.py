"""
Sifting, CHSH security check and QBER estimation for E91 records.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from analysis import CHSH_KEYS, ChshEstimate, chsh_estimate
from simulation import CoincidenceLog, CountTable

from .interfaces import QberReport, QberThresholdExceededError, SiftedKey

logger = logging.getLogger(__name__)

# Settings with theta_a == theta_b that form the key
KEY_ANGLES = (22.5, 45.0)

QBER_THRESHOLD = 0.11
DEFAULT_QBER_FRACTION = 0.2
MIN_QBER_KEY_LENGTH = 50


def sift(log: CoincidenceLog) -> Tuple[SiftedKey, SiftedKey]:
    """
    Keep the records measured at matching key angles.

    Outcome bits are used as they are: the sign convention already makes
    matched-basis outcomes of the source equal.

    Returns:
        (Alice's key, Bob's key) over identical slots
    """
    matched = np.isclose(log.theta_a, log.theta_b)
    keyed = np.zeros(len(log), dtype=bool)
    for angle in KEY_ANGLES:
        keyed |= np.isclose(log.theta_a, angle)
    kept = log.select(matched & keyed)
    order = np.argsort(kept.slot, kind="stable")
    slots = kept.slot[order]
    key_a = SiftedKey(kept.outcome_a[order], slots)
    key_b = SiftedKey(kept.outcome_b[order], slots)
    logger.debug("Sifted %d of %d records", len(key_a), len(log))
    return key_a, key_b


def chsh_security_check(
    log: CoincidenceLog,
    resamples: int = 1000,
    seed: Optional[int] = None
) -> ChshEstimate:
    """
    CHSH estimate from the records at the four Bell-test settings.

    The session passes when s_value - 2 * std_error > 2
    (ChshEstimate.violates()).

    Raises:
        IncompleteDataError: If a CHSH setting has too few records
    """
    tables = CountTable.from_log(log).restricted(CHSH_KEYS)
    estimate = chsh_estimate(tables, resamples=resamples, seed=seed)
    logger.info(
        "CHSH check: S = %.4f +/- %.4f (%s)",
        estimate.s_value, estimate.std_error, "pass" if estimate.violates() else "fail"
    )
    return estimate


def estimate_qber(
    key_a: SiftedKey,
    key_b: SiftedKey,
    fraction: float = DEFAULT_QBER_FRACTION,
    seed: Optional[int] = None,
    threshold: Optional[float] = QBER_THRESHOLD
) -> QberReport:
    """
    Estimate the QBER on a random sample of the sifted keys.

    Args:
        key_a: Alice's sifted key
        key_b: Bob's sifted key
        fraction: Share of positions to disclose
        seed: Seed of the sample choice
        threshold: Abort threshold; None disables the abort

    Returns:
        QberReport; the disclosed positions must be removed from both keys

    Raises:
        ValueError: If the keys differ in length or are shorter than 50 bits
        QberThresholdExceededError: If gamma >= threshold
    """
    if len(key_a) != len(key_b):
        raise ValueError(f"Sifted keys differ in length: {len(key_a)} != {len(key_b)}")
    if len(key_a) < MIN_QBER_KEY_LENGTH:
        raise ValueError(f"QBER estimation needs >= {MIN_QBER_KEY_LENGTH} bits, got {len(key_a)}")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"Sample fraction must lie in (0, 1], got {fraction}")

    rng = np.random.default_rng(seed)
    sample_size = math.ceil(fraction * len(key_a))
    positions = np.sort(rng.choice(len(key_a), size=sample_size, replace=False))
    gamma = float(np.mean(key_a.bits[positions] != key_b.bits[positions]))
    report = QberReport(gamma=gamma, sample_size=sample_size, disclosed_positions=positions)
    logger.info("QBER estimate %.4f on %d disclosed bits", gamma, sample_size)

    if threshold is not None and gamma >= threshold:
        raise QberThresholdExceededError(gamma, threshold)
    return report
