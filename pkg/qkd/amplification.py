"""
Toeplitz privacy amplification.

The final length follows m = n - leak - ceil(n h2(gamma)) - s, where s is
the security parameter (eavesdropper information reduced by 2^-s).
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from .hashing import toeplitz_hash, toeplitz_seed_length
from .interfaces import FinalKey, InsufficientKeyError, LeakAccounting, PrivacyAmplifier, as_bits

logger = logging.getLogger(__name__)

DEFAULT_SECURITY_PARAM = 300
MONOBIT_MIN_LENGTH = 1000


def binary_entropy(p: float) -> float:
    """h2(p) in bits; h2(0) = h2(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Probability {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def final_key_length(n: int, leak_bits: int, gamma: float, s: int = DEFAULT_SECURITY_PARAM) -> int:
    """Output length n - leak - ceil(n h2(gamma)) - s (may be <= 0)."""
    return n - leak_bits - math.ceil(n * binary_entropy(gamma)) - s


def monobit_ok(bits: Sequence[int]) -> bool:
    """Frequency sanity check |ones/m - 0.5| < 3/sqrt(m)."""
    array = as_bits(bits)
    if array.size == 0:
        return False
    return abs(array.mean() - 0.5) < 3.0 / math.sqrt(array.size)


class ToeplitzAmplifier(PrivacyAmplifier):
    """Privacy amplification by a seeded random Toeplitz matrix."""

    def generate_hash_seed(self, input_length: int, output_length: int, seed=None) -> np.ndarray:
        """Random m + n - 1 bits fixing the matrix."""
        rng = np.random.default_rng(seed)
        return rng.integers(0, 2, size=toeplitz_seed_length(input_length, output_length), dtype=np.uint8)

    def amplify(self, key, output_length, seed=None):
        key = as_bits(key)
        matrix_seed = self.generate_hash_seed(key.size, output_length, seed)
        return toeplitz_hash(key, matrix_seed, output_length)


def privacy_amplify(
    key: Sequence[int],
    leak_bits: int,
    gamma: float,
    s: int = DEFAULT_SECURITY_PARAM,
    seed: Optional[int] = None,
    accounting: Optional[LeakAccounting] = None
) -> FinalKey:
    """
    Compress a reconciled key to its secret final key.

    Both parties must pass the same seed to obtain the same matrix.

    Args:
        key: Reconciled bits (n_rec of them)
        leak_bits: Bits disclosed during reconciliation
        gamma: Estimated QBER
        s: Security parameter
        seed: Seed of the Toeplitz matrix
        accounting: Disclosure record stored with the key

    Returns:
        FinalKey of length n_rec - leak_bits - ceil(n_rec h2(gamma)) - s

    Raises:
        InsufficientKeyError: If that length is not positive
    """
    bits = as_bits(key)
    n = bits.size
    if leak_bits < 0 or s < 0:
        raise ValueError("Leak and security parameter must be >= 0")
    m = final_key_length(n, leak_bits, gamma, s)
    if n < leak_bits + s or m <= 0:
        raise InsufficientKeyError(
            f"No secret key extractable: n={n}, leak={leak_bits}, h2 term={math.ceil(n * binary_entropy(gamma))}, s={s}"
        )
    output = ToeplitzAmplifier().amplify(bits, m, seed)
    logger.info("Privacy amplification: %d -> %d bits", n, m)
    return FinalKey(bits=output, security_param=s, leak_accounting=accounting or LeakAccounting(syndrome_bits=leak_bits))
