"""
Universal hashing.

A 64-bit multiply-shift hash verifies reconciled blocks; Toeplitz matrices
over GF(2) perform privacy amplification.
"""

from typing import Optional, Sequence

import numpy as np
from scipy.linalg import matmul_toeplitz

from .interfaces import as_bits

HASH_BITS = 64
_WORD_BITS = 64
_COEFF_MASK = (1 << 128) - 1


def _words(bits: np.ndarray) -> list:
    """Pack bits into 64-bit big-endian words, prefixed by the bit length."""
    padded = np.concatenate([bits, np.zeros((-bits.size) % _WORD_BITS, dtype=np.uint8)])
    raw = np.packbits(padded).tobytes()
    words = [int.from_bytes(raw[i:i + 8], "big") for i in range(0, len(raw), 8)]
    return [bits.size] + words


class MultiplyShiftHash:
    """
    Seeded multiply-shift hash of bit strings to 64 bits.

    Vector form: h(w) = ((a_0 + sum a_{i+1} w_i) mod 2^128) >> 64 with
    random 128-bit coefficients a_i. Coefficients are drawn lazily from the
    seed, so hashes of strings of any length share a prefix of coefficients.
    """

    def __init__(self, seed: Optional[int] = None):
        self._rng = np.random.default_rng(seed)
        self._coefficients: list = []

    def _coefficient(self, index: int) -> int:
        while len(self._coefficients) <= index:
            self._coefficients.append(int.from_bytes(self._rng.bytes(16), "big"))
        return self._coefficients[index]

    def digest(self, bits: Sequence[int]) -> int:
        """64-bit hash of a bit string."""
        words = _words(as_bits(bits))
        total = self._coefficient(0)
        for i, word in enumerate(words):
            total += self._coefficient(i + 1) * word
        return (total & _COEFF_MASK) >> (128 - HASH_BITS)


def verification_hash(bits: Sequence[int], seed: Optional[int] = None) -> int:
    """One-shot 64-bit verification hash."""
    return MultiplyShiftHash(seed).digest(bits)


def toeplitz_seed_length(input_length: int, output_length: int) -> int:
    """An m x n Toeplitz matrix is fixed by m + n - 1 bits."""
    return output_length + input_length - 1


def toeplitz_hash(bits: Sequence[int], seed_bits: Sequence[int], output_length: int) -> np.ndarray:
    """
    Multiply a bit string by a Toeplitz matrix over GF(2).

    The matrix has first column seed_bits[:m] and first row
    (seed_bits[0], seed_bits[m:]). The product runs through scipy's FFT
    Toeplitz multiplication and is reduced mod 2.

    Args:
        bits: Input of length n
        seed_bits: m + n - 1 bits defining the matrix
        output_length: m

    Returns:
        m output bits
    """
    x = as_bits(bits)
    seed = as_bits(seed_bits)
    n, m = x.size, output_length
    if m < 0:
        raise ValueError("Output length must be >= 0")
    if seed.size != toeplitz_seed_length(n, m):
        raise ValueError(f"Toeplitz seed needs {toeplitz_seed_length(n, m)} bits, got {seed.size}")
    if m == 0 or n == 0:
        return np.zeros(m, dtype=np.uint8)
    column = seed[:m].astype(float)
    row = np.concatenate([seed[:1], seed[m:]]).astype(float)
    product = matmul_toeplitz((column, row), x.astype(float))
    return (np.rint(product).astype(np.int64) % 2).astype(np.uint8)
