"""
Tests for hashing, privacy amplification and key files.
"""

import numpy as np
import pytest
from scipy.linalg import toeplitz

from qkd import (
    InsufficientKeyError,
    LeakAccounting,
    MultiplyShiftHash,
    ToeplitzAmplifier,
    binary_entropy,
    export_key_hex,
    final_key_length,
    import_key_hex,
    monobit_ok,
    privacy_amplify,
    toeplitz_hash,
    verification_hash,
)
from qkd.hashing import toeplitz_seed_length


def random_bits(size, seed):
    return np.random.default_rng(seed).integers(0, 2, size, dtype=np.uint8)


def test_verification_hash_is_seeded():
    bits = random_bits(4096, 1)
    assert verification_hash(bits, seed=2) == verification_hash(bits, seed=2)
    assert verification_hash(bits, seed=2) != verification_hash(bits, seed=3)
    assert 0 <= verification_hash(bits, seed=2) < 2 ** 64


def test_verification_hash_detects_a_flip():
    bits = random_bits(4096, 4)
    flipped = bits.copy()
    flipped[100] ^= 1
    hasher = MultiplyShiftHash(5)
    assert hasher.digest(bits) != hasher.digest(flipped)


def test_verification_hash_sees_trailing_zeros():
    hasher = MultiplyShiftHash(6)
    assert hasher.digest([1, 0]) != hasher.digest([1, 0, 0])


def test_toeplitz_matches_dense_matrix():
    n, m = 50, 20
    x = random_bits(n, 7)
    seed = random_bits(toeplitz_seed_length(n, m), 8)
    matrix = toeplitz(seed[:m], np.concatenate([seed[:1], seed[m:]]))
    expected = (matrix.astype(np.int64) @ x.astype(np.int64)) % 2
    assert np.array_equal(toeplitz_hash(x, seed, m), expected)


def test_toeplitz_is_linear_over_gf2():
    n, m = 1000, 300
    seed = random_bits(toeplitz_seed_length(n, m), 9)
    x, y = random_bits(n, 10), random_bits(n, 11)
    assert np.array_equal(toeplitz_hash(x ^ y, seed, m), toeplitz_hash(x, seed, m) ^ toeplitz_hash(y, seed, m))
    assert not toeplitz_hash(np.zeros(n, dtype=np.uint8), seed, m).any()


def test_toeplitz_seed_length_checked():
    with pytest.raises(ValueError):
        toeplitz_hash(random_bits(10, 1), random_bits(10, 2), 5)


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.05) == pytest.approx(0.286397, abs=1e-6)
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_final_key_length_formula():
    assert final_key_length(8192, 4224, 0.0, 300) == 3668
    assert final_key_length(8192, 4224, 0.05, 300) == 8192 - 4224 - 2347 - 300


def test_privacy_amplify_output():
    key = random_bits(8192, 12)
    accounting = LeakAccounting(syndrome_bits=4096, hash_bits=128, qber_sample_bits=2400)
    first = privacy_amplify(key, 4224, 0.0, 300, seed=13, accounting=accounting)
    second = privacy_amplify(key, 4224, 0.0, 300, seed=13, accounting=accounting)
    assert len(first) == 3668
    assert first.matches(second)
    assert first.security_param == 300
    assert first.leak_accounting.reconciliation_leak == 4224
    assert monobit_ok(first.bits)


def test_amplifier_matches_privacy_amplify():
    key = random_bits(2000, 14)
    final = privacy_amplify(key, 500, 0.02, 100, seed=15)
    direct = ToeplitzAmplifier().amplify(key, len(final), seed=15)
    assert np.array_equal(final.bits, direct)


def test_privacy_amplify_without_room():
    with pytest.raises(InsufficientKeyError):
        privacy_amplify(random_bits(1000, 16), 600, 0.05, 300)
    with pytest.raises(InsufficientKeyError):
        privacy_amplify(random_bits(100, 17), 0, 0.0, 300)


def test_monobit():
    assert not monobit_ok(np.ones(2000, dtype=np.uint8))
    assert monobit_ok(np.tile([0, 1], 1000))
    assert not monobit_ok([])


def test_key_file_roundtrip(tmp_path):
    bits = random_bits(1301, 18)
    path = export_key_hex(bits, tmp_path / "alice.key")
    lines = path.read_text().splitlines()
    assert lines[0] == "bits=1301"
    assert lines[1].startswith("hex=")
    assert np.array_equal(import_key_hex(path), bits)


def test_key_file_malformed(tmp_path):
    path = tmp_path / "broken.key"
    path.write_text("hex=ff\n")
    with pytest.raises(ValueError):
        import_key_hex(path)
    path.write_text("bits=16\nhex=ff\n")
    with pytest.raises(ValueError):
        import_key_hex(path)
