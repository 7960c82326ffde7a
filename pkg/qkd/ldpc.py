"""
Regular (3,6) LDPC codes and syndrome-based reconciliation.

Alice discloses the syndrome of her block; Bob decodes his block towards
the coset of that syndrome with sum-product belief propagation and both
sides compare 64-bit verification hashes.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from utils.metrics import RECONCILED_BLOCKS

from .hashing import HASH_BITS, MultiplyShiftHash
from .interfaces import CodeConstructionError, ReconciliationResult, Reconciler, as_bits

logger = logging.getLogger(__name__)

VARIABLE_DEGREE = 3
CHECK_DEGREE = 6
DEFAULT_BLOCK_LEN = 4096
MAX_BP_ITERATIONS = 60
MAX_REPAIR_PASSES = 200

_TANH_LIMIT = 1.0 - 1e-12


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """
    Regular (3,6) parity-check code of rate 1/2.

    Attributes:
        block_len: Number of variable nodes n
        check_count: Number of checks m = n/2
        check_vars: (m, 6) variables of every check
        var_checks: (n, 3) checks of every variable
        seed: Construction seed
    """

    block_len: int
    check_count: int
    check_vars: np.ndarray = field(repr=False)
    var_checks: np.ndarray = field(repr=False)
    seed: Optional[int] = None

    def parity_matrix(self) -> sparse.csr_matrix:
        """Sparse m x n parity-check matrix H."""
        rows = np.repeat(np.arange(self.check_count), CHECK_DEGREE)
        data = np.ones(rows.size, dtype=np.int64)
        return sparse.csr_matrix((data, (rows, self.check_vars.reshape(-1))),
                                 shape=(self.check_count, self.block_len))

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        """H x mod 2."""
        bits = as_bits(bits)
        if bits.size != self.block_len:
            raise ValueError(f"Block has {bits.size} bits, code length is {self.block_len}")
        return (bits[self.check_vars].sum(axis=1) % 2).astype(np.uint8)

    def four_cycles(self) -> int:
        """Number of variable pairs sharing two or more checks."""
        return int(_four_cycle_pairs(self.var_checks.reshape(-1), self.block_len, self.check_count).shape[0])


def _duplicate_edges(var_checks: np.ndarray) -> np.ndarray:
    """Edge index of a repeated check for every variable that has one."""
    first = var_checks[:, 0] == var_checks[:, 1]
    second = (var_checks[:, 2] == var_checks[:, 0]) | (var_checks[:, 2] == var_checks[:, 1])
    variables = np.flatnonzero(first | second)
    offsets = np.where(first[variables], 1, 2)
    return variables * VARIABLE_DEGREE + offsets


def _four_cycle_pairs(edge_checks: np.ndarray, n: int, m: int) -> np.ndarray:
    """(u, v) variable pairs, u < v, that share at least two checks."""
    variables = np.repeat(np.arange(n), VARIABLE_DEGREE)
    h = sparse.csr_matrix((np.ones(edge_checks.size, dtype=np.int64), (edge_checks, variables)), shape=(m, n))
    overlap = (h.T @ h).tocoo()
    mask = (overlap.row < overlap.col) & (overlap.data >= 2)
    return np.stack([overlap.row[mask], overlap.col[mask]], axis=1)


def _swap(edge_checks: np.ndarray, edge: int, rng: np.random.Generator) -> None:
    other = int(rng.integers(edge_checks.size))
    edge_checks[edge], edge_checks[other] = edge_checks[other], edge_checks[edge]


def _repair_duplicates(edge_checks: np.ndarray, n: int, rng: np.random.Generator, max_passes: int) -> bool:
    """Swap away repeated edges; True once none remain."""
    for _ in range(max_passes):
        duplicates = _duplicate_edges(edge_checks.reshape(n, VARIABLE_DEGREE))
        if not duplicates.size:
            return True
        for edge in duplicates:
            _swap(edge_checks, int(edge), rng)
    return not _duplicate_edges(edge_checks.reshape(n, VARIABLE_DEGREE)).size


def ldpc_generate(
    block_len: int = DEFAULT_BLOCK_LEN,
    seed: Optional[int] = None,
    max_passes: int = MAX_REPAIR_PASSES,
    require_girth6: bool = False
) -> LdpcCode:
    """
    Build a regular (3,6) code by a seeded random edge permutation.

    Repeated edges and 4-cycles are repaired by swapping the check ends of
    offending edges with random edges, which keeps every degree exact.

    Args:
        block_len: Code length n, even so that 3n edges fill n/2 checks of degree 6
        seed: Construction seed
        max_passes: Retry budget of repair passes
        require_girth6: Fail instead of warning when 4-cycles remain

    Returns:
        LdpcCode

    Raises:
        ValueError: If block_len is not a positive even number
        CodeConstructionError: If repeated edges (or, with require_girth6,
            4-cycles) survive the retry budget
    """
    if block_len <= 0 or block_len % 2:
        raise ValueError(f"Block length must be a positive even number, got {block_len}")
    n = block_len
    m = n // 2
    rng = np.random.default_rng(seed)
    edge_checks = rng.permutation(np.repeat(np.arange(m), CHECK_DEGREE))

    for _ in range(max_passes):
        _repair_duplicates(edge_checks, n, rng, max_passes)
        cycles = _four_cycle_pairs(edge_checks, n, m)
        if not cycles.size:
            break
        var_checks = edge_checks.reshape(n, VARIABLE_DEGREE)
        for u, v in cycles:
            shared = np.intersect1d(var_checks[u], var_checks[v])
            if shared.size < 2:
                continue
            position = int(np.flatnonzero(var_checks[v] == shared[0])[0])
            _swap(edge_checks, int(v) * VARIABLE_DEGREE + position, rng)

    var_checks = edge_checks.reshape(n, VARIABLE_DEGREE)
    if not _repair_duplicates(edge_checks, n, rng, max_passes):
        raise CodeConstructionError(f"Repeated edges remain after {max_passes} repair passes")
    cycles = _four_cycle_pairs(edge_checks, n, m)
    if cycles.size:
        if require_girth6:
            raise CodeConstructionError(f"{len(cycles)} 4-cycles remain after {max_passes} repair passes")
        logger.warning("LDPC code of length %d keeps %d 4-cycles", n, len(cycles))

    order = np.argsort(edge_checks, kind="stable")
    check_vars = (order // VARIABLE_DEGREE).reshape(m, CHECK_DEGREE)
    return LdpcCode(
        block_len=n,
        check_count=m,
        check_vars=check_vars,
        var_checks=var_checks.copy(),
        seed=seed,
    )


def channel_llr(bits: np.ndarray, gamma: float) -> np.ndarray:
    """Prior log-likelihood ratios (1 - 2y) log((1 - gamma)/gamma) of a BSC."""
    return (1.0 - 2.0 * as_bits(bits).astype(float)) * math.log((1.0 - gamma) / gamma)


def _leave_one_out_products(t: np.ndarray) -> np.ndarray:
    """Product over each row of all entries except the one in each column."""
    ones = np.ones((t.shape[0], 1))
    prefix = np.cumprod(np.hstack([ones, t[:, :-1]]), axis=1)
    suffix = np.cumprod(np.hstack([ones, t[:, :0:-1]]), axis=1)[:, ::-1]
    return prefix * suffix


def decode_syndrome(
    code: LdpcCode,
    received: np.ndarray,
    syndrome: np.ndarray,
    gamma: float,
    max_iterations: int = MAX_BP_ITERATIONS
) -> Tuple[np.ndarray, int, bool]:
    """
    Sum-product decoding towards a target syndrome.

    Args:
        code: Parity-check code
        received: Bob's bits
        syndrome: Alice's syndrome
        gamma: Channel error probability
        max_iterations: Iteration limit

    Returns:
        (decoded bits, iterations used, converged)
    """
    prior = channel_llr(received, gamma)
    syndrome = as_bits(syndrome)
    signs = (1.0 - 2.0 * syndrome.astype(float))[:, None]
    check_vars = code.check_vars
    flat = check_vars.reshape(-1)

    posterior = prior.copy()
    to_checks = prior[check_vars]
    for iteration in range(max_iterations + 1):
        decoded = (posterior < 0).astype(np.uint8)
        if np.array_equal(code.syndrome(decoded), syndrome):
            return decoded, iteration, True
        if iteration == max_iterations:
            break
        t = np.tanh(to_checks / 2.0)
        products = np.clip(signs * _leave_one_out_products(t), -_TANH_LIMIT, _TANH_LIMIT)
        to_vars = 2.0 * np.arctanh(products)
        posterior = prior + np.bincount(flat, weights=to_vars.reshape(-1), minlength=code.block_len)
        to_checks = posterior[check_vars] - to_vars
    return decoded, max_iterations, False


class LdpcReconciler(Reconciler):
    """Syndrome reconciliation with one LDPC code and hash verification."""

    def __init__(self, code: LdpcCode, max_iterations: int = MAX_BP_ITERATIONS):
        self.code = code
        self.max_iterations = max_iterations

    def reconcile(self, alice_block, bob_block, gamma_prior, hash_seed=None):
        alice = as_bits(alice_block)
        bob = as_bits(bob_block)
        n = self.code.block_len
        if alice.size != n or bob.size != n:
            raise ValueError(f"Blocks must have {n} bits, got {alice.size} and {bob.size}")
        if not 0.0 < gamma_prior < 0.5:
            raise ValueError(f"Prior QBER must lie in (0, 0.5), got {gamma_prior}")

        syndrome = self.code.syndrome(alice)
        corrected, iterations, converged = decode_syndrome(
            self.code, bob, syndrome, gamma_prior, self.max_iterations
        )
        hasher = MultiplyShiftHash(hash_seed)
        verified = converged and hasher.digest(alice) == hasher.digest(corrected)
        RECONCILED_BLOCKS.labels(verified=str(verified).lower()).inc()
        logger.debug(
            "Block reconciled in %d iterations (converged=%s, verified=%s)", iterations, converged, verified
        )
        return ReconciliationResult(
            corrected_bits=corrected,
            syndrome_bits_disclosed=self.code.check_count + HASH_BITS,
            verified=verified,
            bp_iterations=iterations,
            converged=converged,
        )


def ldpc_reconcile(
    alice_block: np.ndarray,
    bob_block: np.ndarray,
    code: LdpcCode,
    gamma_prior: float,
    hash_seed: Optional[int] = None,
    max_iterations: int = MAX_BP_ITERATIONS
) -> ReconciliationResult:
    """
    Reconcile one block with a given code.

    Args:
        alice_block: Alice's bits
        bob_block: Bob's bits
        code: Parity-check code of the block length
        gamma_prior: Decoder prior, in (0, 0.5)
        hash_seed: Seed of the verification hash
        max_iterations: BP iteration limit

    Returns:
        ReconciliationResult; unverified blocks are to be discarded
    """
    return LdpcReconciler(code, max_iterations).reconcile(alice_block, bob_block, gamma_prior, hash_seed)
