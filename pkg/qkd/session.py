"""
E91 key distribution session between one pair of end users.

Simulates E91 measurements until enough sifted bits exist, then runs the
CHSH check, QBER estimation, block-wise LDPC reconciliation and Toeplitz
privacy amplification.
"""

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from simulation import (
    CoincidenceLog,
    E91Policy,
    LossStatistics,
    NetworkConfig,
    NetworkHarness,
    RoutingSchedule,
    pair_label,
)
from simulation.records import UserPair
from utils.metrics import QKD_SESSIONS

from .amplification import DEFAULT_SECURITY_PARAM, monobit_ok, privacy_amplify
from .interfaces import (
    ChshCheckFailedError,
    FinalKey,
    InsufficientKeyError,
    LeakAccounting,
    ProtocolAbortError,
    ReconciliationResult,
)
from .ldpc import DEFAULT_BLOCK_LEN, LdpcReconciler, ldpc_generate
from .sifting import DEFAULT_QBER_FRACTION, QBER_THRESHOLD, chsh_security_check, estimate_qber, sift

logger = logging.getLogger(__name__)

DEFAULT_TARGET_SIFTED = 12000
MIN_DECODER_GAMMA = 1e-3
MAX_SIMULATION_CHUNKS = 50

# Share of E91 records that land on a key setting
_SIFT_FRACTION = 2.0 / 9.0

REPORT_CSV_COLUMNS = ["stage", "bits", "gamma", "s_value", "blocks_ok", "final_len"]

LEAK_FORMULA = "m = n - leak_EC - ceil(n*h2(gamma)) - s"


@dataclass
class PipelineReport:
    """Bit counts and estimates at every stage of one session."""

    pair: str
    slots: int
    coincidences: int
    sifted_bits: int
    s_value: float
    s_error: float
    gamma: float
    qber_sample_bits: int
    post_sample_bits: int
    block_len: int
    blocks_total: int
    blocks_ok: int
    reconciled_bits: int
    leak_bits: int
    security_param: int
    final_len: int
    keys_match: bool
    monobit_ok: bool
    leak_formula: str = LEAK_FORMULA

    def to_text(self) -> str:
        """Line-oriented key=value rendering."""
        lines = []
        for key, value in asdict(self).items():
            if isinstance(value, float):
                value = f"{value:.6g}"
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    def stage_rows(self) -> List[List[str]]:
        gamma = f"{self.gamma:.6g}"
        s_value = f"{self.s_value:.6g}"
        return [
            ["sifted", str(self.sifted_bits), "", "", "", ""],
            ["chsh", str(self.sifted_bits), "", s_value, "", ""],
            ["qber", str(self.post_sample_bits), gamma, s_value, "", ""],
            ["reconciled", str(self.reconciled_bits), gamma, s_value, str(self.blocks_ok), ""],
            ["final", str(self.final_len), gamma, s_value, str(self.blocks_ok), str(self.final_len)],
        ]

    def to_csv(self) -> str:
        """CSV with one row per pipeline stage."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(REPORT_CSV_COLUMNS)
        writer.writerows(self.stage_rows())
        return buffer.getvalue()


def _expected_sift_rate(harness: NetworkHarness) -> float:
    config = harness.config
    return config.pair_gen_prob_per_pulse * harness.transmittance_a * harness.transmittance_b * _SIFT_FRACTION


def collect_e91_records(
    harness: NetworkHarness,
    pair: UserPair,
    target_sifted: int,
    seed_sequence: np.random.SeedSequence
) -> Tuple[CoincidenceLog, LossStatistics]:
    """
    Run E91 slot chunks until the sifted key reaches the target.

    Raises:
        InsufficientKeyError: If the network delivers no key-setting
            coincidences or the chunk budget runs out
    """
    rate = _expected_sift_rate(harness)
    if rate <= 0:
        raise InsufficientKeyError(f"Network delivers no coincidences to {pair_label(pair)}")
    logs: List[CoincidenceLog] = []
    offsets: List[int] = []
    stats = LossStatistics()
    sifted = 0
    for chunk in range(MAX_SIMULATION_CHUNKS):
        missing = target_sifted - sifted
        n_slots = int(math.ceil(1.05 * missing / rate)) + 1000
        chunk_seed = seed_sequence.spawn(1)[0]
        log, chunk_stats = harness.run(RoutingSchedule.single(pair, n_slots), E91Policy(), n_slots, chunk_seed)
        offsets.append(stats.slots)
        logs.append(log)
        stats = stats.merge(chunk_stats)
        sifted += len(sift(log)[0])
        logger.debug("Chunk %d: %d slots, %d sifted bits so far", chunk, n_slots, sifted)
        if sifted >= target_sifted:
            return CoincidenceLog.concatenate(logs, offsets), stats
    raise InsufficientKeyError(
        f"Only {sifted} of {target_sifted} sifted bits after {MAX_SIMULATION_CHUNKS} simulation chunks"
    )


def _reconcile_blocks(
    reconciler: LdpcReconciler,
    key_a: np.ndarray,
    key_b: np.ndarray,
    gamma_prior: float,
    hash_seeds: List[np.random.SeedSequence],
    workers: Optional[int]
) -> List[ReconciliationResult]:
    block_len = reconciler.code.block_len

    def task(index: int) -> ReconciliationResult:
        block = slice(index * block_len, (index + 1) * block_len)
        return reconciler.reconcile(key_a[block], key_b[block], gamma_prior, hash_seeds[index])

    indices = range(len(hash_seeds))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(task, indices))
    return [task(i) for i in indices]


def run_qkd_session(
    pair: UserPair,
    config: Optional[NetworkConfig] = None,
    target_sifted: int = DEFAULT_TARGET_SIFTED,
    seed: Optional[int] = None,
    block_len: int = DEFAULT_BLOCK_LEN,
    qber_fraction: float = DEFAULT_QBER_FRACTION,
    security_param: int = DEFAULT_SECURITY_PARAM,
    resamples: int = 1000,
    workers: Optional[int] = None
) -> Tuple[FinalKey, FinalKey, PipelineReport]:
    """
    Distribute a key between two end users.

    Args:
        pair: (Alice-side user, Bob-side user)
        config: Network configuration (defaults to NetworkConfig())
        target_sifted: Sifted bits to collect before post-processing
        seed: Session seed; None draws OS entropy
        block_len: LDPC block length
        qber_fraction: Share of sifted bits disclosed for the QBER estimate
        security_param: Privacy amplification security parameter s
        resamples: Bootstrap resamples of the CHSH error
        workers: Threads for block reconciliation (serial when None or 1)

    Returns:
        (Alice's final key, Bob's final key, pipeline report)

    Raises:
        ValueError: If target_sifted < 2 * block_len
        QberThresholdExceededError: If the QBER reaches 11%
        ChshCheckFailedError: If S - 2 sigma <= 2
        InsufficientKeyError: If no secret key can be extracted
    """
    if target_sifted < 2 * block_len:
        raise ValueError(f"Target of {target_sifted} sifted bits is below two blocks of {block_len}")
    harness = NetworkHarness(config)
    label = pair_label(pair)
    sim_seq, chsh_seq, qber_seq, code_seq, hash_seq, pa_seq = np.random.SeedSequence(seed).spawn(6)

    try:
        log, stats = collect_e91_records(harness, pair, target_sifted, sim_seq)
        key_a, key_b = sift(log)
        key_a, key_b = key_a.truncate(target_sifted), key_b.truncate(target_sifted)
        logger.info("%s: %d sifted bits from %d coincidences", label, len(key_a), len(log))

        chsh = chsh_security_check(log, resamples=resamples, seed=chsh_seq)
        qber = estimate_qber(key_a, key_b, qber_fraction, seed=qber_seq, threshold=QBER_THRESHOLD)
        if not chsh.violates():
            raise ChshCheckFailedError(chsh.s_value, chsh.std_error, gamma=qber.gamma)

        key_a = key_a.without(qber.disclosed_positions)
        key_b = key_b.without(qber.disclosed_positions)
        post_sample = len(key_a)

        code = ldpc_generate(block_len, seed=code_seq)
        n_blocks = post_sample // block_len
        gamma_prior = min(max(qber.gamma, MIN_DECODER_GAMMA), 0.5 - MIN_DECODER_GAMMA)
        results = _reconcile_blocks(
            LdpcReconciler(code), key_a.bits, key_b.bits, gamma_prior, hash_seq.spawn(n_blocks), workers
        )

        accounting = LeakAccounting(qber_sample_bits=qber.sample_size)
        reconciled_a: List[np.ndarray] = []
        reconciled_b: List[np.ndarray] = []
        for index, result in enumerate(results):
            if not result.verified:
                accounting.discarded_blocks += 1
                logger.warning("%s: block %d failed verification and is discarded", label, index)
                continue
            accounting.syndrome_bits += code.check_count
            accounting.hash_bits += result.syndrome_bits_disclosed - code.check_count
            reconciled_a.append(key_a.bits[index * block_len:(index + 1) * block_len])
            reconciled_b.append(result.corrected_bits)
        if not reconciled_a:
            raise InsufficientKeyError(f"{label}: no block passed verification")
        alice_bits = np.concatenate(reconciled_a)
        bob_bits = np.concatenate(reconciled_b)
        logger.info(
            "%s: %d of %d blocks verified, %d reconciled bits",
            label, len(reconciled_a), n_blocks, alice_bits.size
        )

        leak = accounting.reconciliation_leak
        final_a = privacy_amplify(alice_bits, leak, qber.gamma, security_param, seed=pa_seq, accounting=accounting)
        final_b = privacy_amplify(bob_bits, leak, qber.gamma, security_param, seed=pa_seq, accounting=accounting)
    except ProtocolAbortError as e:
        QKD_SESSIONS.labels(outcome="abort").inc()
        logger.warning("%s: session aborted at %s stage (gamma=%s)", label, e.stage, e.gamma)
        raise
    except InsufficientKeyError:
        QKD_SESSIONS.labels(outcome="insufficient").inc()
        raise

    report = PipelineReport(
        pair=label,
        slots=stats.slots,
        coincidences=len(log),
        sifted_bits=target_sifted,
        s_value=chsh.s_value,
        s_error=chsh.std_error,
        gamma=qber.gamma,
        qber_sample_bits=qber.sample_size,
        post_sample_bits=post_sample,
        block_len=block_len,
        blocks_total=n_blocks,
        blocks_ok=len(reconciled_a),
        reconciled_bits=int(alice_bits.size),
        leak_bits=leak,
        security_param=security_param,
        final_len=len(final_a),
        keys_match=final_a.matches(final_b),
        monobit_ok=monobit_ok(final_a.bits),
    )
    QKD_SESSIONS.labels(outcome="ok").inc()
    logger.info("%s: final key of %d bits", label, report.final_len)
    return final_a, final_b, report

