"""
Subcommand implementations.

Each command builds its artifacts in memory and returns a CommandOutput;
writing files, manifests and exit codes is left to cli.main.
"""

import csv
import io
import logging
import math
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from analysis import (
    CHSH_KEYS,
    DEFAULT_RESAMPLES,
    AnalysisError,
    FringeCurve,
    IncompleteDataError,
    PairSummary,
    chsh_estimate,
    fidelity_bound,
    format_real,
    fringe_csv_text,
    fringe_curve,
    pair_entanglement_summary,
    visibility,
    visibility_error,
    write_count_table_csv,
)
from qkd import FinalKey, PipelineReport, run_qkd_session
from secure_sum import (
    DEFAULT_BIT_WIDTH,
    DEFAULT_ROUNDS,
    DEMO_INPUTS,
    DEMO_RING,
    FinalKeySource,
    KeySource,
    ProtocolRun,
    RingTopology,
    key_source_from_name,
    run_protocol,
)
from secure_sum.key_sources import qkd_pair
from simulation import (
    ChshPolicy,
    CoincidenceLog,
    CountTable,
    FringePolicy,
    NetworkConfig,
    NetworkHarness,
    RoutingSchedule,
    default_fringe_angles,
    pair_label,
    parse_pair,
)
from simulation.records import UserPair

from .interfaces import EXIT_USAGE, CommandOutput, UsageError

logger = logging.getLogger(__name__)

FRINGE_BASES = ("Z", "X", "BOTH")
DEFAULT_FRINGE_POINTS = 9
DEFAULT_FRINGE_PULSES = 16_000_000
DEFAULT_CHSH_SAMPLES = 10_000
MIN_CHSH_SAMPLES = 1_000
MIN_TARGET_SIFTED = 8192
DEFAULT_TARGET_SIFTED = 12000
MAX_CHSH_CHUNKS = 20

PAIR_TABLE_COLUMNS = [
    "pair", "v_z", "v_z_err", "v_x", "v_x_err",
    "fidelity_bound", "fidelity_bound_err", "s_value", "s_err", "violation",
]


def child_seeds(seed: int, count: int) -> List[int]:
    """Independent integer seeds derived from one run seed."""
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in np.random.SeedSequence(seed).spawn(count)]


def parse_user_pair(text: str, config: NetworkConfig) -> UserPair:
    """
    Parse a pair such as A1B2 and check both ports exist.

    Raises:
        UsageError: On malformed pairs or ports beyond the switches
    """
    try:
        pair = parse_pair(text)
        for user in pair:
            user.check_ports(config.ports_per_side)
    except ValueError as e:
        raise UsageError(str(e)) from e
    return pair


def ring_parties(count: int) -> Tuple[str, ...]:
    """Ring members alternating between the two sides: A1, B1, A2, B2, ..."""
    return tuple(f"{'AB'[i % 2]}{i // 2 + 1}" for i in range(count))


def demo_pairs() -> List[UserPair]:
    """The four pairs of adjacent users on the demonstration ring."""
    return [qkd_pair(edge) for edge in RingTopology(DEMO_RING).edges()]


def _coincidence_rate(harness: NetworkHarness) -> float:
    return harness.config.pair_gen_prob_per_pulse * harness.transmittance_a * harness.transmittance_b


def _format_estimate(value: float, error: float) -> str:
    return f"{format_real(value)} +/- {format_real(error)}"


# Fringes

def simulate_fringe(
    harness: NetworkHarness,
    pair: UserPair,
    basis: str,
    points: int,
    pulses: int,
    seed: int
) -> FringeCurve:
    """Sweep Bob's analyzer over one fringe period; zero pulses give an empty curve."""
    if pulses == 0:
        return FringeCurve(basis)
    policy = FringePolicy(basis, default_fringe_angles(points))
    log, _ = harness.run(RoutingSchedule.single(pair, pulses), policy, pulses, seed)
    return fringe_curve(log, basis)


def fringe_command(
    config: NetworkConfig,
    pair: str,
    basis: str = "BOTH",
    points: int = DEFAULT_FRINGE_POINTS,
    pulses: int = DEFAULT_FRINGE_PULSES,
    seed: int = 0,
    resamples: int = DEFAULT_RESAMPLES
) -> CommandOutput:
    """
    Fringe curves of one pair in the Z basis, the X basis or both.

    Writes one theta_b_deg,count CSV per basis and reports the fitted
    visibilities; with both bases it also reports the fidelity bound. A run
    with zero pulses writes header-only CSVs and ends with a usage exit code.
    """
    basis = basis.upper()
    if basis not in FRINGE_BASES:
        raise UsageError(f"Unknown basis {basis}; expected one of {', '.join(FRINGE_BASES)}")
    if points < 5:
        raise UsageError(f"A fringe needs at least 5 points, got {points}")
    if pulses < 0:
        raise UsageError(f"Pulses must be >= 0, got {pulses}")
    users = parse_user_pair(pair, config)
    label = pair_label(users)
    output = CommandOutput(
        "fringe", seed, {"pair": label, "basis": basis, "points": points, "pulses": pulses, "resamples": resamples}
    )
    harness = NetworkHarness(config)
    bases = ("Z", "X") if basis == "BOTH" else (basis,)
    seeds = child_seeds(seed, 2 * len(bases))

    fitted: Dict[str, float] = {}
    errors: Dict[str, float] = {}
    for k, name in enumerate(bases):
        curve = simulate_fringe(harness, users, name, points, pulses, seeds[2 * k])
        output.add_file(f"fringe_{label}_{name}.csv", fringe_csv_text(curve))
        if not curve.points:
            output.summary.append(f"{label} {name}: no coincidences, visibility undefined")
            continue
        try:
            fitted[name] = visibility(curve)
            errors[name] = visibility_error(curve, resamples, seeds[2 * k + 1])
        except AnalysisError as e:
            logger.warning("%s %s fringe cannot be fitted: %s", label, name, e)
            output.summary.append(f"{label} {name}: visibility undefined ({e})")
            continue
        output.summary.append(f"{label} V_{name.lower()} = {_format_estimate(fitted[name], errors[name])}")

    if len(fitted) == 2:
        bound = fidelity_bound(fitted["Z"], fitted["X"])
        bound_error = math.hypot(errors["Z"], errors["X"]) / 2.0
        output.summary.append(f"{label} fidelity bound = {_format_estimate(bound, bound_error)}")
    if pulses == 0:
        output.summary.append("No pulses simulated; fringe CSVs hold only the header")
        output.exit_code = EXIT_USAGE
    return output


# CHSH

def simulate_chsh(
    harness: NetworkHarness,
    pair: UserPair,
    samples: int,
    seed: int
) -> CountTable:
    """
    Counts at the four CHSH settings, exactly samples coincidences each.

    Raises:
        IncompleteDataError: If the network delivers no coincidences or the
            chunk budget runs out
    """
    rate = _coincidence_rate(harness)
    if rate <= 0:
        raise IncompleteDataError(f"Network delivers no coincidences to {pair_label(pair)}")
    chunk_seeds = child_seeds(seed, MAX_CHSH_CHUNKS)
    logs: List[CoincidenceLog] = []
    offsets: List[int] = []
    slots = 0
    for chunk in range(MAX_CHSH_CHUNKS + 1):
        table = CountTable.from_log(CoincidenceLog.concatenate(logs, offsets)) if logs else CountTable()
        have = min(int(table[key].sum()) if key in table else 0 for key in CHSH_KEYS)
        if have >= samples:
            break
        if chunk == MAX_CHSH_CHUNKS:
            raise IncompleteDataError(
                f"Fewer than {samples} coincidences per CHSH setting after {MAX_CHSH_CHUNKS} chunks"
            )
        n_slots = int(math.ceil(1.05 * len(CHSH_KEYS) * (samples - have) / rate)) + 1000
        log, _ = harness.run(RoutingSchedule.single(pair, n_slots), ChshPolicy(), n_slots, chunk_seeds[chunk])
        logs.append(log)
        offsets.append(slots)
        slots += n_slots
        logger.debug("CHSH chunk %d: %d slots, %d coincidences", chunk, n_slots, len(log))

    log = CoincidenceLog.concatenate(logs, offsets)
    keep = np.zeros(len(log), dtype=bool)
    for theta_a, theta_b in CHSH_KEYS:
        matches = np.flatnonzero(np.isclose(log.theta_a, theta_a) & np.isclose(log.theta_b, theta_b))
        keep[matches[:samples]] = True
    return CountTable.from_log(log.select(keep))


def count_table_csv_text(table: CountTable) -> str:
    buffer = io.StringIO()
    write_count_table_csv(table, buffer)
    return buffer.getvalue()


def chsh_command(
    config: NetworkConfig,
    pair: str,
    samples: int = DEFAULT_CHSH_SAMPLES,
    seed: int = 0,
    resamples: int = DEFAULT_RESAMPLES
) -> CommandOutput:
    """CHSH value of one pair with a bootstrap error and the violation verdict."""
    if samples < MIN_CHSH_SAMPLES:
        raise UsageError(f"CHSH needs at least {MIN_CHSH_SAMPLES} samples per setting, got {samples}")
    users = parse_user_pair(pair, config)
    label = pair_label(users)
    output = CommandOutput("chsh", seed, {"pair": label, "samples": samples, "resamples": resamples})
    sim_seed, bootstrap_seed = child_seeds(seed, 2)

    table = simulate_chsh(NetworkHarness(config), users, samples, sim_seed)
    estimate = chsh_estimate(table, resamples, bootstrap_seed)
    output.add_file(f"chsh_{label}.csv", count_table_csv_text(table))
    output.summary.append(f"{label} S = {_format_estimate(estimate.s_value, estimate.std_error)}")
    verdict = "violated" if estimate.violates() else "not violated"
    output.summary.append(f"{label} CHSH inequality {verdict} (S - 2 sigma > 2: {str(estimate.violates()).lower()})")
    return output


# QKD

def _qkd_summary(report: PipelineReport) -> List[str]:
    return [
        f"{report.pair} sifted={report.sifted_bits} post_sample={report.post_sample_bits} "
        f"gamma={format_real(report.gamma)} S={_format_estimate(report.s_value, report.s_error)}",
        f"{report.pair} blocks_ok={report.blocks_ok}/{report.blocks_total} reconciled={report.reconciled_bits} "
        f"leak={report.leak_bits} final={report.final_len} keys_match={str(report.keys_match).lower()} "
        f"monobit_ok={str(report.monobit_ok).lower()}",
    ]


def qkd_command(
    config: NetworkConfig,
    pair: str,
    target_sifted: int = DEFAULT_TARGET_SIFTED,
    seed: int = 0,
    workers: Optional[int] = None
) -> CommandOutput:
    """
    E91 session between one pair; writes the stage CSV and the key=value report.

    Raises:
        ProtocolAbortError: If the CHSH or QBER check aborts the session
    """
    if target_sifted < MIN_TARGET_SIFTED:
        raise UsageError(f"Target of {target_sifted} sifted bits is below {MIN_TARGET_SIFTED}")
    users = parse_user_pair(pair, config)
    label = pair_label(users)
    output = CommandOutput("qkd", seed, {"pair": label, "target_sifted": target_sifted})
    _, _, report = run_qkd_session(users, config, target_sifted, seed=seed, workers=workers)
    output.add_file(f"qkd_{label}.csv", report.to_csv())
    output.add_file(f"qkd_{label}.txt", report.to_text())
    output.summary.extend(_qkd_summary(report))
    return output


# Secure sum

def _secure_sum_files(output: CommandOutput, run: ProtocolRun) -> None:
    output.add_file("announcements.csv", run.announcements_csv())
    output.add_file("sums.csv", run.sums_csv())
    sums = run.sums()
    if len(set(sums)) == 1:
        output.summary.append(f"Secure sum t = {sums[0]} in all {run.rounds} rounds")
    else:
        output.summary.append(f"Secure sums per round: {' '.join(str(t) for t in sums)}")
    if run.wraparound:
        output.summary.append(f"Inputs exceed 2^{run.n}; the sums are reduced modulo 2^{run.n}")


def secure_sum_command(
    inputs: Sequence[int],
    bits: int = DEFAULT_BIT_WIDTH,
    rounds: int = DEFAULT_ROUNDS,
    transport: str = "inprocess",
    keys: str = "seeded",
    config: Optional[NetworkConfig] = None,
    seed: int = 0
) -> CommandOutput:
    """Secure sum over a ring of len(inputs) parties named A1, B1, A2, ..."""
    if len(inputs) < 3:
        raise UsageError(f"Secure sum needs at least 3 inputs, got {len(inputs)}")
    ring = RingTopology(ring_parties(len(inputs)))
    output = CommandOutput("secure-sum", seed, {
        "inputs": [int(v) for v in inputs], "bits": bits, "rounds": rounds, "transport": transport, "keys": keys,
    })
    source = key_source_from_name(keys, seed=seed, config=config)
    run = run_protocol(
        ring, inputs, n=bits, rounds=rounds, key_source=source, transport=transport, session_id=f"entnet-{seed}"
    )
    _secure_sum_files(output, run)
    return output


# Full demonstration

@contextmanager
def demo_stage(name: str) -> Iterator[None]:
    """Tag any failure with the demonstration stage it happened in."""
    logger.info("Demo stage: %s", name)
    try:
        yield
    except Exception as e:
        e.add_note(f"demo-paper stage: {name}")
        logger.error("Demo stopped at stage %s: %s", name, e)
        raise


def pair_table_csv(summaries: Sequence[PairSummary]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(PAIR_TABLE_COLUMNS)
    for s in summaries:
        writer.writerow([
            s.pair,
            format_real(s.v_z), format_real(s.v_z_error),
            format_real(s.v_x), format_real(s.v_x_error),
            format_real(s.fidelity_bound), format_real(s.fidelity_bound_error),
            format_real(s.s_value), format_real(s.s_error),
            str(s.violates).lower(),
        ])
    return buffer.getvalue()


def ring_keys_from_sessions(
    ring: RingTopology,
    sessions: Dict[Tuple[str, str], Tuple[FinalKey, FinalKey]]
) -> KeySource:
    """
    Key source over the ring from the (Alice-side, Bob-side) keys of each pair.

    Args:
        ring: Ring whose edges all join the two sides
        sessions: Final keys keyed by (Alice-side user, Bob-side user) names
    """
    keys = {}
    for edge in ring.edges():
        alice, bob = (str(user) for user in qkd_pair(edge))
        final_a, final_b = sessions[(alice, bob)]
        keys[edge] = (final_a, final_b) if edge[0] == alice else (final_b, final_a)
    return FinalKeySource(keys)


def demo_command(
    config: NetworkConfig,
    seed: int = 0,
    points: int = DEFAULT_FRINGE_POINTS,
    pulses: int = DEFAULT_FRINGE_PULSES,
    samples: int = DEFAULT_CHSH_SAMPLES,
    target_sifted: int = DEFAULT_TARGET_SIFTED,
    rounds: int = DEFAULT_ROUNDS,
    resamples: int = DEFAULT_RESAMPLES
) -> CommandOutput:
    """
    Fringes, CHSH values and QKD sessions of the four adjacent pairs of the
    demonstration ring, followed by the secure sum keyed with the distilled
    keys.
    """
    if pulses < 1:
        raise UsageError(f"Pulses must be >= 1, got {pulses}")
    if samples < MIN_CHSH_SAMPLES:
        raise UsageError(f"CHSH needs at least {MIN_CHSH_SAMPLES} samples per setting, got {samples}")
    if target_sifted < MIN_TARGET_SIFTED:
        raise UsageError(f"Target of {target_sifted} sifted bits is below {MIN_TARGET_SIFTED}")
    output = CommandOutput("demo-paper", seed, {
        "points": points, "pulses": pulses, "samples": samples,
        "target_sifted": target_sifted, "rounds": rounds, "resamples": resamples,
    })
    harness = NetworkHarness(config)
    pairs = demo_pairs()
    seeds = iter(child_seeds(seed, 5 * len(pairs) + 1))

    summaries: List[PairSummary] = []
    output.summary.append("Pairwise entanglement")
    for pair in pairs:
        label = pair_label(pair)
        with demo_stage(f"entanglement {label}"):
            z_curve = simulate_fringe(harness, pair, "Z", points, pulses, next(seeds))
            x_curve = simulate_fringe(harness, pair, "X", points, pulses, next(seeds))
            table = simulate_chsh(harness, pair, samples, next(seeds))
            summary = pair_entanglement_summary(label, z_curve, x_curve, table, resamples, next(seeds))
        output.add_file(f"fringe_{label}_Z.csv", fringe_csv_text(z_curve))
        output.add_file(f"fringe_{label}_X.csv", fringe_csv_text(x_curve))
        output.add_file(f"chsh_{label}.csv", count_table_csv_text(table))
        summaries.append(summary)
        output.summary.append(
            f"{label} V_z={_format_estimate(summary.v_z, summary.v_z_error)} "
            f"V_x={_format_estimate(summary.v_x, summary.v_x_error)} "
            f"bound={_format_estimate(summary.fidelity_bound, summary.fidelity_bound_error)} "
            f"S={_format_estimate(summary.s_value, summary.s_error)} "
            f"violation={str(summary.violates).lower()}"
        )
    output.add_file("pairs.csv", pair_table_csv(summaries))

    sessions: Dict[Tuple[str, str], Tuple[FinalKey, FinalKey]] = {}
    output.summary.append("Key distribution")
    for pair in pairs:
        label = pair_label(pair)
        with demo_stage(f"qkd {label}"):
            final_a, final_b, report = run_qkd_session(pair, config, target_sifted, seed=next(seeds))
        sessions[(str(pair[0]), str(pair[1]))] = (final_a, final_b)
        output.add_file(f"qkd_{label}.csv", report.to_csv())
        output.add_file(f"qkd_{label}.txt", report.to_text())
        output.summary.extend(_qkd_summary(report))

    output.summary.append("Secure sum")
    ring = RingTopology(DEMO_RING)
    with demo_stage("secure-sum"):
        run = run_protocol(
            ring, DEMO_INPUTS, n=DEFAULT_BIT_WIDTH, rounds=rounds,
            key_source=ring_keys_from_sessions(ring, sessions), session_id=f"demo-{next(seeds)}",
        )
    _secure_sum_files(output, run)
    return output
