"""
Estimators for coincidence count data.

Correlations, fringe visibilities, the entanglement-fidelity bound, the
CHSH value and Poissonian bootstrap error bars.
"""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import least_squares

from quantum import CHSH_SETTINGS
from simulation import CoincidenceLog, CountTable
from simulation.harness.policies import FRINGE_ALICE_ANGLE

from .interfaces import (
    ChshEstimate,
    FitFailureError,
    FringeCurve,
    IncompleteDataError,
    PairSummary,
    UndefinedEstimateError,
)

logger = logging.getLogger(__name__)

DEFAULT_RESAMPLES = 1000
MIN_CHSH_COUNTS = 100

CHSH_KEYS = tuple((a, b) for a, b, _ in CHSH_SETTINGS)


def correlation(counts: np.ndarray) -> float:
    """
    Normalized correlation (N_same - N_diff) / N_total.

    Args:
        counts: 2x2 matrix N[outcome_a][outcome_b], bit 0 meaning value +1

    Returns:
        Correlation in [-1, 1]

    Raises:
        UndefinedEstimateError: If the matrix holds no counts
    """
    counts = np.asarray(counts, dtype=float).reshape(2, 2)
    total = counts.sum()
    if total <= 0:
        raise UndefinedEstimateError("Correlation of an empty count matrix is undefined")
    return float((counts[0, 0] + counts[1, 1] - counts[0, 1] - counts[1, 0]) / total)


def raw_visibility(curve: FringeCurve) -> float:
    """Discrete contrast (max - min)/(max + min) of the counts."""
    counts = curve.counts
    if counts.size == 0 or counts.max() + counts.min() <= 0:
        raise FitFailureError("Raw visibility needs a curve with positive counts")
    return float((counts.max() - counts.min()) / (counts.max() + counts.min()))


def _fit_fringe(angles_deg: np.ndarray, counts: np.ndarray) -> Tuple[float, float, float]:
    """Least-squares fit of C (1 + V cos(2 theta - delta)), returning (C, V, delta)."""
    phase = 2.0 * np.radians(angles_deg)
    high, low = counts.max(), counts.min()
    start = np.array([(high + low) / 2.0, (high - low) / (high + low), phase[np.argmax(counts)]])

    def residuals(params):
        c, v, delta = params
        return c * (1.0 + v * np.cos(phase - delta)) - counts

    def jacobian(params):
        c, v, delta = params
        cosine = np.cos(phase - delta)
        return np.stack([1.0 + v * cosine, c * cosine, c * v * np.sin(phase - delta)], axis=1)

    result = least_squares(residuals, start, jac=jacobian, xtol=1e-12, ftol=1e-12, gtol=1e-12)
    if not result.success:
        raise FitFailureError(f"Fringe fit did not converge: {result.message}")
    c, v, delta = result.x
    return float(c), float(v), float(delta)


def visibility(curve: FringeCurve) -> float:
    """
    Fitted fringe visibility.

    Fits N(theta_b) = C (1 + V cos(2 theta_b - delta)) and returns |V|
    clamped to [0, 1]. A flat curve has visibility 0.

    Raises:
        IncompleteDataError: If the curve has too few angles to fit
        FitFailureError: If the fitted offset C is not positive
    """
    if not curve.is_fittable():
        raise IncompleteDataError(
            f"Fringe fit needs >= 5 angles spanning 90 degrees, got {len(curve.points)} points"
        )
    counts = curve.counts
    if counts.mean() <= 0:
        raise FitFailureError("Fringe has no counts")
    if counts.max() == counts.min():
        return 0.0
    c, v, _ = _fit_fringe(curve.angles, counts)
    if c <= 0:
        raise FitFailureError(f"Degenerate fringe fit with offset {c:.6g}")
    return min(1.0, abs(v))


def fidelity_bound(v_z: float, v_x: float) -> float:
    """Lower bound (V_z + V_x)/2 on the entanglement fidelity."""
    for value in (v_z, v_x):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"Visibility {value} is outside [0, 1]")
    return (v_z + v_x) / 2.0


def poisson_bootstrap(
    tables: CountTable,
    statistic: Callable[[CountTable], float],
    resamples: int = DEFAULT_RESAMPLES,
    seed: Optional[int] = None
) -> Tuple[float, float]:
    """
    Poissonian bootstrap of a statistic of count tables.

    Every cell N is replaced by a Poisson(N) draw in each resample.

    Args:
        tables: Observed counts
        statistic: Function of a CountTable
        resamples: Number of resamples (>= 100)
        seed: Seed of the resampling generator

    Returns:
        (mean, standard deviation) of the statistic over the resamples
    """
    if resamples < 100:
        raise ValueError(f"Bootstrap needs at least 100 resamples, got {resamples}")
    rng = np.random.default_rng(seed)
    keys = tables.keys()
    observed = np.stack([tables[key] for key in keys]) if keys else np.zeros((0, 2, 2))
    draws = rng.poisson(observed, size=(resamples,) + observed.shape)
    values = np.array([
        statistic(CountTable(dict(zip(keys, draw)))) for draw in draws
    ], dtype=float)
    return float(values.mean()), float(values.std(ddof=1))


def chsh_value(tables: CountTable) -> float:
    """S = E(0,22.5) + E(45,22.5) + E(45,67.5) - E(0,67.5) from counts."""
    missing = [key for key in CHSH_KEYS if key not in tables]
    if missing:
        raise IncompleteDataError(f"Missing CHSH settings: {missing}")
    return sum(sign * correlation(tables[(a, b)]) for a, b, sign in CHSH_SETTINGS)


def chsh_estimate(
    tables: CountTable,
    resamples: int = DEFAULT_RESAMPLES,
    seed: Optional[int] = None
) -> ChshEstimate:
    """
    CHSH value of measured counts with a bootstrap standard error.

    Raises:
        IncompleteDataError: If a CHSH setting is missing or has fewer than
            100 counts
    """
    for key in CHSH_KEYS:
        if key not in tables:
            raise IncompleteDataError(f"CHSH setting {key} is missing")
        if tables[key].sum() < MIN_CHSH_COUNTS:
            raise IncompleteDataError(
                f"CHSH setting {key} has {tables[key].sum()} counts, needs {MIN_CHSH_COUNTS}"
            )
    restricted = tables.restricted(CHSH_KEYS)
    s_value = chsh_value(restricted)
    _, std = poisson_bootstrap(restricted, chsh_value, resamples, seed)
    logger.debug("CHSH estimate S = %.4f +/- %.4f", s_value, std)
    return ChshEstimate(s_value=s_value, std_error=std)


def fringe_curve(log: CoincidenceLog, basis: str) -> FringeCurve:
    """
    Build a fringe from FRINGE-policy records.

    The count at each Bob angle is the (+1, +1) coincidence cell of the
    records taken with Alice at the basis angle.
    """
    basis = basis.upper()
    selected = log.select(np.isclose(log.theta_a, FRINGE_ALICE_ANGLE[basis]))
    table = CountTable.from_log(selected)
    return FringeCurve(basis, tuple((theta_b, int(table[(theta_a, theta_b)][0, 0]))
                                    for theta_a, theta_b in table.keys()))


def visibility_error(
    curve: FringeCurve,
    resamples: int = DEFAULT_RESAMPLES,
    seed: Optional[int] = None
) -> float:
    """Poissonian bootstrap standard deviation of the fitted visibility."""
    if resamples < 100:
        raise ValueError(f"Bootstrap needs at least 100 resamples, got {resamples}")
    rng = np.random.default_rng(seed)
    draws = rng.poisson(curve.counts, size=(resamples, len(curve.points)))
    values = []
    for draw in draws:
        try:
            values.append(visibility(FringeCurve.from_arrays(curve.basis, curve.angles, draw)))
        except FitFailureError:
            continue
    if len(values) < 2:
        raise FitFailureError("Too few successful fits to bootstrap the visibility")
    return float(np.std(values, ddof=1))


def pair_entanglement_summary(
    pair: str,
    z_curve: FringeCurve,
    x_curve: FringeCurve,
    chsh_tables: CountTable,
    resamples: int = DEFAULT_RESAMPLES,
    seed: Optional[int] = None
) -> PairSummary:
    """
    Visibilities, fidelity bound and CHSH value of one pair of end users.

    Args:
        pair: Pair label, e.g. "A1B1"
        z_curve: Z-basis fringe
        x_curve: X-basis fringe
        chsh_tables: Counts at the four CHSH settings
        resamples: Bootstrap resamples for every error bar
        seed: Seed of the bootstrap generators

    Returns:
        PairSummary row
    """
    seeds = np.random.SeedSequence(seed).spawn(3)
    v_z, v_x = visibility(z_curve), visibility(x_curve)
    v_z_error = visibility_error(z_curve, resamples, seeds[0])
    v_x_error = visibility_error(x_curve, resamples, seeds[1])
    chsh = chsh_estimate(chsh_tables, resamples, seeds[2])
    summary = PairSummary(
        pair=pair,
        v_z=v_z,
        v_z_error=v_z_error,
        v_x=v_x,
        v_x_error=v_x_error,
        fidelity_bound=fidelity_bound(v_z, v_x),
        fidelity_bound_error=math.hypot(v_z_error, v_x_error) / 2.0,
        s_value=chsh.s_value,
        s_error=chsh.std_error,
    )
    logger.info(
        "%s: V_z=%.4f V_x=%.4f bound=%.4f S=%.4f+/-%.4f",
        pair, v_z, v_x, summary.fidelity_bound, chsh.s_value, chsh.std_error
    )
    return summary
