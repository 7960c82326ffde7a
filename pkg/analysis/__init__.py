"""
Analysis package.

Turns coincidence counts into correlations, visibilities, fidelity bounds
and CHSH values with Poissonian error bars.
"""

from .interfaces import (
    AnalysisError,
    ChshEstimate,
    FitFailureError,
    FringeCurve,
    IncompleteDataError,
    PairSummary,
    UndefinedEstimateError,
)
from .estimators import (
    CHSH_KEYS,
    DEFAULT_RESAMPLES,
    chsh_estimate,
    chsh_value,
    correlation,
    fidelity_bound,
    fringe_curve,
    pair_entanglement_summary,
    poisson_bootstrap,
    raw_visibility,
    visibility,
    visibility_error,
)
from .io import (
    format_real,
    fringe_csv_text,
    read_count_table_csv,
    read_fringe_csv,
    write_count_table_csv,
    write_fringe_csv,
)

__all__ = [
    # Types
    'ChshEstimate',
    'FringeCurve',
    'PairSummary',

    # Estimators
    'CHSH_KEYS',
    'DEFAULT_RESAMPLES',
    'chsh_estimate',
    'chsh_value',
    'correlation',
    'fidelity_bound',
    'fringe_curve',
    'pair_entanglement_summary',
    'poisson_bootstrap',
    'raw_visibility',
    'visibility',
    'visibility_error',

    # CSV
    'format_real',
    'fringe_csv_text',
    'read_count_table_csv',
    'read_fringe_csv',
    'write_count_table_csv',
    'write_fringe_csv',

    # Exceptions
    'AnalysisError',
    'FitFailureError',
    'IncompleteDataError',
    'UndefinedEstimateError',
]
