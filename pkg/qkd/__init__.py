"""
QKD package.

E91 post-processing: sifting, CHSH security check, QBER estimation, LDPC
reconciliation and Toeplitz privacy amplification.
"""

from .interfaces import (
    ChshCheckFailedError,
    CodeConstructionError,
    FinalKey,
    InsufficientKeyError,
    LeakAccounting,
    PrivacyAmplifier,
    ProtocolAbortError,
    QberReport,
    QberThresholdExceededError,
    QkdError,
    ReconciliationResult,
    Reconciler,
    SiftedKey,
)
from .sifting import KEY_ANGLES, QBER_THRESHOLD, chsh_security_check, estimate_qber, sift
from .hashing import MultiplyShiftHash, toeplitz_hash, verification_hash
from .ldpc import LdpcCode, LdpcReconciler, decode_syndrome, ldpc_generate, ldpc_reconcile
from .amplification import (
    ToeplitzAmplifier,
    binary_entropy,
    final_key_length,
    monobit_ok,
    privacy_amplify,
)
from .keyio import export_key_hex, import_key_hex
from .session import PipelineReport, collect_e91_records, run_qkd_session

__all__ = [
    # Types
    'SiftedKey',
    'QberReport',
    'LdpcCode',
    'ReconciliationResult',
    'LeakAccounting',
    'FinalKey',
    'PipelineReport',

    # Interfaces
    'Reconciler',
    'PrivacyAmplifier',

    # Operations
    'KEY_ANGLES',
    'QBER_THRESHOLD',
    'sift',
    'chsh_security_check',
    'estimate_qber',
    'ldpc_generate',
    'ldpc_reconcile',
    'decode_syndrome',
    'LdpcReconciler',
    'MultiplyShiftHash',
    'verification_hash',
    'toeplitz_hash',
    'ToeplitzAmplifier',
    'binary_entropy',
    'final_key_length',
    'monobit_ok',
    'privacy_amplify',
    'export_key_hex',
    'import_key_hex',
    'collect_e91_records',
    'run_qkd_session',

    # Exceptions
    'QkdError',
    'ProtocolAbortError',
    'QberThresholdExceededError',
    'ChshCheckFailedError',
    'CodeConstructionError',
    'InsufficientKeyError',
]
