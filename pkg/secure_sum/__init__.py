"""
Secure-sum package.

Parties on a ring announce their inputs masked with one-time pads cut from
pairwise keys; the sum of all announcements equals the sum of the inputs
modulo 2^n while each announcement alone is uniformly distributed.
"""

from .interfaces import (
    Announcement,
    KeyExhaustedError,
    KeySource,
    PadKey,
    PadReuseError,
    PartyState,
    ProtocolViolationError,
    RingTopology,
    SecureSumError,
    SumResult,
    edge_label,
)
from .pads import (
    KeyMaterial,
    aggregate,
    bits_to_int,
    compute_announcement,
    derive_pad,
    ring_announcements,
)
from .key_sources import (
    FinalKeySource,
    KeyFileSource,
    QkdKeySource,
    SeededKeySource,
    key_source_from_name,
    write_key_files,
)
from .party import SecureSumParty
from .protocol import (
    DEFAULT_BIT_WIDTH,
    DEFAULT_ROUNDS,
    DEMO_INPUTS,
    DEMO_RING,
    ProtocolRun,
    demo_ring,
    run_protocol,
)
from .audit import AuditReport, PartyAudit, privacy_audit, sample_announcements

__all__ = [
    # Types
    'Announcement',
    'PadKey',
    'RingTopology',
    'SumResult',
    'PartyState',
    'KeyMaterial',
    'ProtocolRun',

    # Pads and arithmetic
    'derive_pad',
    'compute_announcement',
    'aggregate',
    'ring_announcements',
    'bits_to_int',
    'edge_label',

    # Key sources
    'KeySource',
    'SeededKeySource',
    'QkdKeySource',
    'FinalKeySource',
    'KeyFileSource',
    'key_source_from_name',
    'write_key_files',

    # Protocol
    'SecureSumParty',
    'run_protocol',
    'demo_ring',
    'DEFAULT_BIT_WIDTH',
    'DEFAULT_ROUNDS',
    'DEMO_INPUTS',
    'DEMO_RING',

    # Audit
    'AuditReport',
    'PartyAudit',
    'privacy_audit',
    'sample_announcements',

    # Exceptions
    'SecureSumError',
    'KeyExhaustedError',
    'PadReuseError',
    'ProtocolViolationError',
]
