"""
Metrics for the entanglement network toolkit.

Counters live in a dedicated registry so repeated imports and test runs do
not collide with the process-wide default registry.
"""

import logging
import os
from pathlib import Path
from typing import Optional, Union

from prometheus_client import CollectorRegistry, Counter, generate_latest

logger = logging.getLogger(__name__)

METRICS_FILE_ENV = "ENTNET_METRICS_FILE"

REGISTRY = CollectorRegistry()

SIMULATED_SLOTS = Counter(
    'entnet_simulated_slots_total',
    'Total number of simulated pump slots',
    registry=REGISTRY
)
COINCIDENCES = Counter(
    'entnet_coincidences_total',
    'Total number of recorded coincidences',
    registry=REGISTRY
)
QKD_SESSIONS = Counter(
    'entnet_qkd_sessions_total',
    'Total number of QKD sessions by outcome',
    ['outcome'],
    registry=REGISTRY
)
RECONCILED_BLOCKS = Counter(
    'entnet_reconciled_blocks_total',
    'Total number of LDPC blocks by verification result',
    ['verified'],
    registry=REGISTRY
)
SECURE_SUM_ROUNDS = Counter(
    'entnet_secure_sum_rounds_total',
    'Total number of completed secure-sum rounds',
    registry=REGISTRY
)
ANNOUNCEMENTS = Counter(
    'entnet_announcements_total',
    'Total number of secure-sum announcements',
    registry=REGISTRY
)
FRAMES_SENT = Counter(
    'entnet_transport_frames_total',
    'Total number of transport messages sent',
    ['transport'],
    registry=REGISTRY
)


def render_metrics() -> str:
    """Prometheus text exposition of the toolkit registry."""
    return generate_latest(REGISTRY).decode("utf-8")


def write_metrics_file(path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """
    Write the metrics exposition to a file.

    Args:
        path: Target file; defaults to the ENTNET_METRICS_FILE variable

    Returns:
        The written path, or None when no target is configured
    """
    target = path or os.environ.get(METRICS_FILE_ENV)
    if not target:
        return None
    target = Path(target)
    target.write_text(render_metrics(), encoding="utf-8")
    logger.debug("Metrics written to %s", target)
    return target
