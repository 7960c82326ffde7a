"""
Tests for the logging setup and the metrics exposition.
"""

import logging

from utils.logger import get_logger, resolve_level, setup_logger
from utils.metrics import (
    METRICS_FILE_ENV,
    SECURE_SUM_ROUNDS,
    render_metrics,
    write_metrics_file,
)


def test_resolve_level(monkeypatch):
    monkeypatch.delenv("LOG_LEVEL", raising=False)
    assert resolve_level() == logging.INFO
    assert resolve_level(verbose=True) == logging.DEBUG
    assert resolve_level("warning", verbose=True) == logging.WARNING
    assert resolve_level("nonsense") == logging.INFO

    monkeypatch.setenv("LOG_LEVEL", "ERROR")
    assert resolve_level() == logging.ERROR


def test_setup_logger_installs_one_root_handler():
    logger = setup_logger("entnet-test", level="DEBUG")
    setup_logger("entnet-test", level="DEBUG")
    assert logger.level == logging.DEBUG
    assert len(logging.getLogger().handlers) == 1
    assert get_logger("entnet-other", level="INFO").level == logging.INFO


def test_render_metrics_lists_counters():
    SECURE_SUM_ROUNDS.inc()
    text = render_metrics()
    for name in ("entnet_simulated_slots_total", "entnet_qkd_sessions_total", "entnet_secure_sum_rounds_total"):
        assert name in text


def test_write_metrics_file(tmp_path, monkeypatch):
    monkeypatch.delenv(METRICS_FILE_ENV, raising=False)
    assert write_metrics_file() is None

    target = tmp_path / "explicit.prom"
    assert write_metrics_file(target) == target
    assert "entnet_transport_frames_total" in target.read_text()

    from_env = tmp_path / "env.prom"
    monkeypatch.setenv(METRICS_FILE_ENV, str(from_env))
    assert write_metrics_file() == from_env
    assert from_env.exists()
