"""
Utilities package for the entanglement network toolkit.
"""

from utils.logger import get_logger, setup_logger
from utils.metrics import render_metrics, write_metrics_file

__all__ = ["get_logger", "setup_logger", "render_metrics", "write_metrics_file"]
