"""
Command-line package.

Subcommands fringe, chsh, qkd, secure-sum and demo-paper; every run with an
output directory leaves CSV artifacts, a report and a manifest.
"""

from .interfaces import (
    EXIT_ABORT,
    EXIT_FAILURE,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    CommandOutput,
    ReplayMismatchError,
    UsageError,
)
from .manifest import ManifestError, RunManifest, load_manifest, verify_outputs, write_manifest
from .commands import (
    chsh_command,
    demo_command,
    fringe_command,
    qkd_command,
    secure_sum_command,
)

__all__ = [
    # Types
    'CommandOutput',
    'RunManifest',

    # Commands
    'fringe_command',
    'chsh_command',
    'qkd_command',
    'secure_sum_command',
    'demo_command',

    # Manifests
    'load_manifest',
    'write_manifest',
    'verify_outputs',

    # Exit codes
    'EXIT_OK',
    'EXIT_FAILURE',
    'EXIT_USAGE',
    'EXIT_ABORT',
    'EXIT_IO',

    # Exceptions
    'UsageError',
    'ReplayMismatchError',
    'ManifestError',
]
