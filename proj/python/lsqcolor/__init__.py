"""Linear model fitting under stationary colored noise."""

import numpy as np

from ._core import *  # noqa: F401,F403
from ._core import LsqcolorError, RunConfig, ZeroExtendedSequence, run


def sequence(values, start=0):
    """Zero-extended sequence whose first stored sample sits at index `start`."""
    block = np.asarray(values, dtype=complex)
    if block.ndim == 1:
        block = block[:, None]
    return ZeroExtendedSequence(start, block)


def run_command(command, **options):
    """Runs a CLI command in-process. Returns (exit_code, stdout, stderr)."""
    config = RunConfig()
    config.command = command
    for key, value in options.items():
        if not hasattr(config, key):
            raise TypeError(f"unknown option {key!r}")
        setattr(config, key, value)
    return run(config)
