"""Autonomous deep learning (ADL) for evolving data streams."""

from ._adl import (
    IoError,
    Learner,
    adaptive_sigma,
    generate,
    hoeffding_bound,
    mici,
    run,
)

__all__ = [
    "IoError",
    "Learner",
    "adaptive_sigma",
    "generate",
    "hoeffding_bound",
    "mici",
    "run",
]
__version__ = "0.1.0"
