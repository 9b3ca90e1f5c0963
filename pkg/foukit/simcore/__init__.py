"""Seeded samplers. The Monte Carlo engine lives in foukit.simcore.study."""

from foukit.simcore.rng import make_generator
from foukit.simcore.sampler import (
    SamplePath,
    SimConfig,
    sample_fgn,
    sample_fou_exact,
    sample_fou_operator_path,
    simulate,
)

__all__ = [
    "SamplePath",
    "SimConfig",
    "make_generator",
    "sample_fgn",
    "sample_fou_exact",
    "sample_fou_operator_path",
    "simulate",
]
