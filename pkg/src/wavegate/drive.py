"""Turns per-second probability frames into per-step lattice source fields.

Each category's probability amplitude-modulates its carrier sinusoid on the
cells of its parcel. Sinusoid phase is a function of the global step counter
only, so a stream can be fed frame by frame without any phase bookkeeping:
concatenating runs is bitwise identical to one long run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, FrameValidationError
from .frequency_map import FrequencyMap


@dataclass
class ProbabilityFrame:
    """One timestamped vector of category probabilities in [0, 1]."""

    t: float
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)

    def validate(self, num_categories: int) -> None:
        if self.probs.ndim != 1 or len(self.probs) != num_categories:
            raise ContractError(
                f"frame at t={self.t:g} has {self.probs.size} probabilities, "
                f"expected {num_categories}"
            )
        bad = np.flatnonzero((self.probs < 0.0) | (self.probs > 1.0) | ~np.isfinite(self.probs))
        if bad.size:
            i = int(bad[0])
            raise FrameValidationError(
                f"frame at t={self.t:g}: probability[{i}] = {self.probs[i]!r} "
                f"outside [0, 1]"
            )


@dataclass
class DriveConfig:
    fmap: FrequencyMap
    steps_per_frame: int = 100

    def __post_init__(self):
        if self.steps_per_frame < 1:
            raise ContractError("steps_per_frame must be >= 1")


def build_source(
    frame: ProbabilityFrame, step_index: int, cfg: DriveConfig
) -> np.ndarray:
    """Source field for one lattice step.

    The sinusoid argument uses the per-step phase advance reduced mod 2*pi
    (an exact identity for integer step counts), so carriers whose period
    divides the step clock stay exactly zero instead of accumulating
    round-off.
    """
    fmap = cfg.fmap
    frame.validate(fmap.config.num_categories)
    g = fmap.config.grid_size
    values = frame.probs * np.sin(fmap.step_phases * step_index)
    flat = np.zeros(g * g)
    painted = np.repeat(values, fmap.parcel_sizes)
    flat[: painted.size] = painted
    return flat.reshape(g, g)
