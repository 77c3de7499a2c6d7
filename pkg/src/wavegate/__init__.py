"""Streaming salience gating on a damped velocity-pressure wave lattice.

Probability frames from an upstream sound-event encoder amplitude-modulate
per-category carrier sinusoids injected into spatial parcels of a 2-D wave
lattice; an adaptive threshold over the lattice's energy change rate flags
salient drifts, which gate trailing audio windows for a downstream consumer.
"""

from .detector import (
    AdaptiveThreshold,
    DriftDetector,
    DriftEvent,
    EnergyTrace,
    TraceRow,
    drift_metric,
    total_energy,
)
from .drive import DriveConfig, ProbabilityFrame, build_source
from .frequency_map import (
    FrequencyMap,
    MapConfig,
    assign_frequencies,
    allocate_parcels,
    build_frequency_map,
    build_speed_field,
    build_striped_field,
    wave_speed_for_frequency,
)
from .gating import (
    GateDecision,
    SessionConfig,
    SessionMetrics,
    SessionResult,
    StreamSession,
    compute_metrics,
    process_stream,
    union_length,
)
from .lattice import LatticeConfig, LatticeState, reset, step
from .spectral import (
    FieldRecording,
    FrequencyReport,
    band_for,
    dominant_frequency_map,
    record_pfield,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveThreshold",
    "DriftDetector",
    "DriftEvent",
    "DriveConfig",
    "EnergyTrace",
    "FieldRecording",
    "FrequencyMap",
    "FrequencyReport",
    "GateDecision",
    "LatticeConfig",
    "LatticeState",
    "MapConfig",
    "ProbabilityFrame",
    "SessionConfig",
    "SessionMetrics",
    "SessionResult",
    "StreamSession",
    "TraceRow",
    "allocate_parcels",
    "assign_frequencies",
    "band_for",
    "build_frequency_map",
    "build_source",
    "build_speed_field",
    "build_striped_field",
    "compute_metrics",
    "dominant_frequency_map",
    "drift_metric",
    "process_stream",
    "record_pfield",
    "reset",
    "step",
    "total_energy",
    "union_length",
    "wave_speed_for_frequency",
]
