"""End-to-end session pipeline: frames -> lattice -> detector -> decisions.

A session owns one lattice state and one detector. Each incoming frame
drives the lattice for a fixed number of steps, the total energy is sampled
once per frame, and confirmed drift events gate a trailing audio window for
forwarding. Memory use is bounded by the lattice plus the detector windows
regardless of stream length; the returned trace is reporting output, not
detector state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .detector import DriftDetector, DriftEvent, EnergyTrace, total_energy
from .drive import DriveConfig, ProbabilityFrame, build_source
from .errors import ConfigurationError, ContractError, WavegateError
from .frequency_map import FrequencyMap, MapConfig, build_frequency_map
from .lattice import LatticeConfig, LatticeState, step

log = logging.getLogger(__name__)


@dataclass
class SessionConfig:
    map_config: MapConfig = field(default_factory=MapConfig)
    window_seconds: float = 4.0
    stride_seconds: float = 1.0
    threshold_window: int = 20
    trend_alpha: float = 0.2
    persistence: int = 3
    cooldown: int = 3
    boundary: str = "periodic"

    def validate(self) -> None:
        self.map_config.validate()
        if not (self.stride_seconds > 0.0):
            raise ConfigurationError("stride_seconds must be positive")
        if self.window_seconds < self.stride_seconds:
            raise ConfigurationError("window_seconds must be >= stride_seconds")

    @property
    def steps_per_frame(self) -> int:
        return max(1, round(self.stride_seconds / self.map_config.dt))


@dataclass(frozen=True)
class GateDecision:
    """Forwarded audio interval [start, end) triggered by one event."""

    start: float
    end: float
    event: DriftEvent


@dataclass(frozen=True)
class SessionMetrics:
    total_duration: float
    forwarded_duration: float
    time_sent_ratio: float
    event_count: int
    frames_processed: int


@dataclass
class SessionResult:
    events: list
    decisions: list
    metrics: SessionMetrics
    trace: EnergyTrace
    skipped: list


def union_length(intervals: Iterable) -> float:
    """Total length of the union of [start, end) intervals."""
    ordered = sorted((s, e) for s, e in intervals if e > s)
    total = 0.0
    cur_s: Optional[float] = None
    cur_e = 0.0
    for s, e in ordered:
        if cur_s is None or s > cur_e:
            if cur_s is not None:
                total += cur_e - cur_s
            cur_s, cur_e = s, e
        else:
            cur_e = max(cur_e, e)
    if cur_s is not None:
        total += cur_e - cur_s
    return total


def compute_metrics(
    decisions, total: float, event_count: Optional[int] = None, frames: int = 0
) -> SessionMetrics:
    """Union-of-intervals forwarding metrics; overlaps never double-count."""
    if not (total > 0.0):
        raise ContractError("total duration must be positive")
    forwarded = union_length(
        (max(0.0, d.start), min(total, d.end)) for d in decisions
    )
    forwarded = min(forwarded, total)
    return SessionMetrics(
        total_duration=total,
        forwarded_duration=forwarded,
        time_sent_ratio=forwarded / total,
        event_count=len(decisions) if event_count is None else event_count,
        frames_processed=frames,
    )


class StreamSession:
    """Mutable per-stream pipeline state."""

    def __init__(self, cfg: SessionConfig, fmap: Optional[FrequencyMap] = None):
        cfg.validate()
        self.cfg = cfg
        self.fmap = fmap if fmap is not None else build_frequency_map(cfg.map_config)
        mc = cfg.map_config
        self.lattice_cfg = LatticeConfig(
            speed_field=self.fmap.speed_field,
            k_p=mc.k_p,
            k_v=mc.k_v,
            dt=mc.dt,
            dx=mc.dx,
            boundary=cfg.boundary,
        )
        self.drive_cfg = DriveConfig(
            fmap=self.fmap, steps_per_frame=cfg.steps_per_frame
        )
        self.state = LatticeState.zeros(mc.grid_size)
        self.detector = DriftDetector(
            window=cfg.threshold_window,
            alpha=cfg.trend_alpha,
            persistence=cfg.persistence,
            cooldown=cfg.cooldown,
        )
        self._last_t: Optional[float] = None

    def process_frame(self, frame: ProbabilityFrame, on_step=None):
        """Drive one frame through the lattice; returns (event, trace row)."""
        if self._last_t is not None and not (frame.t > self._last_t):
            raise ContractError(
                f"frame at t={frame.t!r} is not after previous t={self._last_t!r}"
            )
        frame.validate(self.cfg.map_config.num_categories)
        self._last_t = frame.t
        for _ in range(self.cfg.steps_per_frame):
            source = build_source(frame, self.state.time_steps, self.drive_cfg)
            self.state = step(self.state, self.lattice_cfg, source)
            if on_step is not None:
                on_step(self.state)
        energy = total_energy(self.state)
        return self.detector.observe_energy(frame.t, energy, self.cfg.stride_seconds)


def process_stream(frames: Iterable[ProbabilityFrame], cfg: SessionConfig) -> SessionResult:
    """Run a whole frame stream through a fresh session.

    Frames with out-of-range probabilities are reported and skipped; frames
    out of time order abort the run. The gate interval for an event is the
    trailing analysis window ending at the detection frame, clipped to the
    stream bounds.
    """
    session = StreamSession(cfg)
    events = []
    decisions = []
    skipped = []
    trace = EnergyTrace()
    frames_processed = 0
    last_time = 0.0

    for index, frame in enumerate(frames):
        try:
            event, row = session.process_frame(frame)
        except ContractError:
            raise
        except WavegateError as exc:
            skipped.append((index, str(exc)))
            log.warning("skipping frame %d: %s", index, exc)
            continue
        frames_processed += 1
        last_time = frame.t
        trace.append(row)
        if event is not None:
            events.append(event)
            start = max(0.0, event.frame_time - cfg.window_seconds)
            if event.frame_time > start:
                decisions.append(
                    GateDecision(start=start, end=event.frame_time, event=event)
                )

    total = last_time + cfg.stride_seconds if frames_processed else 0.0
    if total > 0.0:
        metrics = compute_metrics(decisions, total, frames=frames_processed)
    else:
        metrics = SessionMetrics(0.0, 0.0, 0.0, 0, 0)
    return SessionResult(
        events=events,
        decisions=decisions,
        metrics=metrics,
        trace=trace,
        skipped=skipped,
    )
