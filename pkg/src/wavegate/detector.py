"""Energy sampling, adaptive thresholding and persistence-filtered detection.

The per-frame drift metric is the absolute first difference of total lattice
energy divided by the frame stride. A ring buffer of the last W metrics
yields an adaptive threshold mu + 2*sigma*(1 + alpha*trend); during the
bootstrap phase (fewer than 5 samples) a simpler mu + 1.5*sigma is used with
a 0.1 sigma fallback for a single sample. A frame whose metric exceeds the
threshold is only a candidate: an event is confirmed when at least half of
the last P candidates are set and the cooldown since the previous event has
elapsed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractError

TREND_EPS = 1e-8
BOOTSTRAP_MIN = 5
SIGMA_FALLBACK = 0.1


def total_energy(state) -> float:
    """Half the sum of squared field values over all cells."""
    p, vx, vy = state.p, state.vx, state.vy
    return 0.5 * float(np.sum(p * p) + np.sum(vx * vx) + np.sum(vy * vy))


def drift_metric(prev_energy: Optional[float], curr_energy: float, frame_dt: float) -> float:
    """Absolute energy change rate between consecutive frame samples."""
    if not (frame_dt > 0.0):
        raise ContractError("frame_dt must be positive")
    if prev_energy is None:
        return 0.0
    return abs(curr_energy - prev_energy) / frame_dt


class AdaptiveThreshold:
    """Sliding-window threshold with a linear-regression trend boost."""

    def __init__(self, window: int = 20, alpha: float = 0.2):
        if window < 1:
            raise ContractError("window must be >= 1")
        self.window = window
        self.alpha = alpha
        self.buffer: deque = deque(maxlen=window)

    def update(self, value: float) -> float:
        """Push one metric sample and return the current threshold."""
        self.buffer.append(float(value))
        v = np.asarray(self.buffer)
        n = v.size
        mu = float(v.mean())
        if n < BOOTSTRAP_MIN:
            sigma = float(v.std(ddof=1)) if n > 1 else SIGMA_FALLBACK
            return mu + 1.5 * sigma
        sigma = float(v.std(ddof=1))
        if n >= 3:
            x = np.arange(n, dtype=float)
            xc = x - x.mean()
            slope = float(np.dot(xc, v - mu) / np.dot(xc, xc))
            f_trend = abs(slope) / (sigma + TREND_EPS)
        else:
            f_trend = 0.0
        return mu + 2.0 * sigma * (1.0 + self.alpha * f_trend)


def update_threshold(ts: AdaptiveThreshold, v_new: float) -> float:
    """Operation-style alias for :meth:`AdaptiveThreshold.update`."""
    return ts.update(v_new)


@dataclass(frozen=True)
class DriftEvent:
    frame_time: float
    metric: float
    threshold: float


@dataclass(frozen=True)
class TraceRow:
    frame_time: float
    energy: float
    metric: float
    threshold: float
    candidate: bool
    event: bool


@dataclass
class EnergyTrace:
    """Append-only per-frame record of the detector's view of the stream."""

    rows: list = field(default_factory=list)

    CSV_HEADER = "frame_time,energy,metric,threshold,candidate,event"

    def append(self, row: TraceRow) -> None:
        if self.rows and not (row.frame_time > self.rows[-1].frame_time):
            raise ContractError("trace frame_time must be strictly increasing")
        if row.energy < 0.0:
            raise ContractError("energy cannot be negative")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv_lines(self):
        yield self.CSV_HEADER
        for r in self.rows:
            yield (
                f"{r.frame_time!r},{r.energy!r},{r.metric!r},{r.threshold!r},"
                f"{int(r.candidate)},{int(r.event)}"
            )


class DriftDetector:
    """Per-stream detection state machine.

    Frame indices count processed frames from zero; the cooldown compares
    indices, so with cooldown C two confirmed events are always more than C
    frames apart. The persistence buffer is cleared when an event fires and
    must refill to P entries before the next confirmation.
    """

    def __init__(
        self,
        window: int = 20,
        alpha: float = 0.2,
        persistence: int = 3,
        cooldown: int = 3,
    ):
        if persistence < 1:
            raise ContractError("persistence must be >= 1")
        if cooldown < 0:
            raise ContractError("cooldown must be >= 0")
        self.threshold = AdaptiveThreshold(window=window, alpha=alpha)
        self.persistence = persistence
        self.cooldown = cooldown
        self.persistence_buffer: deque = deque(maxlen=persistence)
        self.last_event_frame: Optional[int] = None
        self.prev_energy: Optional[float] = None
        self.frame_index = -1
        self._last_time: Optional[float] = None

    def detect_frame(self, frame_time: float, metric: float, energy: float = 0.0):
        """Process one frame's metric; returns (event-or-None, trace row)."""
        if self._last_time is not None and not (frame_time > self._last_time):
            raise ContractError(
                f"frame_time {frame_time!r} not after previous {self._last_time!r}"
            )
        self._last_time = frame_time
        self.frame_index += 1

        t_adapt = self.threshold.update(metric)
        candidate = metric > t_adapt
        self.persistence_buffer.append(candidate)

        event = None
        if len(self.persistence_buffer) >= self.persistence:
            ratio = sum(self.persistence_buffer) / self.persistence
            off_cooldown = (
                self.last_event_frame is None
                or self.frame_index - self.last_event_frame > self.cooldown
            )
            if ratio >= 0.5 and off_cooldown:
                event = DriftEvent(
                    frame_time=frame_time, metric=metric, threshold=t_adapt
                )
                self.last_event_frame = self.frame_index
                self.persistence_buffer.clear()

        row = TraceRow(
            frame_time=frame_time,
            energy=energy,
            metric=metric,
            threshold=t_adapt,
            candidate=candidate,
            event=event is not None,
        )
        return event, row

    def observe_energy(self, frame_time: float, energy: float, frame_dt: float):
        """Convenience wrapper: derive the metric from an energy sample."""
        metric = drift_metric(self.prev_energy, energy, frame_dt)
        self.prev_energy = energy
        return self.detect_frame(frame_time, metric, energy=energy)


def detect_frame(ds: DriftDetector, frame_time: float, metric: float, energy: float = 0.0):
    """Operation-style alias for :meth:`DriftDetector.detect_frame`."""
    return ds.detect_frame(frame_time, metric, energy=energy)
