"""FFT analysis of recorded pressure-field dynamics.

Per-cell time series are mean-removed and transformed; the dominant
positive-frequency bin is reported for every cell whose temporal variance
clears a percentile threshold, and dominant frequencies are labeled with
canonical neural bands. All reported frequencies respect the Nyquist bound
of the recording cadence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .drive import ProbabilityFrame
from .errors import ContractError, InsufficientDataError
from .gating import StreamSession

BAND_NONE = "none"
# Half-open [lo, hi) except gamma, which includes its upper edge.
BANDS = (
    ("theta", 4.0, 8.0),
    ("alpha", 8.0, 12.0),
    ("beta", 13.0, 30.0),
    ("gamma", 30.0, 50.0),
)


def band_for(freq_hz: float) -> str:
    for name, lo, hi in BANDS:
        if lo <= freq_hz < hi or (name == "gamma" and freq_hz == hi):
            return name
    return BAND_NONE


@dataclass
class FieldRecording:
    """Stack of pressure-field snapshots at a fixed cadence."""

    samples: np.ndarray  # (T, G, G)
    sample_dt: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 3 or self.samples.shape[0] < 2:
            raise ContractError("recording needs at least 2 snapshots")
        if not (self.sample_dt > 0.0):
            raise ContractError("sample_dt must be positive")

    @property
    def nyquist_hz(self) -> float:
        return 0.5 / self.sample_dt


@dataclass
class FrequencyReport:
    dominant: np.ndarray  # (G, G) Hz, NaN on masked cells
    mask: np.ndarray  # (G, G) bool, True = retained
    bands: np.ndarray  # (G, G) of band labels, "none" on masked cells

    def to_csv_lines(self) -> Iterable[str]:
        yield "x,y,dominant_hz,band,retained"
        g = self.dominant.shape[0]
        for x in range(g):
            for y in range(self.dominant.shape[1]):
                dom = self.dominant[x, y]
                dom_s = "" if np.isnan(dom) else repr(float(dom))
                yield f"{x},{y},{dom_s},{self.bands[x, y]},{int(self.mask[x, y])}"


def record_pfield(
    session: StreamSession,
    frames: Iterable[ProbabilityFrame],
    every_n_steps: int = 1,
) -> FieldRecording:
    """Run frames through a session, snapshotting p every n-th lattice step."""
    if every_n_steps < 1:
        raise ContractError("every_n_steps must be >= 1")
    snaps = []
    counter = 0

    def on_step(state):
        nonlocal counter
        counter += 1
        if counter % every_n_steps == 0:
            snaps.append(state.p.copy())

    for frame in frames:
        session.process_frame(frame, on_step=on_step)
    if len(snaps) < 2:
        raise InsufficientDataError(
            f"only {len(snaps)} snapshots captured; feed more frames or lower the cadence"
        )
    return FieldRecording(
        samples=np.stack(snaps), sample_dt=every_n_steps * session.cfg.map_config.dt
    )


def dominant_frequency_map(
    rec: FieldRecording, variance_percentile: float = 75.0
) -> FrequencyReport:
    """Dominant-frequency map over variance-retained cells.

    Cells at or below the variance percentile are masked. Retained cells get
    the frequency of their largest positive-frequency FFT magnitude (mean
    removed, no zero padding, so the bin grid is exactly k/(T*sample_dt)).
    """
    t = rec.samples.shape[0]
    if t < 4:
        raise InsufficientDataError(f"need at least 4 samples, got {t}")
    g1, g2 = rec.samples.shape[1], rec.samples.shape[2]

    series = rec.samples.reshape(t, -1)
    variances = series.var(axis=0)
    cutoff = np.percentile(variances, variance_percentile)
    retained = variances > cutoff

    dominant = np.full(g1 * g2, np.nan)
    if retained.any():
        detrended = series[:, retained] - series[:, retained].mean(axis=0)
        spectrum = np.abs(np.fft.rfft(detrended, axis=0))
        freqs = np.fft.rfftfreq(t, d=rec.sample_dt)
        # Bin 0 is the (removed) mean; dominate over strictly positive bins.
        best = np.argmax(spectrum[1:, :], axis=0) + 1
        dominant[retained] = freqs[best]

    bands = np.full(g1 * g2, BAND_NONE, dtype=object)
    for idx in np.flatnonzero(retained):
        bands[idx] = band_for(dominant[idx])
    return FrequencyReport(
        dominant=dominant.reshape(g1, g2),
        mask=retained.reshape(g1, g2),
        bands=bands.reshape(g1, g2),
    )
