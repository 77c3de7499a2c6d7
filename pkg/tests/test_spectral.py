import numpy as np
import pytest

from wavegate.drive import ProbabilityFrame
from wavegate.errors import ContractError, InsufficientDataError
from wavegate.gating import StreamSession
from wavegate.spectral import (
    FieldRecording,
    band_for,
    dominant_frequency_map,
    record_pfield,
)
from wavegate.stream_io import reference_session_config


def tone_recording(freq_hz, sample_rate=100.0, seconds=10.0, g=4, cell=(1, 2)):
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    samples = np.zeros((t.size, g, g))
    samples[:, cell[0], cell[1]] = np.sin(2 * np.pi * freq_hz * t)
    return FieldRecording(samples=samples, sample_dt=1.0 / sample_rate)


class TestBands:
    @pytest.mark.parametrize(
        "freq,band",
        [
            (4.0, "theta"),
            (7.9, "theta"),
            (8.0, "alpha"),
            (11.9, "alpha"),
            (12.0, "none"),
            (12.9, "none"),
            (13.0, "beta"),
            (25.0, "beta"),
            (29.9, "beta"),
            (30.0, "gamma"),
            (50.0, "gamma"),
            (50.1, "none"),
            (3.9, "none"),
            (0.0, "none"),
        ],
    )
    def test_band_edges(self, freq, band):
        assert band_for(freq) == band


class TestDominantFrequency:
    def test_pure_tone_recovered_within_one_bin(self):
        rec = tone_recording(20.0)
        report = dominant_frequency_map(rec)
        assert report.mask[1, 2]
        bin_width = 1.0 / (rec.samples.shape[0] * rec.sample_dt)
        assert report.dominant[1, 2] == pytest.approx(20.0, abs=bin_width)
        assert report.bands[1, 2] == "beta"

    def test_beta_band_tone(self):
        rec = tone_recording(25.0)
        report = dominant_frequency_map(rec)
        assert report.bands[1, 2] == "beta"

    def test_all_zero_recording_fully_masked(self):
        rec = FieldRecording(samples=np.zeros((64, 4, 4)), sample_dt=0.01)
        report = dominant_frequency_map(rec)
        assert not report.mask.any()
        assert np.all(np.isnan(report.dominant))
        assert np.all(report.bands == "none")

    def test_masked_cells_have_no_band(self):
        rec = tone_recording(20.0)
        report = dominant_frequency_map(rec)
        assert np.all(report.bands[~report.mask] == "none")

    def test_nyquist_bound_at_default_cadence(self):
        rng = np.random.default_rng(0)
        rec = FieldRecording(samples=rng.normal(size=(256, 8, 8)), sample_dt=0.01)
        report = dominant_frequency_map(rec)
        dom = report.dominant[report.mask]
        assert np.all(dom <= 50.0)
        assert rec.nyquist_hz == 50.0

    def test_mask_fraction_bounded_by_percentile(self):
        rng = np.random.default_rng(1)
        rec = FieldRecording(samples=rng.normal(size=(64, 16, 16)), sample_dt=0.01)
        report = dominant_frequency_map(rec, variance_percentile=75.0)
        assert report.mask.sum() <= 0.25 * 256 + 1

    def test_too_few_samples(self):
        rec = FieldRecording(samples=np.zeros((3, 4, 4)), sample_dt=0.01)
        with pytest.raises(InsufficientDataError):
            dominant_frequency_map(rec)

    def test_csv_export_shape(self):
        rec = tone_recording(20.0)
        report = dominant_frequency_map(rec)
        lines = list(report.to_csv_lines())
        assert lines[0] == "x,y,dominant_hz,band,retained"
        assert len(lines) == 1 + 16


class TestRecordPfield:
    def test_default_cadence_1000_snapshots_per_10s(self):
        cfg = reference_session_config()
        c = cfg.map_config.num_categories
        frames = [
            ProbabilityFrame(t=float(k), probs=np.full(c, 0.5)) for k in range(10)
        ]
        rec = record_pfield(StreamSession(cfg), frames, every_n_steps=1)
        assert rec.samples.shape[0] == 1000
        assert rec.sample_dt == pytest.approx(0.01)

    def test_coarse_cadence_sample_dt(self):
        cfg = reference_session_config()
        c = cfg.map_config.num_categories
        frames = [
            ProbabilityFrame(t=float(k), probs=np.full(c, 0.5)) for k in range(5)
        ]
        rec = record_pfield(StreamSession(cfg), frames, every_n_steps=100)
        assert rec.samples.shape[0] == 5
        assert rec.sample_dt == pytest.approx(1.0)

    def test_zero_drive_zero_snapshots(self):
        cfg = reference_session_config()
        c = cfg.map_config.num_categories
        frames = [
            ProbabilityFrame(t=float(k), probs=np.zeros(c)) for k in range(3)
        ]
        rec = record_pfield(StreamSession(cfg), frames)
        assert np.all(rec.samples == 0.0)

    def test_bad_cadence(self):
        cfg = reference_session_config()
        with pytest.raises(ContractError):
            record_pfield(StreamSession(cfg), [], every_n_steps=0)


class TestKnownSignalRecovery:
    def test_driven_parcel_dominant_matches_zero_crossing_oracle(self):
        # single active category; the cell series oscillates at the carrier's
        # step-clock alias, well below Nyquist
        cfg = reference_session_config()
        c = cfg.map_config.num_categories
        probs = np.zeros(c)
        probs[4] = 1.0
        frames = [ProbabilityFrame(t=float(k), probs=probs) for k in range(10)]
        session = StreamSession(cfg)
        rec = record_pfield(session, frames, every_n_steps=1)
        report = dominant_frequency_map(rec, variance_percentile=75.0)

        start, end = session.fmap.parcels[4]
        flat_dom = report.dominant.reshape(-1)
        flat_mask = report.mask.reshape(-1)
        assert flat_mask[start:end].any()

        bin_width = 1.0 / (rec.samples.shape[0] * rec.sample_dt)
        series = rec.samples.reshape(rec.samples.shape[0], -1)[:, start]
        series = series - series.mean()
        crossings = np.sum(np.diff(np.signbit(series)) != 0)
        f_zero_crossing = crossings / (2.0 * rec.samples.shape[0] * rec.sample_dt)
        for idx in range(start, end):
            if flat_mask[idx]:
                assert abs(flat_dom[idx] - f_zero_crossing) <= 2 * bin_width
