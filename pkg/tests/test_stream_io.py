import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavegate import stream_io
from wavegate.detector import DriftEvent, EnergyTrace, TraceRow
from wavegate.drive import ProbabilityFrame
from wavegate.errors import ConfigurationError, FrameFormatError
from wavegate.gating import GateDecision, SessionMetrics


class TestReadFrames:
    def test_two_valid_lines(self):
        text = '{"t": 0.0, "probs": [0.1, 0.2]}\n{"t": 1.0, "probs": [0.3, 0.4]}\n'
        frames = stream_io.read_frames(io.StringIO(text))
        assert len(frames) == 2
        assert frames[1].t == 1.0
        assert frames[1].probs.tolist() == [0.3, 0.4]

    def test_empty_input(self):
        assert stream_io.read_frames(io.StringIO("")) == []

    def test_blank_lines_skipped(self):
        text = '\n{"t": 0.0, "probs": [0.5]}\n\n'
        assert len(stream_io.read_frames(io.StringIO(text))) == 1

    def test_wrong_length_names_line(self):
        text = '{"t": 0.0, "probs": [0.1, 0.2]}\n{"t": 1.0, "probs": [0.1]}\n'
        with pytest.raises(FrameFormatError, match="line 2"):
            stream_io.read_frames(io.StringIO(text), num_categories=2)

    def test_malformed_json_names_line(self):
        with pytest.raises(FrameFormatError, match="line 1"):
            stream_io.read_frames(io.StringIO("not json\n"))

    def test_missing_keys(self):
        with pytest.raises(FrameFormatError):
            stream_io.read_frames(io.StringIO('{"time": 0.0}\n'))

    def test_non_monotone_timestamps_fatal(self):
        text = '{"t": 1.0, "probs": [0.5]}\n{"t": 1.0, "probs": [0.5]}\n'
        with pytest.raises(FrameFormatError, match="line 2"):
            stream_io.read_frames(io.StringIO(text))

    def test_round_trip_exact(self):
        rng = np.random.default_rng(0)
        frames = [
            ProbabilityFrame(t=k * 1.0 + 0.123456789012, probs=rng.uniform(0, 1, 7))
            for k in range(5)
        ]
        buf = io.StringIO()
        stream_io.write_frames(frames, buf)
        buf.seek(0)
        back = stream_io.read_frames(buf)
        for a, b in zip(frames, back):
            assert a.t == b.t
            assert np.array_equal(a.probs, b.probs)


class TestScenarios:
    def test_stationary_no_noise_identical_frames(self):
        s = stream_io.SyntheticScenario(
            kind="stationary",
            duration_frames=5,
            num_categories=4,
            background_categories={1: 0.7},
            noise_sigma=0.0,
        )
        frames = stream_io.generate_scenario(s)
        for f in frames[1:]:
            assert np.array_equal(f.probs, frames[0].probs)
        assert frames[0].probs.tolist() == [0.0, 0.7, 0.0, 0.0]

    def test_step_drift_total_variation(self):
        s = stream_io.SyntheticScenario(
            kind="step_drift",
            duration_frames=10,
            num_categories=8,
            change_frame=5,
            background_categories={0: 0.8},
            foreground_categories={4: 0.8},
            noise_sigma=0.0,
        )
        frames = stream_io.generate_scenario(s)
        tv = float(np.sum(np.abs(frames[5].probs - frames[4].probs)))
        assert tv >= 0.8

    def test_same_seed_identical_streams(self):
        s = stream_io.reference_scenario("step_drift")
        a = stream_io.generate_scenario(s)
        b = stream_io.generate_scenario(s)
        for fa, fb in zip(a, b):
            assert np.array_equal(fa.probs, fb.probs)

    def test_swap_preserves_total_mass(self):
        s = stream_io.SyntheticScenario(
            kind="subcategory_swap",
            duration_frames=8,
            num_categories=6,
            change_frame=4,
            foreground_categories={1: 0.6, 3: 0.2},
            noise_sigma=0.0,
        )
        frames = stream_io.generate_scenario(s)
        before = frames[3].probs
        after = frames[4].probs
        assert before.sum() == pytest.approx(after.sum())
        assert before[1] == 0.6 and after[1] == 0.2
        assert before[3] == 0.2 and after[3] == 0.6

    def test_pause_gap_zeroes_then_restores(self):
        s = stream_io.SyntheticScenario(
            kind="transient_pause",
            duration_frames=10,
            num_categories=4,
            change_frame=5,
            background_categories={0: 0.3},
            foreground_categories={2: 0.9},
            noise_sigma=0.0,
        )
        frames = stream_io.generate_scenario(s)
        fg = [f.probs[2] for f in frames]
        assert fg[4] == 0.9 and fg[5] == 0.0 and fg[6] == 0.0 and fg[7] == 0.9
        bg = [f.probs[0] for f in frames]
        assert all(v == 0.3 for v in bg)

    def test_noise_clipped_to_unit_interval(self):
        s = stream_io.SyntheticScenario(
            kind="stationary",
            duration_frames=50,
            num_categories=8,
            background_categories={0: 0.99},
            noise_sigma=0.5,
            seed=3,
        )
        for f in stream_io.generate_scenario(s):
            assert np.all(f.probs >= 0.0) and np.all(f.probs <= 1.0)

    def test_validation_errors(self):
        with pytest.raises(ConfigurationError):
            stream_io.SyntheticScenario(
                kind="nope", duration_frames=5, num_categories=4
            ).validate()
        with pytest.raises(ConfigurationError):
            stream_io.SyntheticScenario(
                kind="step_drift",
                duration_frames=5,
                num_categories=4,
                change_frame=9,
            ).validate()
        with pytest.raises(ConfigurationError):
            stream_io.SyntheticScenario(
                kind="stationary",
                duration_frames=5,
                num_categories=4,
                background_categories={9: 0.5},
            ).validate()

    def test_ground_truth_sidecar(self):
        s = stream_io.reference_scenario("transient_pause")
        truth = stream_io.scenario_ground_truth(s)
        assert truth["gap_start_frame"] == 30
        assert truth["gap_frames"] == 2


class TestWriters:
    def test_events_round_trip(self):
        events = [DriftEvent(3.0, 0.5, 0.25), DriftEvent(9.0, 1.5, 0.75)]
        buf = io.StringIO()
        assert stream_io.write_events(events, buf) == 2
        buf.seek(0)
        assert stream_io.read_events(buf) == events

    def test_zero_events_empty_file(self):
        buf = io.StringIO()
        assert stream_io.write_events([], buf) == 0
        assert buf.getvalue() == ""

    def test_trace_csv(self):
        trace = EnergyTrace()
        trace.append(TraceRow(0.0, 1.0, 0.0, 0.5, False, False))
        buf = io.StringIO()
        stream_io.write_trace(trace, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "frame_time,energy,metric,threshold,candidate,event"
        assert lines[1].startswith("0.0,1.0,")

    def test_report_record(self):
        m = SessionMetrics(60.0, 12.0, 0.2, 3, 60)
        buf = io.StringIO()
        stream_io.write_report(m, buf)
        record = json.loads(buf.getvalue())
        assert record["time_sent_ratio"] == 0.2
        assert record["event_count"] == 3

    def test_decisions_lines(self):
        decs = [GateDecision(1.0, 5.0, DriftEvent(5.0, 2.0, 1.0))]
        buf = io.StringIO()
        assert stream_io.write_decisions(decs, buf) == 1
        record = json.loads(buf.getvalue())
        assert record == {"start": 1.0, "end": 5.0, "event_t": 5.0}


class TestConfigFiles:
    def test_round_trip(self):
        cfg = stream_io.reference_session_config()
        text = stream_io.format_config(cfg)
        back = stream_io.parse_config_text(text)
        assert back == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown key"):
            stream_io.parse_config_text("grid_size = 16\nwibble = 3\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigurationError):
            stream_io.parse_config_text("grid_size = banana\n")

    def test_comments_and_colon_syntax(self):
        cfg = stream_io.parse_config_text(
            "# a comment\nnum_categories: 8\ngrid_size = 16  # trailing\n"
            "f_min = 51\nf_max = 85\n"
        )
        assert cfg.map_config.num_categories == 8
        assert cfg.map_config.grid_size == 16

    def test_invalid_config_content(self):
        with pytest.raises(ConfigurationError):
            stream_io.parse_config_text("f_min = 10\n")  # below step-clock Nyquist


@settings(deadline=None, max_examples=40)
@given(
    st.lists(
        st.floats(0, 1, allow_nan=False, width=32), min_size=1, max_size=12
    ),
    st.integers(0, 2**31 - 1),
)
def test_frame_round_trip_property(probs, seed):
    frames = [ProbabilityFrame(t=float(seed % 7), probs=np.asarray(probs))]
    buf = io.StringIO()
    stream_io.write_frames(frames, buf)
    buf.seek(0)
    back = stream_io.read_frames(buf)
    assert back[0].t == frames[0].t
    assert np.array_equal(back[0].probs, frames[0].probs)
