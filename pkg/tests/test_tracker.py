import dataclasses

import numpy as np
import pytest

from woselm_track import checkpoint, tracker
from woselm_track.evaluation import overlap_series
from woselm_track.geometry import BBox, RingSpec, sample_ring
from woselm_track.sequences import SyntheticParams, render_synthetic
from woselm_track.tracker import TrackerConfig, TrackingError


@pytest.fixture(scope="module")
def synthetic():
    return render_synthetic(SyntheticParams())


@pytest.fixture(scope="module")
def static_scene():
    p = SyntheticParams(n_frames=1, noise=0.0)
    frames, boxes = render_synthetic(p)
    return frames[0], boxes[0]


def test_config_validation():
    with pytest.raises(ValueError):
        TrackerConfig(pos_ring=RingSpec(0, 9, 10, 10))
    with pytest.raises(ValueError):
        TrackerConfig(search_radius=0)


def test_init_counts(synthetic):
    frames, boxes = synthetic
    st = tracker.init(frames[0], boxes[0])
    n_neg = len(sample_ring(boxes[0], RingSpec(8, 30, 70, 70), 320, 240))
    assert (st.model.s_pos, st.model.s_neg) == (9, n_neg)
    assert st.current_box == boxes[0] and st.frame_index == 0
    assert st.model.K.shape == (300, 300) and st.hidden.input_weights.shape == (300, 50)
    assert st.projection.v == 50


def test_init_errors():
    with pytest.raises(TrackingError):
        tracker.init(np.zeros((1, 1), np.uint8), BBox(0, 0, 1, 1))
    with pytest.raises(TrackingError):
        tracker.init(np.zeros((50, 50), np.uint8), BBox(40, 40, 20, 20))


def test_init_deterministic(synthetic):
    frames, boxes = synthetic
    a = checkpoint.dumps(tracker.init(frames[0], boxes[0]))
    b = checkpoint.dumps(tracker.init(frames[0], boxes[0]))
    assert a == b


def test_static_scene_holds_box(static_scene):
    frame, box = static_scene
    st = tracker.init(frame, box)
    for _ in range(3):
        st, got, diag = tracker.step(st, frame)
        assert got == box
        assert not diag["held"]


def test_repeated_first_frame_stays_close(synthetic):
    frames, boxes = synthetic
    st, got, _ = tracker.step(tracker.init(frames[0], boxes[0]), frames[0])
    assert abs(got.x - boxes[0].x) <= 2 and abs(got.y - boxes[0].y) <= 2


def test_step_rejects_size_change(synthetic):
    frames, boxes = synthetic
    st = tracker.init(frames[0], boxes[0])
    with pytest.raises(TrackingError):
        tracker.step(st, frames[1][:-1])


def test_step_diagnostics_and_audit(synthetic):
    frames, boxes = synthetic
    st = tracker.init(frames[0], boxes[0])
    s_pos, s_neg = st.model.s_pos, st.model.s_neg
    for f in frames[1:6]:
        prev = st.current_box
        origins = {tuple(o) for o in tracker.candidate_origins(prev, 20, 320, 240)}
        st, box, diag = tracker.step(st, f)
        assert (box.x, box.y) in origins             # never extrapolates
        assert diag["n_candidates"] == len(origins)
        assert sum(diag["votes"].values()) == diag["n_latter"]
        assert diag["ms"] > 0 and 0.0 <= diag["rho"] <= 1.0
        s_pos += diag["n_pos"]
        s_neg += diag["n_neg"]
        assert (st.model.s_pos, st.model.s_neg) == (s_pos, s_neg)
        assert diag["n_pos"] == 9 and box.inside(320, 240)


def test_candidate_origins_stay_in_frame():
    o = tracker.candidate_origins(BBox(0, 0, 10, 10), 3, 12, 12)
    assert {tuple(p) for p in o} == {(dx, dy) for dx in range(3) for dy in range(3)
                                     if dx * dx + dy * dy <= 9}


def test_single_frame_sequence(synthetic):
    frames, boxes = synthetic
    recs = tracker.track_sequence(frames[:1], boxes[0])
    assert len(recs) == 1 and recs[0].box == boxes[0]
    with pytest.raises(TrackingError):
        tracker.track_sequence([], boxes[0])


def test_sequence_errors_carry_frame_index(synthetic):
    frames, boxes = synthetic
    with pytest.raises(TrackingError, match="frame 2"):
        tracker.track_sequence([frames[0], frames[1], frames[2][:, :-1]], boxes[0])


@pytest.mark.slow
def test_synthetic_sequence_tracks(synthetic):
    frames, boxes = synthetic
    recs = tracker.track_sequence(frames, boxes[0])
    assert len(recs) == 60
    assert all(r.ms > 0 for r in recs)
    assert overlap_series([r.box for r in recs], boxes).mean() >= 0.5


def test_checkpoint_resume_is_seamless(synthetic):
    frames, boxes = synthetic
    st = tracker.init(frames[0], boxes[0])
    for f in frames[1:4]:
        st, _, _ = tracker.step(st, f)
    resumed = checkpoint.loads(checkpoint.dumps(st))
    assert resumed.config == st.config and resumed.frame_index == 3
    assert checkpoint.dumps(resumed) == checkpoint.dumps(st)
    for f in frames[4:7]:
        st, a, _ = tracker.step(st, f)
        resumed, b, _ = tracker.step(resumed, f)
        assert a == b
    np.testing.assert_array_equal(st.model.beta, resumed.model.beta)


def test_checkpoint_rejects_garbage(synthetic):
    frames, boxes = synthetic
    blob = checkpoint.dumps(tracker.init(frames[0], boxes[0]))
    with pytest.raises(ValueError):
        checkpoint.loads(b"NOTATRK\0" + blob[8:])


def test_non_default_config_round_trips_through_checkpoint(synthetic):
    frames, boxes = synthetic
    cfg = dataclasses.replace(TrackerConfig(), n_hidden=40, C=10.0, search_radius=5,
                              regularizer_mode="fixed", rho_mode="fixed", rho_value=0.5)
    st = tracker.init(frames[0], boxes[0], cfg)
    st, _, _ = tracker.step(st, frames[1])
    back = checkpoint.loads(checkpoint.dumps(st))
    assert back.config == cfg
    assert back.model.rho_mode == "fixed" and back.model.rho_value == 0.5
