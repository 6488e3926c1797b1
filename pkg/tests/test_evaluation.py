import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from woselm_track import evaluation as ev
from woselm_track.geometry import BBox


def test_grids():
    assert ev.SUCCESS_THRESHOLDS.size == 101 and ev.SUCCESS_THRESHOLDS[50] == 0.5
    assert ev.PRECISION_THRESHOLDS.tolist() == list(range(51))


def test_overlap_series_examples():
    gt = [BBox(0, 0, 10, 10), BBox(5, 5, 20, 20)]
    assert ev.overlap_series(gt, gt).tolist() == [1.0, 1.0]
    half = [BBox(5, 0, 10, 10), BBox(15, 5, 20, 20)]
    np.testing.assert_allclose(ev.overlap_series(half, gt), [1 / 3, 1 / 3], rtol=1e-15)
    assert ev.overlap_series([], []).size == 0
    with pytest.raises(ValueError):
        ev.overlap_series(gt, gt[:1])


def test_success_examples():
    assert ev.success_rate([0.6, 0.4], 0.5) == 50.0
    assert ev.success_rate([0.5, 0.5]) == 0.0          # strict inequality
    curve = ev.success_curve([1.0] * 5)
    assert np.all(curve[:-1] == 1.0) and curve[-1] == 0.0
    assert ev.success_curve([]).tolist() == [0.0] * 101
    with pytest.raises(ValueError):
        ev.success_curve([0.5], [0.5, 0.2])


@given(st.lists(st.floats(0, 1), max_size=60))
def test_success_properties(S):
    curve = ev.success_curve(S)
    assert np.all(np.diff(curve) <= 0)
    assert np.all((curve >= 0) & (curve <= 1))
    if S:
        # curve lookup and direct count agree exactly
        assert 100.0 * curve[50] == ev.success_rate(S, 0.5)
        assert np.all(curve * len(S) == np.round(curve * len(S)))


def test_precision_examples():
    gt = [BBox(10, 10, 20, 20)] * 4
    assert ev.precision_curve(gt, gt).tolist() == [1.0] * 51
    off = [BBox(13, 14, 20, 20)] * 4                     # 3-4-5 triangle
    curve = ev.precision_curve(off, gt)
    assert curve[:5].tolist() == [0.0] * 5 and curve[5:].tolist() == [1.0] * 46


def test_precision_matches_brute_force():
    rng = np.random.default_rng(0)
    pred = [BBox(*rng.integers(0, 60, 2), *rng.integers(5, 30, 2)) for _ in range(80)]
    gt = [BBox(*rng.integers(0, 60, 2), *rng.integers(5, 30, 2)) for _ in range(80)]
    curve = ev.precision_curve(pred, gt)
    for t in range(51):
        n = 0
        for p, g in zip(pred, gt):
            d = math.hypot(p.x + p.w / 2 - g.x - g.w / 2, p.y + p.h / 2 - g.y - g.h / 2)
            n += d <= t
        assert curve[t] == n / 80
    assert np.all(np.diff(curve) >= 0)


def test_evaluate_and_csv(tmp_path):
    gt = [BBox(0, 0, 10, 10)] * 4
    pred = [BBox(0, 0, 10, 10), BBox(5, 0, 10, 10), BBox(1, 0, 10, 10), BBox(50, 50, 10, 10)]
    res = ev.evaluate(pred, gt, frame_ms=[10.0, 10.0, 20.0, 10.0])
    assert res.success_rate_at_05 == 50.0
    assert res.mean_fps == pytest.approx(1e3 * 4 / 50)
    ev.write_metrics_csv(tmp_path / "m.csv", res)
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "curve,threshold,fraction"
    assert len(lines) == 1 + 101 + 51
    assert lines[1] == "success,0.000000,0.750000"
    assert lines[51] == "success,0.500000,0.500000"
    assert lines[102] == "precision,0.000000,0.250000"
    ev.write_summary_csv(tmp_path / "s.csv", res)
    summary = dict(l.split(",") for l in (tmp_path / "s.csv").read_text().splitlines()[1:])
    assert summary["success_rate_at_0.5"] == "50.000000"
    assert "mean_fps" not in summary
    ev.write_plots(tmp_path, res)
    svg = (tmp_path / "success.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg
