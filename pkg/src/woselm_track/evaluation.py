"""Success and precision evaluation against ground-truth boxes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import BBox, center_distance_sq, iou

SUCCESS_THRESHOLDS = np.round(np.linspace(0.0, 1.0, 101), 2)
PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)


def _check_lengths(pred, gt):
    if len(pred) != len(gt):
        raise ValueError(f"{len(pred)} predictions for {len(gt)} ground-truth boxes")


def overlap_series(pred: list[BBox], gt: list[BBox]) -> np.ndarray:
    _check_lengths(pred, gt)
    return np.array([iou(p, g) for p, g in zip(pred, gt)], dtype=np.float64)


def center_errors(pred: list[BBox], gt: list[BBox]) -> np.ndarray:
    _check_lengths(pred, gt)
    return np.array([math.sqrt(center_distance_sq(p, g)) for p, g in zip(pred, gt)])


def success_curve(S, thresholds=SUCCESS_THRESHOLDS) -> np.ndarray:
    """Fraction of frames with overlap strictly above each threshold."""
    S = np.asarray(S, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be sorted ascending")
    if S.size == 0:
        return np.zeros(thresholds.shape)
    counts = np.array([np.count_nonzero(S > t) for t in thresholds])
    return counts / S.size


def success_rate(S, t0: float = 0.5) -> float:
    """Percentage of frames with overlap above ``t0``."""
    S = np.asarray(S, dtype=np.float64)
    if S.size == 0:
        return 0.0
    # same fraction as the curve so both routes agree exactly
    return 100.0 * (np.count_nonzero(S > t0) / S.size)


def precision_curve(pred, gt, pixel_thresholds=PRECISION_THRESHOLDS) -> np.ndarray:
    """Fraction of frames whose center error is at most each pixel threshold."""
    err = center_errors(pred, gt)
    thresholds = np.asarray(pixel_thresholds, dtype=np.float64)
    if err.size == 0:
        return np.zeros(thresholds.shape)
    return np.array([np.count_nonzero(err <= t) for t in thresholds]) / err.size


@dataclass
class EvalResult:
    overlaps: np.ndarray
    center_errors: np.ndarray
    success_thresholds: np.ndarray
    success: np.ndarray
    precision_thresholds: np.ndarray
    precision: np.ndarray
    success_rate_at_05: float
    mean_fps: float = float("nan")

    @property
    def mean_overlap(self) -> float:
        return float(self.overlaps.mean()) if self.overlaps.size else float("nan")

    @property
    def auc(self) -> float:
        """Mean of the success curve over its threshold grid."""
        return float(self.success.mean())

    def precision_at(self, px: float = 20.0) -> float:
        idx = np.searchsorted(self.precision_thresholds, px)
        return float(self.precision[idx])


def evaluate(pred: list[BBox], gt: list[BBox], frame_ms=None) -> EvalResult:
    S = overlap_series(pred, gt)
    fps = float("nan")
    if frame_ms is not None and len(frame_ms):
        total = float(np.sum(frame_ms))
        fps = 1e3 * len(frame_ms) / total if total > 0 else float("inf")
    return EvalResult(
        overlaps=S,
        center_errors=center_errors(pred, gt),
        success_thresholds=SUCCESS_THRESHOLDS,
        success=success_curve(S),
        precision_thresholds=PRECISION_THRESHOLDS,
        precision=precision_curve(pred, gt),
        success_rate_at_05=success_rate(S, 0.5),
        mean_fps=fps,
    )


# -- emission ---------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_metrics_csv(path, res: EvalResult) -> None:
    """One row per threshold of each curve."""
    lines = ["curve,threshold,fraction"]
    lines += [f"success,{_fmt(t)},{_fmt(v)}" for t, v in zip(res.success_thresholds, res.success)]
    lines += [f"precision,{_fmt(t)},{_fmt(v)}"
              for t, v in zip(res.precision_thresholds, res.precision)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(path, res: EvalResult, include_fps: bool = False) -> None:
    rows = [("frames", str(res.overlaps.size)),
            ("success_rate_at_0.5", _fmt(res.success_rate_at_05)),
            ("success_auc", _fmt(res.auc)),
            ("mean_overlap", _fmt(res.mean_overlap)),
            ("precision_at_20px", _fmt(res.precision_at(20.0)))]
    if include_fps:
        rows.append(("mean_fps", f"{res.mean_fps:.2f}"))
    Path(path).write_text("metric,value\n" + "".join(f"{k},{v}\n" for k, v in rows))


def svg_plot(xs, ys, title: str, xlabel: str, ylabel: str, width: int = 400,
             height: int = 300) -> str:
    """Single-curve line plot with y in [0, 1]."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    m = 40
    x0, x1 = float(xs.min()), float(xs.max())
    span = (x1 - x0) or 1.0
    pw, ph = width - 2 * m, height - 2 * m

    def px(x, y):
        return m + (x - x0) / span * pw, m + (1.0 - y) * ph

    pts = " ".join("%.2f,%.2f" % px(x, y) for x, y in zip(xs, ys))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
        f'<polyline points="{pts}" fill="none" stroke="#c00" stroke-width="2"/>',
        f'<text x="{width / 2}" y="{m / 2}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})"'
        f' text-anchor="middle">{ylabel}</text>',
        f'<text x="{m - 4}" y="{m + 4}" text-anchor="end" font-size="10">1</text>',
        f'<text x="{m - 4}" y="{m + ph}" text-anchor="end" font-size="10">0</text>',
        f'<text x="{m}" y="{m + ph + 14}" text-anchor="middle" font-size="10">{x0:g}</text>',
        f'<text x="{m + pw}" y="{m + ph + 14}" text-anchor="middle" font-size="10">{x1:g}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def write_plots(out_dir, res: EvalResult) -> None:
    out = Path(out_dir)
    (out / "success.svg").write_text(svg_plot(res.success_thresholds, res.success,
                                              "Success plot", "overlap threshold",
                                              "success rate"))
    (out / "precision.svg").write_text(svg_plot(res.precision_thresholds, res.precision,
                                                "Precision plot", "location error threshold (px)",
                                                "precision"))
