"""Per-frame tracking output files.

``results.csv`` holds everything that is a deterministic function of the
inputs and seeds; wall-clock timings go to ``timing.csv`` so that two runs of
the same configuration give byte-identical result files. Box coordinates are
written 1-based, the same convention as the ground-truth files.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .geometry import BBox
from .tracker import TrackRecord

RESULTS_HEADER = ("frame", "x", "y", "w", "h", "max_score", "rho")
TIMING_HEADER = ("frame", "ms")


def _num(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.6f}"


def write_results_csv(path, records: list[TrackRecord]) -> None:
    lines = [",".join(RESULTS_HEADER)]
    for r in records:
        b = r.box
        lines.append(f"{r.frame},{b.x + 1},{b.y + 1},{b.w},{b.h},"
                     f"{_num(r.max_score)},{_num(r.rho)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_timing_csv(path, records: list[TrackRecord]) -> None:
    lines = [",".join(TIMING_HEADER)] + [f"{r.frame},{r.ms:.3f}" for r in records]
    Path(path).write_text("\n".join(lines) + "\n")


def _rows(path, header):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"results file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got is None or tuple(got[:len(header)]) != header:
            raise ValueError(f"{path}: expected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if row:
                yield lineno, row


def read_results_csv(path) -> list[BBox]:
    """Predicted boxes (0-based) in frame order."""
    boxes = []
    for lineno, row in _rows(path, RESULTS_HEADER):
        try:
            frame, x, y, w, h = (int(v) for v in row[:5])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: malformed row") from None
        if frame != len(boxes):
            raise ValueError(f"{path}: line {lineno}: expected frame {len(boxes)}, got {frame}")
        boxes.append(BBox(x - 1, y - 1, w, h))
    return boxes


def read_timing_csv(path) -> list[float]:
    return [float(row[1]) for _, row in _rows(path, TIMING_HEADER)]
