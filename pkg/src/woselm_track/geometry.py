"""Bounding boxes and ring sampling around a tracked window."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True, order=True)
class BBox:
    """Integer axis-aligned box, ``(x, y)`` is the top-left pixel."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"degenerate box {self.w}x{self.h}")

    @property
    def center(self) -> tuple[float, float]:
        return self.x + self.w / 2.0, self.y + self.h / 2.0

    @property
    def area(self) -> int:
        return self.w * self.h

    def shifted(self, dx: int, dy: int) -> "BBox":
        return BBox(self.x + dx, self.y + dy, self.w, self.h)

    def inside(self, frame_w: int, frame_h: int) -> bool:
        return (self.x >= 0 and self.y >= 0
                and self.x + self.w <= frame_w and self.y + self.h <= frame_h)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.x, self.y, self.w, self.h


@dataclass(frozen=True)
class RingSpec:
    """Annulus of translations ``r_lo^2 < dx^2 + dy^2 < r_hi^2`` on a step grid,
    truncated to ``|dx| <= clamp_half_width_x`` and ``|dy| <= clamp_half_width_y``."""

    r_lo: float
    r_hi: float
    clamp_half_width_x: int
    clamp_half_width_y: int
    step: int = 1

    def __post_init__(self):
        if not 0 <= self.r_lo <= self.r_hi:
            raise ValueError("ring radii must satisfy 0 <= r_lo <= r_hi")
        if self.step < 1:
            raise ValueError("ring step must be >= 1")


def center_distance_sq(a: BBox, b: BBox) -> float:
    ax, ay = a.center
    bx, by = b.center
    return (ax - bx) ** 2 + (ay - by) ** 2


def iou(a: BBox, b: BBox) -> float:
    iw = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    ih = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


@lru_cache(maxsize=64)
def _ring_offsets(spec: RingSpec) -> np.ndarray:
    kx = spec.clamp_half_width_x // spec.step
    ky = spec.clamp_half_width_y // spec.step
    dx = np.arange(-kx, kx + 1) * spec.step
    dy = np.arange(-ky, ky + 1) * spec.step
    # dy outer, dx inner
    gy, gx = np.meshgrid(dy, dx, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    d2 = gx * gx + gy * gy
    keep = (d2 > spec.r_lo ** 2) & (d2 < spec.r_hi ** 2)
    out = np.stack([gx[keep], gy[keep]], axis=1)
    out.setflags(write=False)
    return out


def ring_offsets(spec: RingSpec) -> np.ndarray:
    """All ``(dx, dy)`` translations of the ring, row-major, as an ``(n, 2)`` array."""
    return _ring_offsets(spec)


def sample_ring_origins(center: BBox, spec: RingSpec, frame_w: int, frame_h: int) -> np.ndarray:
    """Top-left corners of the in-frame ring samples, ``(n, 2)`` int array."""
    off = ring_offsets(spec)
    xs = center.x + off[:, 0]
    ys = center.y + off[:, 1]
    ok = (xs >= 0) & (ys >= 0) & (xs + center.w <= frame_w) & (ys + center.h <= frame_h)
    return np.stack([xs[ok], ys[ok]], axis=1)


def sample_ring(center: BBox, spec: RingSpec, frame_w: int, frame_h: int) -> list[BBox]:
    """Translations of ``center`` whose squared center displacement lies strictly
    inside the ring and which stay fully inside the frame.

    The box itself (zero displacement) is never returned, even for ``r_lo = 0``.
    """
    origins = sample_ring_origins(center, spec, frame_w, frame_h)
    return [BBox(int(x), int(y), center.w, center.h) for x, y in origins]


def disc_offsets(radius: int) -> np.ndarray:
    """Integer offsets with ``dx^2 + dy^2 <= radius^2``, row-major, including (0, 0)."""
    r = int(radius)
    d = np.arange(-r, r + 1)
    gy, gx = np.meshgrid(d, d, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    keep = gx * gx + gy * gy <= r * r
    return np.stack([gx[keep], gy[keep]], axis=1)
