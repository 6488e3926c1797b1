"""Integral images, rectangle filters and the sparse random projection.

A sample window is described by ``v`` features. Feature ``k`` is a signed sum
of 2-4 area-normalised rectangle means taken inside the window, with weights
``+sqrt(tau)`` or ``-sqrt(tau)`` where ``tau = window_pixels / 4``. Only the
non-zero entries of the projection are stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import BBox

MIN_ENTRIES = 2
MAX_ENTRIES = 4


class IntegralImage:
    """Cumulative-sum table with a zero first row and column.

    ``table[y, x]`` is the sum of every pixel strictly above row ``y`` and
    strictly left of column ``x``, so it has shape ``(height + 1, width + 1)``.
    """

    def __init__(self, table: np.ndarray):
        self.table = table
        self.height = table.shape[0] - 1
        self.width = table.shape[1] - 1
        self._flat_f8 = None

    def flat_float(self) -> np.ndarray:
        """Raveled float64 copy, exact while sums stay below 2**53."""
        if self._flat_f8 is None:
            self._flat_f8 = self.table.ravel().astype(np.float64)
        return self._flat_f8

    def box_sum(self, x: int, y: int, w: int, h: int):
        t = self.table
        return t[y + h, x + w] - t[y, x + w] - t[y + h, x] + t[y, x]


def integral_image(img: np.ndarray) -> IntegralImage:
    """Build the table for a 2-D grayscale image.

    Integer images accumulate in int64 (exact); float images in float64.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {img.shape}")
    dtype = np.float64 if np.issubdtype(img.dtype, np.floating) else np.int64
    table = np.zeros((img.shape[0] + 1, img.shape[1] + 1), dtype=dtype)
    np.cumsum(img, axis=0, dtype=dtype, out=table[1:, 1:])
    np.cumsum(table[1:, 1:], axis=1, out=table[1:, 1:])
    return IntegralImage(table)


@dataclass(frozen=True)
class RectFilter:
    """Box filter at window-relative offset ``(dx, dy)`` with size ``width x height``."""

    dx: int
    dy: int
    width: int
    height: int


def rect_sum(ii: IntegralImage, window_origin: tuple[int, int], f: RectFilter) -> float:
    """Mean intensity of the filter rectangle placed at ``window_origin``."""
    x = window_origin[0] + f.dx
    y = window_origin[1] + f.dy
    if (f.width < 1 or f.height < 1 or x < 0 or y < 0
            or x + f.width > ii.width or y + f.height > ii.height):
        raise ValueError(f"rectangle {f} at origin {window_origin} leaves the "
                         f"{ii.width}x{ii.height} image")
    return float(ii.box_sum(x, y, f.width, f.height)) / (f.width * f.height)


@dataclass
class SparseProjection:
    v: int
    window_w: int
    window_h: int
    rows: list[list[tuple[RectFilter, float]]]
    seed: int
    # flattened corner offsets, areas and weights for batch extraction,
    # rebuilt per image stride; see _corner_table
    _corners: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if len(self.rows) != self.v:
            raise ValueError("row count does not match v")
        for k, row in enumerate(self.rows):
            if not MIN_ENTRIES <= len(row) <= MAX_ENTRIES:
                raise ValueError(f"row {k} has {len(row)} entries")
            for f, _ in row:
                if (f.dx < 0 or f.dy < 0 or f.dx + f.width > self.window_w
                        or f.dy + f.height > self.window_h):
                    raise ValueError(f"filter {f} does not fit the window")

    def _corner_table(self, stride: int):
        """``(offsets, area, weight)``: offsets of shape ``(v, 16)`` hold the four
        corners of up to four rectangles per row; ``area`` and ``weight`` are
        ``(v, 4)``, unused slots carry area 1 and weight 0."""
        if stride not in self._corners:
            off = np.zeros((self.v, 4 * MAX_ENTRIES), dtype=np.intp)
            area = np.ones((self.v, MAX_ENTRIES))
            weight = np.zeros((self.v, MAX_ENTRIES))
            for k, row in enumerate(self.rows):
                for e, (f, wgt) in enumerate(row):
                    x0, y0, x1, y1 = f.dx, f.dy, f.dx + f.width, f.dy + f.height
                    off[k, 4 * e:4 * e + 4] = [y1 * stride + x1, y0 * stride + x1,
                                               y1 * stride + x0, y0 * stride + x0]
                    area[k, e] = f.width * f.height
                    weight[k, e] = wgt
            self._corners[stride] = (off, area, weight)
        return self._corners[stride]

    @property
    def tau(self) -> float:
        return self.window_w * self.window_h / 4.0

    def filters(self) -> list[RectFilter]:
        """Distinct rectangles referenced by any row, in first-use order."""
        seen: dict[RectFilter, None] = {}
        for row in self.rows:
            for f, _ in row:
                seen.setdefault(f, None)
        return list(seen)

    def dense_matrix(self) -> tuple[np.ndarray, list[RectFilter]]:
        """Materialise the projection against :meth:`filters` responses."""
        filters = self.filters()
        col = {f: i for i, f in enumerate(filters)}
        P = np.zeros((self.v, len(filters)))
        for k, row in enumerate(self.rows):
            for f, wgt in row:
                P[k, col[f]] += wgt
        return P, filters


def generate_projection(seed: int, v: int, window_w: int, window_h: int) -> SparseProjection:
    """Draw the fixed projection for a ``window_w x window_h`` window.

    Each row gets ``c`` in {2, 3, 4} rectangles with uniform size and uniform
    offset inside the window, each weighted ``+-sqrt(tau)`` with equal odds.
    """
    if v < 1:
        raise ValueError("v must be >= 1")
    if window_w < 2 or window_h < 2:
        raise ValueError(f"window {window_w}x{window_h} too small for projection")
    rng = np.random.default_rng(seed)
    amp = np.sqrt(window_w * window_h / 4.0)
    rows = []
    for _ in range(v):
        c = int(rng.integers(MIN_ENTRIES, MAX_ENTRIES + 1))
        row = []
        for _ in range(c):
            w = int(rng.integers(1, window_w + 1))
            h = int(rng.integers(1, window_h + 1))
            dx = int(rng.integers(0, window_w - w + 1))
            dy = int(rng.integers(0, window_h - h + 1))
            sign = 1.0 if rng.random() < 0.5 else -1.0
            row.append((RectFilter(dx, dy, w, h), sign * amp))
        rows.append(row)
    return SparseProjection(v=v, window_w=window_w, window_h=window_h, rows=rows, seed=seed)


def extract_features_batch(ii: IntegralImage, origins: np.ndarray,
                           proj: SparseProjection) -> np.ndarray:
    """Features for many windows at once; ``origins`` is ``(n, 2)`` of ``(x, y)``.

    Returns an ``(n, v)`` float array. Every window must lie inside the image.
    """
    origins = np.asarray(origins, dtype=np.int64).reshape(-1, 2)
    n = origins.shape[0]
    if n == 0:
        return np.zeros((0, proj.v))
    ox, oy = origins[:, 0], origins[:, 1]
    if (ox.min() < 0 or oy.min() < 0 or ox.max() + proj.window_w > ii.width
            or oy.max() + proj.window_h > ii.height):
        raise ValueError("window leaves the image")
    stride = ii.width + 1
    off, area, weight = proj._corner_table(stride)
    base = (oy * stride + ox).astype(np.intp)
    c = ii.flat_float().take(base[:, None, None] + off[None, :, :]).reshape(n, proj.v, -1, 4)
    # integer-exact rectangle sums, then the same mean-times-weight as rect_sum
    sums = (c[..., 0] - c[..., 1]) - (c[..., 2] - c[..., 3])
    return np.einsum("nkr,kr->nk", sums / area, weight)


def extract_features(ii: IntegralImage, box: BBox, proj: SparseProjection) -> np.ndarray:
    if (box.w, box.h) != (proj.window_w, proj.window_h):
        raise ValueError(f"box {box.w}x{box.h} does not match projection window "
                         f"{proj.window_w}x{proj.window_h}")
    return extract_features_batch(ii, np.array([[box.x, box.y]]), proj)[0]
