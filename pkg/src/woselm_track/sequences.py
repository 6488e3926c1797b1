"""Frame and ground-truth ingestion plus the synthetic sequence generator.

Portable graymap/pixmap files (P2, P3, P5, P6) are read by the built-in parser.
Other formats (JPEG, PNG as shipped with OTB-style benchmarks) go through
Pillow when it is installed.

Ground-truth files hold one ``x,y,w,h`` line per frame (comma, tab or space
separated) with 1-based coordinates; boxes are returned 0-based.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import BBox

LUMA = np.array([0.299, 0.587, 0.114])
PNM_SUFFIXES = {".pgm", ".ppm", ".pnm"}
GROUNDTRUTH_NAME = "groundtruth_rect.txt"


class SequenceError(ValueError):
    pass


# -- PNM ------------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header(data: bytes, count: int):
    pos, out = 0, []
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise SequenceError("truncated PNM header")
        out.append(m.group(1))
        pos = m.end()
    return out, pos


def read_pnm(path) -> np.ndarray:
    """Read P2/P3/P5/P6 and return a 2-D ``uint8`` grayscale array."""
    data = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _header(data, 4)
    w, h, maxval = int(w), int(h), int(maxval)
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise SequenceError(f"{path}: unsupported PNM type {magic!r}")
    if not 0 < maxval < 256:
        raise SequenceError(f"{path}: only 8-bit PNM is supported (maxval={maxval})")
    channels = 3 if magic in (b"P3", b"P6") else 1
    n = w * h * channels
    if magic in (b"P5", b"P6"):
        if len(data) < pos + 1 + n:
            raise SequenceError(f"{path}: truncated pixel data")
        raw = np.frombuffer(data, dtype=np.uint8, count=n, offset=pos + 1)
    else:
        raw = np.array(data[pos:].split()[:n], dtype=np.int64)
        if raw.size != n:
            raise SequenceError(f"{path}: expected {n} samples, found {raw.size}")
    img = raw.reshape(h, w, channels) if channels == 3 else raw.reshape(h, w)
    if maxval != 255:
        img = np.round(img.astype(np.float64) * (255.0 / maxval))
    return to_gray(img)


def write_pgm(path, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())


def to_gray(img: np.ndarray) -> np.ndarray:
    """Luma-weighted grayscale ``uint8`` image."""
    img = np.asarray(img)
    if img.ndim == 3:
        img = np.round(img[..., :3].astype(np.float64) @ LUMA)
    return np.clip(img, 0, 255).astype(np.uint8)


def read_frame(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() in PNM_SUFFIXES:
        return read_pnm(path)
    try:
        from PIL import Image
    except ImportError as exc:
        raise SequenceError(f"{path}: reading {path.suffix} frames requires Pillow") from exc
    with Image.open(path) as im:
        return to_gray(np.asarray(im.convert("RGB")))


# -- ground truth ---------------------------------------------------------

def parse_box_line(line: str, lineno: int = 0, one_based: bool = True) -> BBox:
    parts = [p for p in re.split(r"[,\t ]+", line.strip()) if p]
    if len(parts) != 4:
        raise SequenceError(f"line {lineno}: expected 4 values, got {line.strip()!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise SequenceError(f"line {lineno}: non-numeric value in {line.strip()!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise SequenceError(f"line {lineno}: non-finite value")
    x, y, w, h = (int(round(v)) for v in vals)
    if w < 1 or h < 1:
        raise SequenceError(f"line {lineno}: box size {w}x{h} is degenerate")
    off = 1 if one_based else 0
    return BBox(x - off, y - off, w, h)


def read_groundtruth(path) -> list[BBox]:
    path = Path(path)
    if not path.is_file():
        raise SequenceError(f"ground truth file not found: {path}")
    boxes = []
    for i, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        boxes.append(parse_box_line(line, i))
    if not boxes:
        raise SequenceError(f"{path}: no boxes")
    return boxes


def write_groundtruth(path, boxes) -> None:
    Path(path).write_text("".join(f"{b.x + 1},{b.y + 1},{b.w},{b.h}\n" for b in boxes))


# -- sequences ------------------------------------------------------------

@dataclass
class SequenceSpec:
    image_dir: Path
    pattern: str = "{:04d}.jpg"       # str.format pattern applied to the frame number
    groundtruth: Path | None = None
    start_index: int = 1
    n_frames: int | None = None
    attributes: list[str] = field(default_factory=list)

    def frame_path(self, i: int) -> Path:
        return Path(self.image_dir) / self.pattern.format(self.start_index + i)


@dataclass
class Sequence:
    frames: list[np.ndarray]
    groundtruth: list[BBox] | None
    spec: SequenceSpec


def load_sequence(spec: SequenceSpec, require_groundtruth: bool = False) -> Sequence:
    gt = None
    if spec.groundtruth is not None:
        gt = read_groundtruth(spec.groundtruth)
    elif require_groundtruth:
        raise SequenceError("ground truth required but no file given")

    n = spec.n_frames
    frames = []
    i = 0
    while n is None or i < n:
        p = spec.frame_path(i)
        if not p.is_file():
            if n is None and i > 0:
                break
            raise SequenceError(f"missing frame {i}: {p}")
        img = read_frame(p)
        if frames and img.shape != frames[0].shape:
            raise SequenceError(f"frame {i} ({p}) is {img.shape[1]}x{img.shape[0]}, "
                                f"expected {frames[0].shape[1]}x{frames[0].shape[0]}")
        frames.append(img)
        i += 1
    if gt is not None and (len(gt) < len(frames) or (n is None and len(gt) != len(frames))):
        raise SequenceError(f"{spec.groundtruth}: {len(gt)} boxes for {len(frames)} frames")
    if gt is not None:
        gt = gt[:len(frames)]
    return Sequence(frames, gt, spec)


# -- synthetic ------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticParams:
    width: int = 320
    height: int = 240
    n_frames: int = 60
    target_size: int = 40
    amplitude: float = 15.0
    noise: float = 10.0
    seed: int = 0
    cell: int = 5                     # texture block size in pixels
    background: int = 128


def synthetic_path(p: SyntheticParams) -> list[BBox]:
    """Figure-eight path of the target's top-left corner, one period over the sequence."""
    x0 = (p.width - p.target_size) // 2
    y0 = (p.height - p.target_size) // 2
    out = []
    for t in range(p.n_frames):
        phase = 2.0 * math.pi * t / p.n_frames
        dx = p.amplitude * math.sin(phase)
        dy = 0.5 * p.amplitude * math.sin(2.0 * phase)
        out.append(BBox(x0 + int(round(dx)), y0 + int(round(dy)), p.target_size, p.target_size))
    return out


def render_synthetic(p: SyntheticParams):
    """Frames (``uint8``) and exact ground truth for a textured square on noise."""
    rng = np.random.default_rng(p.seed)
    k = -(-p.target_size // p.cell)
    blocks = rng.integers(30, 226, size=(k, k)).astype(np.float64)
    texture = np.kron(blocks, np.ones((p.cell, p.cell)))[:p.target_size, :p.target_size]
    boxes = synthetic_path(p)
    frames = []
    for b in boxes:
        img = np.full((p.height, p.width), float(p.background))
        img[b.y:b.y + b.h, b.x:b.x + b.w] = texture
        img += rng.normal(0.0, p.noise, size=img.shape)
        frames.append(np.clip(np.round(img), 0, 255).astype(np.uint8))
    return frames, boxes


def generate_synthetic(out_dir, params: SyntheticParams = SyntheticParams()) -> SequenceSpec:
    """Write frames as ``img/0001.pgm ...`` plus ``groundtruth_rect.txt`` under ``out_dir``."""
    out = Path(out_dir)
    try:
        (out / "img").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SequenceError(f"cannot create {out}: {exc}") from exc
    frames, boxes = render_synthetic(params)
    spec = SequenceSpec(image_dir=out / "img", pattern="{:04d}.pgm",
                        groundtruth=out / GROUNDTRUTH_NAME, n_frames=params.n_frames)
    for i, f in enumerate(frames):
        write_pgm(spec.frame_path(i), f)
    write_groundtruth(spec.groundtruth, boxes)
    return spec
