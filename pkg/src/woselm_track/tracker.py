"""Tracking-by-detection loop: detect, select, resample, update."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import elm, woselm
from .elm import NEGATIVE, POSITIVE, HiddenLayer
from .features import SparseProjection, extract_features_batch, generate_projection, integral_image
from .geometry import BBox, RingSpec, disc_offsets, sample_ring_origins
from .selector import Candidate, SelectorConfig, vote


class TrackingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrackerConfig:
    pos_ring: RingSpec = RingSpec(0.0, 2.0, 10, 10, 1)
    neg_ring: RingSpec = RingSpec(8.0, 30.0, 70, 70, 1)
    search_radius: int = 20
    feature_dim: int = 50
    n_hidden: int = 300
    C: float = 1.0
    projection_seed: int = 0
    hidden_seed: int = 1
    activation: str = "sigmoid"
    standardize: bool = True
    selector: SelectorConfig = SelectorConfig()
    regularizer_mode: str = "accumulate"
    rho_mode: str = "paper"
    rho_value: float = 1.0

    def __post_init__(self):
        if self.pos_ring.r_hi >= self.neg_ring.r_lo:
            raise ValueError("positive and negative rings overlap (need r2 < r3)")
        if self.search_radius < 1:
            raise ValueError("search_radius must be >= 1")


@dataclass
class TrackerState:
    config: TrackerConfig
    projection: SparseProjection
    hidden: HiddenLayer
    model: woselm.WoselmState
    current_box: BBox
    frame_index: int
    frame_shape: tuple[int, int]


@dataclass
class TrackRecord:
    frame: int
    box: BBox
    max_score: float = float("nan")
    rho: float = float("nan")
    ms: float = 0.0
    n_candidates: int = 0
    diagnostics: dict = field(default_factory=dict, repr=False)


def _samples(ii, box: BBox, cfg: TrackerConfig, proj, frame_w, frame_h):
    """Features and labels of the positive ring plus the box itself, then the negative ring."""
    pos = sample_ring_origins(box, cfg.pos_ring, frame_w, frame_h)
    pos = np.vstack([pos, [[box.x, box.y]]])
    neg = sample_ring_origins(box, cfg.neg_ring, frame_w, frame_h)
    X = extract_features_batch(ii, np.vstack([pos, neg]), proj)
    labels = np.concatenate([np.full(len(pos), POSITIVE), np.full(len(neg), NEGATIVE)])
    return X, labels


def init(frame0: np.ndarray, box0: BBox, cfg: TrackerConfig = TrackerConfig()) -> TrackerState:
    frame0 = np.asarray(frame0)
    fh, fw = frame0.shape
    if not box0.inside(fw, fh):
        raise TrackingError(f"initial box {box0.as_tuple()} is not inside the {fw}x{fh} frame")
    if len(sample_ring_origins(box0, cfg.neg_ring, fw, fh)) == 0:
        raise TrackingError("negative ring produced no samples; frame too small for the box")
    proj = generate_projection(cfg.projection_seed, cfg.feature_dim, box0.w, box0.h)
    hidden = elm.init_hidden(cfg.hidden_seed, cfg.feature_dim, cfg.n_hidden, cfg.activation)
    ii = integral_image(frame0)
    X, labels = _samples(ii, box0, cfg, proj, fw, fh)
    if cfg.standardize:
        # frozen after the first frame, like the projection
        scale = X.std(axis=0)
        hidden = elm.standardize_inputs(hidden, X.mean(axis=0), np.where(scale > 0, scale, 1.0))
    model = woselm.woselm_init(elm.hidden_map(hidden, X), elm.encode_labels(labels), labels,
                               cfg.C, cfg.regularizer_mode, cfg.rho_mode, cfg.rho_value)
    return TrackerState(cfg, proj, hidden, model, box0, 0, (fh, fw))


def candidate_origins(box: BBox, radius: int, frame_w: int, frame_h: int) -> np.ndarray:
    off = disc_offsets(radius)
    xs, ys = box.x + off[:, 0], box.y + off[:, 1]
    ok = (xs >= 0) & (ys >= 0) & (xs + box.w <= frame_w) & (ys + box.h <= frame_h)
    return np.stack([xs[ok], ys[ok]], axis=1)


def step(state: TrackerState, frame: np.ndarray):
    """Track one frame. Returns ``(new_state, box, diagnostics)``."""
    t0 = time.perf_counter()
    frame = np.asarray(frame)
    if frame.shape != state.frame_shape:
        raise TrackingError(f"frame shape {frame.shape} differs from initial {state.frame_shape}")
    cfg, box = state.config, state.current_box
    fh, fw = frame.shape
    ii = integral_image(frame)

    origins = candidate_origins(box, cfg.search_radius, fw, fh)
    diag = {"n_candidates": int(len(origins)), "held": False}
    if len(origins) == 0:
        diag.update(held=True, max_score=float("nan"), votes={})
        new_box = box
    else:
        X = extract_features_batch(ii, origins, state.projection)
        scores, labels = woselm.predict(state.model, state.hidden, X)
        keep = np.arange(len(origins))
        if cfg.selector.positive_only and np.any(labels == POSITIVE):
            # same pool the selector would build; skips objects it would discard
            keep = np.flatnonzero(labels == POSITIVE)
        cands = [Candidate.from_scores(BBox(int(origins[i, 0]), int(origins[i, 1]), box.w, box.h),
                                       scores[i]) for i in keep]
        sel = vote(cands, cfg.selector)
        new_box = sel.chosen.box
        diag.update(max_score=sel.chosen.max_score, votes=sel.votes,
                    n_pool=sel.n_pool, n_latter=sel.n_latter)

    X, labels = _samples(ii, new_box, cfg, state.projection, fw, fh)
    model = woselm.woselm_update(state.model, elm.hidden_map(state.hidden, X),
                                 elm.encode_labels(labels), labels)
    n_pos = int(np.count_nonzero(labels == POSITIVE))
    diag.update(rho=model.last_rho, rho_raw=model.last_rho_raw,
                n_pos=n_pos, n_neg=int(labels.size - n_pos))
    diag["ms"] = (time.perf_counter() - t0) * 1e3
    new_state = replace(state, model=model, current_box=new_box,
                        frame_index=state.frame_index + 1)
    return new_state, new_box, diag


def track_sequence(frames, box0: BBox, cfg: TrackerConfig = TrackerConfig()) -> list[TrackRecord]:
    frames = iter(frames)
    try:
        first = next(frames)
    except StopIteration:
        raise TrackingError("empty sequence") from None
    t0 = time.perf_counter()
    state = init(first, box0, cfg)
    records = [TrackRecord(0, box0, ms=(time.perf_counter() - t0) * 1e3,
                           n_candidates=0)]
    for i, frame in enumerate(frames, start=1):
        try:
            state, box, diag = step(state, frame)
        except Exception as exc:
            raise TrackingError(f"frame {i}: {exc}") from exc
        records.append(TrackRecord(i, box, max_score=diag["max_score"], rho=diag["rho"],
                                   ms=diag["ms"], n_candidates=diag["n_candidates"],
                                   diagnostics=diag))
    return records
