"""Target selection from scored detection candidates.

Candidates are ranked by their row-maximum score. The top share of that ranking
(the samples farthest from the decision boundary) vote with their scores rounded
to a fixed number of decimals; the most popular rounded value wins, which
rejects isolated high-scoring outliers.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .elm import POSITIVE
from .geometry import BBox


@dataclass(frozen=True)
class Candidate:
    box: BBox
    scores: tuple[float, ...]
    max_score: float
    predicted_label: int

    @classmethod
    def from_scores(cls, box: BBox, scores) -> "Candidate":
        scores = tuple(float(s) for s in scores)
        best = max(scores)
        return cls(box, scores, best, scores.index(best))


@dataclass(frozen=True)
class SelectorConfig:
    latter_fraction: float = 0.5
    round_decimals: int = 4
    positive_only: bool = True

    def __post_init__(self):
        if not 0.0 < self.latter_fraction <= 1.0:
            raise ValueError("latter_fraction must be in (0, 1]")
        if self.round_decimals < 1:
            raise ValueError("round_decimals must be >= 1")


@dataclass(frozen=True)
class Selection:
    chosen: Candidate
    votes: dict[Decimal, int]       # rounded score -> vote count, Latter-samples only
    n_pool: int
    n_latter: int


def max_scores(candidates) -> np.ndarray:
    return np.array([max(c.scores) for c in candidates], dtype=np.float64)


def sort_ascending(maxV) -> np.ndarray:
    return np.argsort(np.asarray(maxV, dtype=np.float64), kind="stable")


def round_score(x: float, decimals: int) -> Decimal:
    """Half-away-from-zero rounding of the shortest decimal form of ``x``."""
    return Decimal(repr(float(x))).quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_UP)


def _box_key(c: Candidate):
    return c.box.as_tuple()


def vote(candidates, cfg: SelectorConfig = SelectorConfig()) -> Selection:
    if not candidates:
        raise ValueError("no candidates to select from")
    pool = list(candidates)
    if cfg.positive_only:
        positives = [c for c in pool if c.predicted_label == POSITIVE]
        if positives:
            pool = positives
    # descending box order first, so equal scores rank lexicographically smaller boxes later
    pool.sort(key=_box_key, reverse=True)
    order = sort_ascending(max_scores(pool))
    n_keep = max(1, math.ceil(cfg.latter_fraction * len(pool)))
    latter = [pool[i] for i in order[len(pool) - n_keep:]]

    groups: dict[Decimal, list[Candidate]] = {}
    for c in latter:
        groups.setdefault(round_score(c.max_score, cfg.round_decimals), []).append(c)
    counts = Counter({k: len(v) for k, v in groups.items()})
    # most votes, then the larger rounded value
    winner = max(counts, key=lambda k: (counts[k], k))
    members = groups[winner]
    best = max(c.max_score for c in members)
    chosen = min((c for c in members if c.max_score == best), key=_box_key)
    return Selection(chosen, dict(counts), len(pool), n_keep)


def select_target(candidates, cfg: SelectorConfig = SelectorConfig()) -> Candidate:
    return vote(candidates, cfg).chosen
