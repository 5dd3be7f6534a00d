"""Reference point on a frontier and the distance of a run's score pair to it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import ScorePoint


class UnfitPairError(ValueError):
    pass


def _euclidean(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


METRICS = {"euclidean": _euclidean}


def _coords(frontier) -> np.ndarray:
    pts = getattr(frontier, "points", frontier)
    return np.array([p.as_tuple() if isinstance(p, ScorePoint) else tuple(p) for p in pts],
                    dtype=float).reshape(-1, 2)


def cumulative_lengths(frontier) -> np.ndarray:
    """cum[j] = path length from the first point to point j (cum[0] = 0)."""
    xy = _coords(frontier)
    seg = np.hypot(*np.diff(xy, axis=0).T) if len(xy) > 1 else np.zeros(0)
    return np.concatenate([[0.0], np.cumsum(seg)])


def len_pf(frontier) -> float:
    """Polyline length through the frontier points in descending-relevance order."""
    return float(cumulative_lengths(frontier)[-1])


@dataclass(frozen=True)
class ReferencePoint:
    point: ScorePoint
    alpha: float
    index: int  # 0-based position in the frontier


def reference_point(frontier, alpha: float = 0.5) -> ReferencePoint:
    """Frontier point whose path length from the max-relevance end is closest to alpha * lenPF.

    Ties go to the point nearer the max-relevance end.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if not getattr(frontier, "fit", True):
        pair = getattr(frontier, "pair", None)
        raise UnfitPairError(f"measure pair unfit for DPFR: {pair}")
    pts = list(getattr(frontier, "points", frontier))
    if not pts:
        raise ValueError("empty frontier")
    cum = cumulative_lengths(pts)
    gap = np.abs(cum - alpha * cum[-1])
    j = int(np.argmin(gap))  # first minimum = smallest index
    p = pts[j] if isinstance(pts[j], ScorePoint) else ScorePoint(*pts[j])
    return ReferencePoint(p, alpha, j)


@dataclass(frozen=True)
class DpfrScore:
    value: float
    pair: tuple | None = None
    tag: str | None = None


def dpfr(run_point, ref, metric: str = "euclidean", pair=None) -> DpfrScore:
    """Distance between a run's (rel, fair) scores and the reference point. Lower is better."""
    try:
        fn = METRICS[metric]
    except KeyError:
        raise ValueError(f"unknown distance metric {metric!r}; available: {sorted(METRICS)}")
    if not isinstance(run_point, ScorePoint):
        run_point = ScorePoint(*run_point)
    target = ref.point if isinstance(ref, ReferencePoint) else ScorePoint(*ref)
    return DpfrScore(fn(run_point.as_tuple(), target.as_tuple()), pair, run_point.tag)


def midpoint_error(full, est, alpha: float = 0.5) -> float:
    """Distance between the reference points of a full and an estimated frontier."""
    a = reference_point(full, alpha).point
    b = reference_point(est, alpha).point
    return _euclidean(a.as_tuple(), b.as_tuple())
