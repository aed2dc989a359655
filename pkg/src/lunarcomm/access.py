"""Visibility predicates, access-interval extraction and interval algebra."""
from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .kernels import elevation_deg, segment_clear
from .timebase import TimeGrid

DEFAULT_STEP_S = 10.0
DEFAULT_REFINE_TOL_S = 1e-3

# Relative slack when deciding that an endpoint lies inside an occluder.
# Surface sites sit exactly on their body's sphere.
_INSIDE_RTOL = 1e-9


@dataclass(frozen=True)
class AccessInterval:
    start: float
    stop: float
    pair: str = ""

    @property
    def duration(self) -> float:
        return self.stop - self.start


@dataclass(frozen=True)
class AccessStats:
    """Count and duration summary of a set of intervals; min/max are None when empty."""

    count: int
    min: float | None
    mean: float | None
    max: float | None
    sum: float


# --------------------------------------------------------------------------
# Geometry
# --------------------------------------------------------------------------


def line_of_sight(p1, p2, occluders: Iterable[tuple[Sequence[float], float]]) -> bool:
    """Whether the segment ``p1-p2`` clears every ``(center, radius)`` sphere."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if np.array_equal(p1, p2):
        raise ValueError("line_of_sight endpoints coincide")
    for center, radius in occluders:
        center = np.asarray(center, dtype=float)
        for p in (p1, p2):
            if np.linalg.norm(p - center) < radius * (1.0 - _INSIDE_RTOL):
                raise ValueError(f"endpoint {p.tolist()} lies inside occluder at {center.tolist()}")
        if not segment_clear(p1, p2, center, radius)[0]:
            return False
    return True


def elevation(site_position, body_center, target) -> float | np.ndarray:
    """Elevation angle (deg) of ``target`` above the local horizon at ``site_position``.

    Inputs may be single 3-vectors (returns a float) or ``(N, 3)`` arrays.
    """
    out = elevation_deg(site_position, body_center, target)
    if np.ndim(site_position) == 1 and np.ndim(target) == 1 and np.ndim(body_center) == 1:
        return float(out[0])
    return out


# --------------------------------------------------------------------------
# Interval extraction
# --------------------------------------------------------------------------


def _evaluate(predicate, t) -> np.ndarray:
    return np.asarray(predicate(np.atleast_1d(np.asarray(t, dtype=float))), dtype=bool)


def _refine(predicate, lo: float, hi: float, lo_value: bool, tol: float) -> float:
    """Bisect the state change inside ``[lo, hi]``; returns the bracket midpoint."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _evaluate(predicate, mid)[0] == lo_value:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def access_intervals(
    visibility: Callable[[np.ndarray], np.ndarray],
    grid: TimeGrid,
    refine_tol: float = DEFAULT_REFINE_TOL_S,
    pair: str = "",
) -> list[AccessInterval]:
    """Windows where ``visibility`` holds over ``[0, grid.duration]``.

    ``visibility`` maps an array of offsets (s) from ``grid.start`` to a
    boolean array. The grid is scanned, every state change between adjacent
    samples is bisected down to ``refine_tol``, and windows are clipped to the
    scenario span. Changes that begin and end between two samples are missed.
    """
    if not 0 < refine_tol <= grid.step:
        raise ValueError(f"refine_tol must be in (0, step={grid.step}], got {refine_tol}")
    t = grid.times()
    if t[-1] < grid.duration:
        t = np.append(t, grid.duration)
    vis = _evaluate(visibility, t)

    out: list[AccessInterval] = []
    changes = np.flatnonzero(vis[1:] != vis[:-1])
    start = 0.0 if vis[0] else None
    for k in changes:
        edge = _refine(visibility, float(t[k]), float(t[k + 1]), bool(vis[k]), refine_tol)
        if vis[k]:
            out.append(AccessInterval(start, edge, pair))
            start = None
        else:
            start = edge
    if start is not None:
        out.append(AccessInterval(start, float(grid.duration), pair))
    return _merge(out, pair)


def _merge(intervals: Iterable[AccessInterval], pair: str) -> list[AccessInterval]:
    merged: list[list[float]] = []
    for iv in sorted(intervals, key=lambda x: (x.start, x.stop)):
        if iv.stop <= iv.start:
            continue
        if merged and iv.start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], iv.stop)
        else:
            merged.append([iv.start, iv.stop])
    return [AccessInterval(a, b, pair) for a, b in merged]


def _check_disjoint(intervals: Sequence[AccessInterval]) -> None:
    for a, b in zip(intervals, intervals[1:]):
        if b.start < a.stop:
            raise ValueError(f"intervals overlap or are unsorted: [{a.start}, {a.stop}] and [{b.start}, {b.stop}]")


# --------------------------------------------------------------------------
# Statistics and interval algebra
# --------------------------------------------------------------------------


def access_stats(intervals: Sequence[AccessInterval]) -> AccessStats:
    intervals = list(intervals)
    _check_disjoint(intervals)
    if not intervals:
        return AccessStats(0, None, None, None, 0.0)
    d = np.array([iv.duration for iv in intervals])
    total = float(d.sum())
    return AccessStats(len(d), float(d.min()), total / len(d), float(d.max()), total)


def union_access(per_satellite: Iterable[Sequence[AccessInterval]], pair: str = "") -> list[AccessInterval]:
    """Any-member visibility: the set union of several interval lists."""
    return _merge((iv for ivs in per_satellite for iv in ivs), pair)


def intersect_chain(hops: Sequence[Sequence[AccessInterval]], pair: str = "") -> list[AccessInterval]:
    """Instants at which every hop is simultaneously accessible."""
    if not hops:
        return []
    current = [(iv.start, iv.stop) for iv in hops[0]]
    for hop in hops[1:]:
        nxt = []
        i = j = 0
        other = [(iv.start, iv.stop) for iv in hop]
        while i < len(current) and j < len(other):
            lo = max(current[i][0], other[j][0])
            hi = min(current[i][1], other[j][1])
            if lo < hi:
                nxt.append((lo, hi))
            if current[i][1] < other[j][1]:
                i += 1
            else:
                j += 1
        current = nxt
    return [AccessInterval(a, b, pair) for a, b in current]


def total_duration(intervals: Iterable[AccessInterval]) -> float:
    return float(sum(iv.duration for iv in intervals))


def membership(intervals: Sequence[AccessInterval], t) -> np.ndarray:
    """Boolean mask of which offsets in ``t`` fall inside any interval (closed)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=bool)
    for iv in intervals:
        out |= (t >= iv.start) & (t <= iv.stop)
    return out
