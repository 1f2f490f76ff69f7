"""Event features: pen stops, stroke intersections, Shannon entropy,
velocity-profile changes, interruptions and tempo.

Intersection counting is an exact all-pairs orientation test, vectorized
with numpy (cohort-scale strokes are small enough that no sweep is needed);
only proper crossings count, with collinear overlap counted once and
tangency excluded.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateRecording
from ..ink import (InkRecording, Stroke, on_surface_strokes, segment_strokes)

DEFAULT_STOP_DURATION = 0.030  # seconds
DEFAULT_STOP_RADIUS = 2.0      # tablet units


def count_pen_stops(rec: InkRecording,
                    min_duration: float = DEFAULT_STOP_DURATION,
                    radius: float = DEFAULT_STOP_RADIUS) -> int:
    """Count on-surface holds of at least ``min_duration``.

    A stop is a maximal run of on-surface samples all within ``radius`` of
    the run's first sample; non-overlapping runs are taken greedily left to
    right within each on-surface stroke.
    """
    total = 0
    for stroke in on_surface_strokes(segment_strokes(rec)):
        x, y, t = stroke.x, stroke.y, stroke.t
        n = stroke.n
        i = 0
        while i < n:
            d = np.hypot(x[i:] - x[i], y[i:] - y[i])
            out = np.flatnonzero(d > radius)
            j = (out[0] - 1 + i) if out.size else (n - 1)
            if t[j] - t[i] >= min_duration:
                total += 1
                i = j + 1
            else:
                i += 1
    return total


def _segments(stroke: Stroke):
    """Non-degenerate segments of a stroke as (m, 4) rows x1 y1 x2 y2."""
    p = np.column_stack((stroke.x[:-1], stroke.y[:-1],
                         stroke.x[1:], stroke.y[1:]))
    keep = (p[:, 0] != p[:, 2]) | (p[:, 1] != p[:, 3])
    idx = np.flatnonzero(keep)
    return p[keep], idx


def _bbox_filter(A, B, ii, jj):
    """Keep only pairs whose segment bounding boxes overlap."""
    ax_lo = np.minimum(A[:, 0], A[:, 2])
    ax_hi = np.maximum(A[:, 0], A[:, 2])
    ay_lo = np.minimum(A[:, 1], A[:, 3])
    ay_hi = np.maximum(A[:, 1], A[:, 3])
    bx_lo = np.minimum(B[:, 0], B[:, 2])
    bx_hi = np.maximum(B[:, 0], B[:, 2])
    by_lo = np.minimum(B[:, 1], B[:, 3])
    by_hi = np.maximum(B[:, 1], B[:, 3])
    keep = ((ax_lo[ii] <= bx_hi[jj]) & (bx_lo[jj] <= ax_hi[ii])
            & (ay_lo[ii] <= by_hi[jj]) & (by_lo[jj] <= ay_hi[ii]))
    return ii[keep], jj[keep]


def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _pair_crossings(A, B) -> np.ndarray:
    """Boolean crossing mask for paired segment rows A, B (each (m, 4))."""
    d1 = _cross(B[:, 0], B[:, 1], B[:, 2], B[:, 3], A[:, 0], A[:, 1])
    d2 = _cross(B[:, 0], B[:, 1], B[:, 2], B[:, 3], A[:, 2], A[:, 3])
    d3 = _cross(A[:, 0], A[:, 1], A[:, 2], A[:, 3], B[:, 0], B[:, 1])
    d4 = _cross(A[:, 0], A[:, 1], A[:, 2], A[:, 3], B[:, 2], B[:, 3])
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    collinear = (d1 == 0) & (d2 == 0) & (d3 == 0) & (d4 == 0)
    if np.any(collinear):
        # positive-length 1D overlap along the dominant axis
        use_x = (np.abs(A[:, 2] - A[:, 0]) >= np.abs(A[:, 3] - A[:, 1]))
        a_lo = np.where(use_x, np.minimum(A[:, 0], A[:, 2]),
                        np.minimum(A[:, 1], A[:, 3]))
        a_hi = np.where(use_x, np.maximum(A[:, 0], A[:, 2]),
                        np.maximum(A[:, 1], A[:, 3]))
        b_lo = np.where(use_x, np.minimum(B[:, 0], B[:, 2]),
                        np.minimum(B[:, 1], B[:, 3]))
        b_hi = np.where(use_x, np.maximum(B[:, 0], B[:, 2]),
                        np.maximum(B[:, 1], B[:, 3]))
        overlap = np.minimum(a_hi, b_hi) - np.maximum(a_lo, b_lo)
        proper = proper | (collinear & (overlap > 0))
    return proper


def count_intersections(strokes, mode: str) -> tuple:
    """Proper-crossing count and its value relative to the stroke count.

    ``mode`` is ``"intra"`` (non-adjacent segment pairs within one stroke)
    or ``"inter"`` (segment pairs across different strokes). Only on-surface
    strokes should be passed in.
    """
    if mode not in ("intra", "inter"):
        raise ValueError(f"unknown mode {mode!r}")
    strokes = list(strokes)
    segs = [_segments(s) for s in strokes]
    count = 0
    if mode == "intra":
        for seg, orig_idx in segs:
            m = len(seg)
            if m < 2:
                continue
            ii, jj = np.triu_indices(m, k=1)
            # adjacency is defined on original segment positions
            keep = (orig_idx[jj] - orig_idx[ii]) >= 2
            ii, jj = _bbox_filter(seg, seg, ii[keep], jj[keep])
            if ii.size:
                count += int(np.count_nonzero(
                    _pair_crossings(seg[ii], seg[jj])))
    else:
        for a in range(len(segs)):
            sa = segs[a][0]
            if not len(sa):
                continue
            for b in range(a + 1, len(segs)):
                sb = segs[b][0]
                if not len(sb):
                    continue
                ii, jj = np.meshgrid(np.arange(len(sa)), np.arange(len(sb)),
                                     indexing="ij")
                ii, jj = _bbox_filter(sa, sb, ii.ravel(), jj.ravel())
                if ii.size:
                    count += int(np.count_nonzero(
                        _pair_crossings(sa[ii], sb[jj])))
    n_strokes = len(strokes)
    rel = count / n_strokes if n_strokes else float("nan")
    return count, rel


def shannon_entropy(series, bins: int = 16) -> float:
    """Histogram entropy in bits over a uniform grid spanning [min, max]."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("empty series")
    lo, hi = float(series.min()), float(series.max())
    if lo == hi:
        return 0.0
    counts, _ = np.histogram(series, bins=bins, range=(lo, hi))
    p = counts[counts > 0] / series.size
    return float(-(p * np.log2(p)).sum())


def velocity_profile_changes(vel, duration: float):
    """Count of strict local extrema of a velocity sequence and the count
    normalized by the time span. Plateaus collapse to a single extremum.
    Too-short input comes back as missing."""
    vel = np.asarray(vel, dtype=float)
    if vel.size < 3:
        return float("nan"), float("nan")
    signs = np.sign(np.diff(vel))
    signs = signs[signs != 0]
    count = int(np.count_nonzero(np.diff(signs) != 0)) if signs.size >= 2 else 0
    rel = count / duration if duration > 0 else float("nan")
    return count, rel


def stroke_summary(rec: InkRecording) -> dict:
    """Interruptions (pen elevations) and tempo (strokes per second)."""
    if len(rec) < 2 or rec.duration <= 0:
        raise DegenerateRecording("need a positive time span")
    pen = rec.pen_status
    interruptions = int(np.count_nonzero((pen[:-1] == 1) & (pen[1:] == 0)))
    n_on = len(on_surface_strokes(segment_strokes(rec)))
    return {"interruptions": interruptions, "tempo": n_on / rec.duration}
