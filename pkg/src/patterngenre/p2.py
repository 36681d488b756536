"""P2 partial matching under translation, and window-based pattern extraction.

``p2_matches`` is the classic P2 scan: every query point contributes the
sorted list of translations onto text points, and an m-way heap merge of
those lists brings equal translations together so each run length is the
number of query points matched under that translation.
"""

from __future__ import annotations

import gc
import heapq
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import groupby
from typing import NamedTuple

import numpy as np

from .midi import TrackPointSet
from .patterns import DEFAULT_COMMON_TPQN, PatternInstance, TranslationVector


@dataclass(frozen=True)
class P2Config:
    window_length: int
    offset_allowance: int
    similarity_min: float
    common_tpqn: int = DEFAULT_COMMON_TPQN

    def __post_init__(self):
        if self.window_length < 3:
            raise ValueError("window_length must be at least 3")
        if self.offset_allowance < 0:
            raise ValueError("offset_allowance must be non-negative")
        if not 0 < self.similarity_min <= 1:
            raise ValueError("similarity_min must lie in (0, 1]")
        if self.common_tpqn <= 0:
            raise ValueError("common_tpqn must be positive")

    @property
    def min_matched(self) -> int:
        """Smallest matched-point count whose similarity reaches the threshold."""
        s = Fraction(str(self.similarity_min))
        return max(1, math.ceil(s * self.window_length))


P2_PRESETS = {
    "P2-3": P2Config(3, 2, 0.9),
    "P2-4": P2Config(4, 2, 0.9),
    "P2-5": P2Config(5, 3, 0.5),
    "P2-8": P2Config(8, 3, 0.5),
    "P2-10": P2Config(10, 3, 0.5),
    "P2-15": P2Config(15, 3, 0.5),
}


class P2Match(NamedTuple):
    translation: TranslationVector
    matched_count: int
    similarity: Fraction


def _points(points) -> tuple:
    return points.points if isinstance(points, TrackPointSet) else tuple(points)


def p2_matches(query, text) -> list[P2Match]:
    """Every translation placing at least one query point on a text point.

    Results are ordered by translation. Runs in O(mn log m) time.
    """
    query = _points(query)
    text = _points(text)
    if not query:
        raise ValueError("empty query")
    m = len(query)

    def shifted(q):
        qt, qp = q
        return ((t - qt, p - qp) for t, p in text)

    out = []
    for f, run in groupby(heapq.merge(*(shifted(q) for q in query))):
        count = sum(1 for _ in run)
        out.append(P2Match(TranslationVector(*f), count, Fraction(count, m)))
    return out


def intervening_count(match: P2Match, query, text) -> int:
    """Unmatched text points lying within the tick span of a matched occurrence."""
    query = _points(query)
    text = _points(text)
    dt, dp = match.translation
    textset = set(text)
    hits = [(t + dt, p + dp) for t, p in query if (t + dt, p + dp) in textset]
    if not hits:
        return 0
    onsets = [t for t, _ in text]
    lo = min(t for t, _ in hits)
    hi = max(t for t, _ in hits)
    return bisect_right(onsets, hi) - bisect_left(onsets, lo) - len(hits)


def segment_windows(points, window_length: int) -> list[tuple]:
    """Overlapping runs of ``window_length`` consecutive points, stride 1."""
    pts = _points(points)
    return [pts[i:i + window_length] for i in range(len(pts) - window_length + 1)]


def _qualifies(match: P2Match, cfg: P2Config, window, text) -> bool:
    return (match.matched_count >= cfg.min_matched
            and intervening_count(match, window, text) <= cfg.offset_allowance)


def _instances(track, window, translations):
    piece, index, tpqn = track.piece_id, track.track_index, track.tpqn
    out = [PatternInstance(piece, index, window, tpqn, TranslationVector(0, 0))]
    out.extend(PatternInstance(piece, index, window, tpqn, TranslationVector(dt, dp))
               for dt, dp in sorted(translations))
    return out


def p2_extract_reference(track: TrackPointSet, cfg: P2Config) -> list[PatternInstance]:
    """Direct route: full P2 scan of every window against its own track."""
    out = []
    for window in segment_windows(track, cfg.window_length):
        good = [mt.translation for mt in p2_matches(window, track)
                if mt.translation != (0, 0) and _qualifies(mt, cfg, window, track)]
        if good:
            out.extend(_instances(track, window, good))
    return out


def p2_extract(track: TrackPointSet, cfg: P2Config,
               max_rows: int = 4_000_000) -> list[PatternInstance]:
    """Repeating windows of a track with all their qualifying occurrences.

    A window qualifies when some non-identity translation matches at least
    ``similarity_min`` of its points with no more than ``offset_allowance``
    unmatched notes inside the occurrence span. The window's own position is
    then emitted as an occurrence alongside every qualifying translation.

    Output is identical to :func:`p2_extract_reference`, which scans every
    window against the whole track. Here candidates are pruned first: in a
    qualifying occurrence the first matched window point has at least
    ``c - 1`` matched partners within ``m - 1`` positions after it, and every
    image lies within ``m + offset - 1`` positions of its first image, so only
    short-range pairs with equal difference vectors have to be joined.
    ``max_rows`` bounds the size of each join block.
    """
    m = cfg.window_length
    c = cfg.min_matched
    n = len(track.points)
    if n < m:
        return []
    if c < 2:
        return p2_extract_reference(track, cfg)
    pts = np.asarray(track.points, dtype=np.int64)
    t, p = pts[:, 0], pts[:, 1]
    tspan = int(t.max() - t.min())
    prange = int(p.max() - p.min())
    base = 2 * prange + 1
    fbase = (2 * tspan + 1) * base
    if n * fbase >= 2**62:
        return p2_extract_reference(track, cfg)

    reach = m + cfg.offset_allowance - 1

    def short_pairs(max_gap):
        firsts, seconds = [], []
        for d in range(1, min(max_gap, n - 1) + 1):
            first = np.arange(n - d)
            firsts.append(first)
            seconds.append(first + d)
        return np.concatenate(firsts), np.concatenate(seconds)

    def vec_code(i, j):
        return (t[j] - t[i]) * base + (p[j] - p[i] + prange)

    b1, b2 = short_pairs(reach)
    u = vec_code(b1, b2)
    order = np.argsort(u, kind="stable")
    b1, u = b1[order], u[order]
    a1, a2 = short_pairs(m - 1)
    order = np.lexsort((a2, a1))
    a1, a2 = a1[order], a2[order]
    ua = vec_code(a1, a2)
    lo = np.searchsorted(u, ua, "left")
    width = np.searchsorted(u, ua, "right") - lo

    kept = []
    for block in _blocks(a1, width, max_rows):
        rows = _expand(lo[block], width[block])
        anchor = np.repeat(a1[block], width[block])
        image = b1[rows]
        nz = image != anchor
        anchor, image = anchor[nz], image[nz]
        fcode = (t[image] - t[anchor] + tspan) * base + (p[image] - p[anchor] + prange)
        codes, counts = np.unique(anchor * fbase + fcode, return_counts=True)
        codes = codes[counts >= c - 1]
        anchor, fcode = codes // fbase, codes % fbase
        cand = np.concatenate([(anchor - s) * fbase + fcode for s in range(m)])
        starts = cand // fbase
        cand = np.unique(cand[(starts >= 0) & (starts <= n - m)])
        kept.append(cand[_verify(cand // fbase, cand % fbase, t, p, tspan, prange, base, m, c,
                                 cfg.offset_allowance)])
    kept = np.unique(np.concatenate(kept)) if kept else kept
    if len(kept) == 0:
        return []

    starts = (kept // fbase).tolist()
    fcodes = kept % fbase
    translations = list(zip((fcodes // base - tspan).tolist(), (fcodes % base - prange).tolist()))
    bounds = [0] + (np.flatnonzero(np.diff(kept // fbase)) + 1).tolist() + [len(kept)]
    out = []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for lo, hi in zip(bounds, bounds[1:]):
            i = starts[lo]
            out.extend(_instances(track, track.points[i:i + m], translations[lo:hi]))
    finally:
        if gc_was_enabled:
            gc.enable()
    return out


def _blocks(a1, width, max_rows):
    """Split the a1-sorted pair list into slices of whole anchors, each with at most
    ``max_rows`` join rows unless a single anchor alone exceeds it."""
    boundaries = np.flatnonzero(np.diff(a1)) + 1
    group_starts = np.concatenate(([0], boundaries))
    group_rows = np.add.reduceat(width, group_starts) if len(width) else width
    total = 0
    begin = 0
    for g, rows in enumerate(group_rows.tolist()):
        if total and total + rows > max_rows:
            yield slice(begin, int(group_starts[g]))
            begin = int(group_starts[g])
            total = 0
        total += rows
    if begin < len(a1):
        yield slice(begin, len(a1))


def _expand(lo, width):
    """Concatenate ``range(lo[k], lo[k] + width[k])`` for all k."""
    total = int(width.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.cumsum(width) - width
    return np.repeat(lo - offsets, width) + np.arange(total)


def _verify(starts, fcodes, t, p, tspan, prange, base, m, c, offset):
    """Exact qualification test for candidate (window start, translation) pairs."""
    if len(starts) == 0:
        return np.zeros(0, dtype=bool)
    dt = fcodes // base - tspan
    dp = fcodes % base - prange
    tmin, pmin = t.min(), p.min()
    tmax, pmax = t.max(), p.max()
    width = prange + 1
    point_codes = (t - tmin) * width + (p - pmin)
    matched = np.zeros(len(starts), dtype=np.int64)
    first = np.full(len(starts), np.iinfo(np.int64).max)
    last = np.full(len(starts), np.iinfo(np.int64).min)
    for k in range(m):
        qt = t[starts + k] + dt
        qp = p[starts + k] + dp
        inside = (qt >= tmin) & (qt <= tmax) & (qp >= pmin) & (qp <= pmax)
        code = np.where(inside, (qt - tmin) * width + (qp - pmin), -1)
        pos = np.searchsorted(point_codes, code)
        hit = inside & (pos < len(point_codes))
        hit &= point_codes[np.minimum(pos, len(point_codes) - 1)] == code
        matched += hit
        first = np.where(hit, np.minimum(first, qt), first)
        last = np.where(hit, np.maximum(last, qt), last)
    ok = matched >= c
    in_span = np.searchsorted(t, last, "right") - np.searchsorted(t, first, "left")
    return ok & (in_span - matched <= offset)
