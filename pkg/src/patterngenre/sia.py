"""Maximal translatable patterns (SIA) and the length/compactness/density filters.

The vector table holds q - p for every pair of points with p before q in
lexicographic order. Sorting the table by vector and reading off runs gives,
for every vector v, the maximal set of points that map into the piece under
translation by v.
"""

from __future__ import annotations

import gc
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .midi import NotePoint, TrackPointSet
from .patterns import DEFAULT_COMMON_TPQN, PatternInstance, TranslationVector, scale_onset

DEFAULT_MAX_POINTS = 8192


class TrackTooLarge(ValueError):
    """Point set exceeds the configured per-track cap."""


@dataclass(frozen=True)
class SiaConfig:
    min_length: int = 3
    compactness_min: float = 0.0
    density_min: float = 0.0
    common_tpqn: int = DEFAULT_COMMON_TPQN
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        if self.min_length < 1:
            raise ValueError("min_length must be positive")
        if not 0 <= self.compactness_min <= 1:
            raise ValueError("compactness_min must lie in [0, 1]")
        if self.density_min < 0:
            raise ValueError("density_min must be non-negative")
        if self.common_tpqn <= 0:
            raise ValueError("common_tpqn must be positive")


SIA_PRESETS = {
    "Sia-1": SiaConfig(compactness_min=0.7, density_min=0.05),
    "Sia-2": SiaConfig(compactness_min=0.4, density_min=0.05),
    "Sia-3": SiaConfig(compactness_min=0.4, density_min=0.25),
    "Sia-4": SiaConfig(compactness_min=0.7, density_min=0.25),
}


class MtpResult(NamedTuple):
    vector: TranslationVector
    origin_points: tuple[NotePoint, ...]


class _VectorTable(NamedTuple):
    coords: np.ndarray   # (n, 2) int64 points
    origins: np.ndarray  # origin point index per table entry, sorted by vector
    vectors: np.ndarray  # (k, 2) distinct vectors, ascending
    starts: np.ndarray   # (k + 1,) run boundaries into ``origins``


def _vector_table(points, max_points: int | None = DEFAULT_MAX_POINTS) -> _VectorTable:
    n = len(points)
    if max_points is not None and n > max_points:
        raise TrackTooLarge("track has %d points, cap is %d" % (n, max_points))
    coords = np.asarray(points, dtype=np.int64).reshape(n, 2)
    if n < 2:
        empty = np.empty(0, dtype=np.int64)
        return _VectorTable(coords, empty, np.empty((0, 2), dtype=np.int64), np.zeros(1, np.int64))
    idx_type = np.int32 if n < 2**31 else np.int64
    i, j = np.triu_indices(n, 1)
    i = i.astype(idx_type)
    j = j.astype(idx_type)
    dt = coords[j, 0] - coords[i, 0]
    dp = coords[j, 1] - coords[i, 1]
    prange = int(coords[:, 1].max() - coords[:, 1].min())
    base = 2 * prange + 1
    # order-preserving packing of (dt, dp); dt >= 0 and |dp| <= prange
    code = dt * base + (dp + prange)
    del dt, dp, j
    order = np.argsort(code, kind="stable")
    code = code[order]
    origins = i[order]
    del i, order
    starts = np.flatnonzero(np.diff(code)) + 1
    starts = np.concatenate(([0], starts, [len(code)]))
    first = code[starts[:-1]]
    vectors = np.stack((first // base, first % base - prange), axis=1)
    return _VectorTable(coords, origins, vectors, starts)


def _as_points(points) -> tuple:
    return points.points if isinstance(points, TrackPointSet) else tuple(points)


def sia_mtps(points, max_points: int | None = DEFAULT_MAX_POINTS) -> list[MtpResult]:
    """All maximal translatable patterns of a sorted, deduplicated point set.

    One result per distinct non-zero vector between points, vectors in
    ascending lexicographic order, origin points in point order.
    """
    pts = _as_points(points)
    table = _vector_table(pts, max_points)
    origins = table.origins.tolist()
    starts = table.starts.tolist()
    get = pts.__getitem__
    # millions of small tuples: cyclic GC passes would make this superlinear
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        return [MtpResult(TranslationVector(dt, dp),
                          tuple(map(get, origins[starts[k]:starts[k + 1]])))
                for k, (dt, dp) in enumerate(table.vectors.tolist())]
    finally:
        if gc_was_enabled:
            gc.enable()


def compactness(pattern, piece) -> Fraction:
    """Pattern time span over piece time span."""
    pattern = sorted(pattern)
    if not pattern:
        raise ValueError("empty pattern")
    piece_pts = _as_points(piece)
    if not set(pattern) <= set(piece_pts):
        raise ValueError("pattern is not a subset of the piece")
    piece_onsets = [p[0] for p in piece_pts]
    piece_span = max(piece_onsets) - min(piece_onsets)
    if piece_span == 0:
        return Fraction(1)
    return Fraction(pattern[-1][0] - pattern[0][0], piece_span)


def temporal_density(pattern, common_tpqn: int = DEFAULT_COMMON_TPQN,
                     native_tpqn: int | None = None) -> Fraction:
    """Notes per tick of pattern span, measured in ``common_tpqn`` ticks.

    With ``native_tpqn`` given, onsets are first floor-scaled from the native
    resolution; otherwise they are taken to be in common ticks already.
    A zero span counts as one tick.
    """
    pattern = sorted(pattern)
    if not pattern:
        raise ValueError("empty pattern")
    span = pattern[-1][0] - pattern[0][0]
    if native_tpqn is not None:
        span = scale_onset(span, native_tpqn, common_tpqn)
    return Fraction(len(pattern), max(span, 1))


def _ratio(x) -> Fraction:
    # thresholds are compared exactly in integer arithmetic; cap the denominator
    # so the products stay within int64
    return Fraction(str(x)).limit_denominator(10**6)


def sia_extract(track: TrackPointSet, cfg: SiaConfig) -> list[PatternInstance]:
    """Filtered MTPs of one track as pattern instances.

    Keeps MTPs with at least ``min_length`` notes whose compactness and
    temporal density both reach their thresholds.
    """
    table = _vector_table(track.points, cfg.max_points)
    if len(table.vectors) == 0:
        return []
    starts = table.starts
    sizes = np.diff(starts)
    onsets = table.coords[:, 0]
    piece_span = int(onsets.max() - onsets.min())
    first = onsets[table.origins[starts[:-1]]]
    last = onsets[table.origins[starts[1:] - 1]]
    span = last - first
    span_common = np.maximum((span * cfg.common_tpqn) // track.tpqn, 1)

    keep = sizes >= cfg.min_length
    c = _ratio(cfg.compactness_min)
    if piece_span > 0:
        keep &= span * c.denominator >= c.numerator * piece_span
    # single-onset piece: compactness is 1 and passes any threshold in [0, 1]
    d = _ratio(cfg.density_min)
    keep &= sizes * d.denominator >= d.numerator * span_common

    pts = track.points
    origins = table.origins
    out = []
    for k in np.flatnonzero(keep).tolist():
        dt, dp = table.vectors[k].tolist()
        members = tuple(pts[o] for o in origins[starts[k]:starts[k + 1]].tolist())
        out.append(PatternInstance(track.piece_id, track.track_index, members,
                                   track.tpqn, TranslationVector(dt, dp)))
    return out
