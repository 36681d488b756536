"""Translation vectors, resolution normalization and canonical pattern keys.

A pattern key is the transposition class of a note pattern written in a
common, coarse tick resolution, e.g. ``(0|0)(6|3)(8|10)(10|12)``. The first
cell is always the origin: onsets are made relative to the first note and
pitches to the first note's pitch.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple

from .midi import NotePoint

DEFAULT_COMMON_TPQN = 6


class TranslationVector(NamedTuple):
    dt: int
    dp: int


class PatternKeyError(ValueError):
    """Malformed or non-canonical pattern key."""


class PatternInstance(NamedTuple):
    """One occurrence of a pattern in a track.

    ``points`` are in the file's native resolution. ``vector`` is the
    translation relating this occurrence to where the pattern was found
    (the MTP vector for SIA, the match translation for P2).
    """

    piece_id: str
    track_index: int
    points: tuple[NotePoint, ...]
    native_tpqn: int
    vector: TranslationVector = TranslationVector(0, 0)

    def key(self, common_tpqn: int = DEFAULT_COMMON_TPQN) -> "PatternKey":
        return canonical_key(self, common_tpqn)


@dataclass(frozen=True, order=True)
class PatternKey:
    cells: tuple[tuple[int, int], ...]

    def __post_init__(self):
        _check_cells(self.cells)

    def __str__(self) -> str:
        return serialize_key(self)

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def span(self) -> int:
        return self.cells[-1][0]


def _check_cells(cells) -> None:
    if not cells:
        raise PatternKeyError("empty pattern key")
    if tuple(cells[0]) != (0, 0):
        raise PatternKeyError("first cell must be (0|0), got %r" % (cells[0],))
    for a, b in zip(cells, cells[1:]):
        if not tuple(a) < tuple(b):
            raise PatternKeyError("cells not strictly sorted: %r, %r" % (a, b))


def scale_onset(onset: int, native_tpqn: int, common_tpqn: int) -> int:
    # floor, not nearest: 545 ticks at 480 TPQN must land on 6 at TPQN 6
    return (onset * common_tpqn) // native_tpqn


def to_common_resolution(instance: PatternInstance,
                         common_tpqn: int = DEFAULT_COMMON_TPQN) -> list[tuple[int, int]]:
    """Map onsets to ``common_tpqn`` by floor scaling, merging coincident points."""
    if instance.native_tpqn <= 0:
        raise ValueError("native TPQN must be positive")
    scaled = {(scale_onset(p.onset, instance.native_tpqn, common_tpqn), p.pitch)
              for p in instance.points}
    return sorted(scaled)


def canonical_key(instance: PatternInstance,
                  common_tpqn: int = DEFAULT_COMMON_TPQN) -> PatternKey:
    """Transposition- and time-shift-invariant key of an instance.

    Onsets are made relative to the first note in native ticks before
    scaling, so shifting an instance in time never changes its key. Pitches
    are made relative to the first cell after coarsening: when several notes
    fall into the first common tick, the lowest of them is the pitch origin.
    """
    if not instance.points:
        raise ValueError("cannot build a key for an empty pattern")
    t0 = min(t for t, _ in instance.points)
    shifted = instance._replace(points=tuple(NotePoint(t - t0, p) for t, p in instance.points))
    cells = to_common_resolution(shifted, common_tpqn)
    p0 = cells[0][1]
    return PatternKey(tuple((t, p - p0) for t, p in cells))


def key_of_points(points, native_tpqn: int,
                  common_tpqn: int = DEFAULT_COMMON_TPQN) -> PatternKey:
    return canonical_key(PatternInstance("", 0, tuple(points), native_tpqn), common_tpqn)


def serialize_key(key: PatternKey) -> str:
    return "".join("(%d|%d)" % cell for cell in key.cells)


_CELL = re.compile(r"\((0|[1-9][0-9]*)\|(0|-?[1-9][0-9]*)\)")


def parse_key(text: str) -> PatternKey:
    """Inverse of :func:`serialize_key`; rejects anything it could not emit."""
    cells = []
    pos = 0
    while pos < len(text):
        m = _CELL.match(text, pos)
        if m is None:
            raise PatternKeyError("malformed pattern key at offset %d: %r" % (pos, text))
        cells.append((int(m.group(1)), int(m.group(2))))
        pos = m.end()
    return PatternKey(tuple(cells))


def translate(points, vector) -> tuple[NotePoint, ...]:
    dt, dp = vector
    return tuple(NotePoint(t + dt, p + dp) for t, p in points)
