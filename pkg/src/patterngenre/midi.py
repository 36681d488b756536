"""Standard MIDI File reader reducing each track to a set of (onset, pitch) points.

Only what the pattern algorithms need is kept: note-on onsets in absolute
ticks and their pitches. Durations, velocities, tempo and meta events are
dropped. Formats 0 and 1 with metrical (TPQN) division are supported.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import NamedTuple


class MidiError(ValueError):
    """Raised for malformed or unsupported MIDI data."""


class NotePoint(NamedTuple):
    onset: int
    pitch: int


@dataclass(frozen=True)
class MidiHeader:
    format: int
    track_count: int
    tpqn: int


@dataclass(frozen=True)
class TrackPointSet:
    piece_id: str
    track_index: int
    tpqn: int
    points: tuple[NotePoint, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.points)


def normalize_points(points) -> tuple[NotePoint, ...]:
    """Sort lexicographically and drop duplicate (onset, pitch) points."""
    return tuple(NotePoint(int(o), int(p)) for o, p in sorted(set(map(tuple, points))))


def read_vlq(data: bytes, cursor: int) -> tuple[int, int]:
    """Decode a variable-length quantity starting at ``cursor``.

    Returns the value and the cursor just past the last byte read.
    """
    value = 0
    for i in range(4):
        if cursor >= len(data):
            raise MidiError("end of data inside variable-length quantity")
        byte = data[cursor]
        cursor += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, cursor
    raise MidiError("variable-length quantity longer than 4 bytes")


# data bytes following each channel-voice status nibble
_CHANNEL_DATA_LEN = {0x8: 2, 0x9: 2, 0xA: 2, 0xB: 2, 0xC: 1, 0xD: 1, 0xE: 2}


def _parse_header(data: bytes) -> tuple[MidiHeader, int]:
    if len(data) < 14 or data[:4] != b"MThd":
        raise MidiError("missing MThd header chunk")
    (length,) = struct.unpack(">I", data[4:8])
    if length < 6 or 8 + length > len(data):
        raise MidiError("malformed header chunk length %d" % length)
    fmt, ntracks, division = struct.unpack(">HHH", data[8:14])
    if fmt not in (0, 1):
        raise MidiError("unsupported SMF format %d" % fmt)
    if division & 0x8000:
        raise MidiError("SMPTE time division is not supported")
    if division == 0:
        raise MidiError("ticks per quarter note must be positive")
    return MidiHeader(fmt, ntracks, division), 8 + length


def _track_onsets(chunk: bytes) -> list[NotePoint]:
    """Walk one MTrk body and collect note-on onsets."""
    points = []
    pos = 0
    tick = 0
    running = None
    end = len(chunk)
    while pos < end:
        delta, pos = read_vlq(chunk, pos)
        tick += delta
        if pos >= end:
            raise MidiError("truncated event")
        status = chunk[pos]
        if status == 0xFF:
            if pos + 1 >= end:
                raise MidiError("truncated meta event")
            meta_type = chunk[pos + 1]
            length, pos = read_vlq(chunk, pos + 2)
            pos += length
            if pos > end:
                raise MidiError("truncated meta event")
            if meta_type == 0x2F:
                break
            continue
        if status in (0xF0, 0xF7):
            length, pos = read_vlq(chunk, pos + 1)
            pos += length
            if pos > end:
                raise MidiError("truncated sysex event")
            running = None
            continue
        if status & 0x80:
            if status >= 0xF0:
                raise MidiError("unexpected system message 0x%02X in track" % status)
            running = status
            pos += 1
        elif running is None:
            raise MidiError("data byte 0x%02X without running status" % status)
        kind = running >> 4
        nbytes = _CHANNEL_DATA_LEN[kind]
        if pos + nbytes > end:
            raise MidiError("truncated channel event")
        if kind == 0x9 and chunk[pos + 1] > 0:
            points.append(NotePoint(tick, chunk[pos] & 0x7F))
        pos += nbytes
    return points


def parse_midi(data: bytes, piece_id: str) -> tuple[MidiHeader, list[TrackPointSet]]:
    """Parse SMF bytes into a header and one point set per non-empty track.

    Unknown chunk types are skipped. The returned header's ``track_count``
    is the number of MTrk chunks actually found.
    """
    header, pos = _parse_header(data)
    tracks = []
    track_index = 0
    while pos < len(data):
        if pos + 8 > len(data):
            raise MidiError("truncated chunk header at byte %d" % pos)
        tag = data[pos:pos + 4]
        (length,) = struct.unpack(">I", data[pos + 4:pos + 8])
        body_start = pos + 8
        pos = body_start + length
        if pos > len(data):
            raise MidiError("truncated %r chunk" % tag)
        if tag != b"MTrk":
            continue
        points = _track_onsets(data[body_start:pos])
        if points:
            tracks.append(TrackPointSet(piece_id, track_index, header.tpqn,
                                        normalize_points(points)))
        track_index += 1
    if track_index == 0:
        raise MidiError("no track chunks found")
    return MidiHeader(header.format, track_index, header.tpqn), tracks


def read_midi_file(path, piece_id: str | None = None):
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_midi(data, piece_id if piece_id is not None else str(path))


# -- writing (synthetic corpora and test fixtures) ---------------------------

def encode_vlq(value: int) -> bytes:
    if value < 0 or value > 0x0FFFFFFF:
        raise ValueError("value out of VLQ range: %d" % value)
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def write_midi(tracks, tpqn: int = 480, duration: int | None = None) -> bytes:
    """Serialize note lists into a format-1 SMF.

    ``tracks`` is a list of sequences of (onset, pitch) or
    (onset, pitch, channel). Each note is closed after ``duration`` ticks
    (default one sixteenth) with a velocity-0 note-on.
    """
    if duration is None:
        duration = max(1, tpqn // 4)
    chunks = []
    for notes in tracks:
        events = []
        for note in notes:
            onset, pitch = int(note[0]), int(note[1])
            channel = int(note[2]) if len(note) > 2 else 0
            events.append((onset, 1, 0x90 | channel, pitch, 100))
            events.append((onset + duration, 0, 0x90 | channel, pitch, 0))
        events.sort()
        body = bytearray()
        last = 0
        for tick, _, status, pitch, velocity in events:
            body += encode_vlq(tick - last)
            body += bytes((status, pitch, velocity))
            last = tick
        body += b"\x00\xff\x2f\x00"
        chunks.append(b"MTrk" + struct.pack(">I", len(body)) + bytes(body))
    header = b"MThd" + struct.pack(">IHHH", 6, 1, len(chunks), tpqn)
    return header + b"".join(chunks)
