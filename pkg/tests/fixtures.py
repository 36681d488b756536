"""Hand-assembled Standard MIDI File byte fixtures."""

import struct


def chunk(tag: bytes, body: bytes) -> bytes:
    return tag + struct.pack(">I", len(body)) + body


def header(fmt: int, ntracks: int, division: int) -> bytes:
    return chunk(b"MThd", struct.pack(">HHH", fmt, ntracks, division))


# format 0, TPQN 480: note-on 60 at 0, note-off, note-on 63 at 480,
# velocity-0 note-off under running status after a 200-tick (0x81 0x48) delta
FORMAT0 = header(0, 1, 480) + chunk(b"MTrk", bytes([
    0x00, 0x90, 0x3C, 0x40,
    0x83, 0x60, 0x80, 0x3C, 0x40,
    0x00, 0x90, 0x3F, 0x40,
    0x81, 0x48, 0x3F, 0x00,
    0x00, 0xFF, 0x2F, 0x00,
]))
FORMAT0_POINTS = [(0, 60), (480, 63)]

# format 1, TPQN 96: a tempo-only conductor track, an unknown chunk, then a
# chord 64+60 at 0 written with running status, velocity-0 offs after a
# 0x7F delta, note 67 at 127 + 200 = 327, then a program change that
# replaces the running status
FORMAT1 = header(1, 2, 96) + chunk(b"MTrk", bytes([
    0x00, 0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20,
    0x00, 0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08,
    0x00, 0xFF, 0x2F, 0x00,
])) + chunk(b"XFIH", b"\x01\x02\x03") + chunk(b"MTrk", bytes([
    0x00, 0x91, 0x40, 0x64,
    0x00, 0x3C, 0x64,
    0x7F, 0x40, 0x00,
    0x00, 0x3C, 0x00,
    0x81, 0x48, 0x43, 0x50,
    0x00, 0xC1, 0x05,
    0x60, 0x81, 0x43, 0x00,
    0x00, 0xFF, 0x2F, 0x00,
]))
FORMAT1_POINTS = [(0, 60), (0, 64), (327, 67)]

SMPTE = header(0, 1, 0xE728) + chunk(b"MTrk", b"\x00\xff\x2f\x00")
