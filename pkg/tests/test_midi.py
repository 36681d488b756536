import pytest
from hypothesis import given, settings, strategies as st

from patterngenre.midi import (MidiError, NotePoint, encode_vlq, parse_midi, read_vlq,
                               write_midi)

from fixtures import FORMAT0, FORMAT0_POINTS, FORMAT1, FORMAT1_POINTS, SMPTE, chunk, header


@pytest.mark.parametrize("data, value, end", [
    (b"\x00", 0, 1),
    (b"\x7f", 127, 1),
    (b"\x81\x48", 200, 2),
    (b"\x83\x60\x99", 480, 2),
    (b"\xff\xff\xff\x7f", 0x0FFFFFFF, 4),
])
def test_read_vlq(data, value, end):
    assert read_vlq(data, 0) == (value, end)


def test_read_vlq_from_cursor():
    assert read_vlq(b"\x00\x81\x48", 1) == (200, 3)


def test_read_vlq_too_long():
    with pytest.raises(MidiError):
        read_vlq(b"\x81\x80\x80\x80\x00", 0)


def test_read_vlq_truncated():
    with pytest.raises(MidiError):
        read_vlq(b"\x81", 0)


@given(st.integers(0, 0x0FFFFFFF))
def test_vlq_round_trip(value):
    data = encode_vlq(value)
    assert len(data) <= 4
    assert read_vlq(data, 0) == (value, len(data))


def test_format0_fixture():
    hdr, tracks = parse_midi(FORMAT0, "f0")
    assert (hdr.format, hdr.track_count, hdr.tpqn) == (0, 1, 480)
    assert len(tracks) == 1
    assert list(tracks[0].points) == FORMAT0_POINTS
    assert tracks[0].piece_id == "f0" and tracks[0].tpqn == 480


def test_format1_fixture_skips_meta_track_and_unknown_chunk():
    hdr, tracks = parse_midi(FORMAT1, "f1")
    assert (hdr.format, hdr.track_count, hdr.tpqn) == (1, 2, 96)
    assert [t.track_index for t in tracks] == [1]
    assert list(tracks[0].points) == FORMAT1_POINTS


def test_chord_sorted_by_pitch():
    data = write_midi([[(0, 64), (0, 60)]], tpqn=480)
    _, tracks = parse_midi(data, "x")
    assert list(tracks[0].points) == [(0, 60), (0, 64)]


def test_duplicate_points_removed():
    body = bytes([0x00, 0x90, 60, 1, 0x00, 0x91, 60, 1, 0x00, 0xFF, 0x2F, 0x00])
    _, tracks = parse_midi(header(0, 1, 480) + chunk(b"MTrk", body), "x")
    assert list(tracks[0].points) == [(0, 60)]


def test_percussion_channel_included():
    data = write_midi([[(0, 36, 9), (240, 38, 9)]], tpqn=480)
    _, tracks = parse_midi(data, "x")
    assert list(tracks[0].points) == [(0, 36), (240, 38)]


def test_smpte_rejected():
    with pytest.raises(MidiError, match="SMPTE"):
        parse_midi(SMPTE, "x")


@pytest.mark.parametrize("data", [
    b"",
    b"RIFF" + b"\x00" * 20,
    b"MThd\x00\x00\x00\x06\x00\x00",
    header(2, 1, 480) + chunk(b"MTrk", b"\x00\xff\x2f\x00"),
    header(0, 1, 480) + b"MTrk\x00\x00\x00\x10\x00\x90",
    header(0, 1, 480) + chunk(b"MTrk", b"\x00\x90\x3c"),
    header(0, 1, 480) + chunk(b"MTrk", b"\x00\x3c\x40"),
    header(0, 1, 480) + chunk(b"MTrk", b"\x81\x80\x80\x80\x00\x90\x3c\x40"),
    header(0, 1, 480),
])
def test_malformed_inputs(data):
    with pytest.raises(MidiError):
        parse_midi(data, "bad")


def test_parse_is_deterministic():
    assert parse_midi(FORMAT1, "a") == parse_midi(FORMAT1, "a")


note_lists = st.lists(st.tuples(st.integers(0, 20000), st.integers(0, 127)), max_size=60)


@settings(max_examples=200)
@given(st.lists(note_lists, min_size=1, max_size=4), st.sampled_from([96, 120, 480, 960]))
def test_round_trip_through_smf_bytes(tracks, tpqn):
    data = write_midi(tracks, tpqn=tpqn)
    hdr, parsed = parse_midi(data, "rt")
    assert hdr.track_count == len(tracks)
    expected = {i: sorted(set(notes)) for i, notes in enumerate(tracks) if notes}
    assert {t.track_index: list(t.points) for t in parsed} == expected
    for t in parsed:
        assert all(isinstance(p, NotePoint) for p in t.points)
