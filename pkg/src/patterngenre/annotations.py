"""Genre/style annotation files joined to MIDI files through a track-id mapping."""

from __future__ import annotations

import logging
import re
from collections import defaultdict

log = logging.getLogger(__name__)

SCHEMES = ("MAGD", "top-MAGD", "MASD")

# songs per genre in top-MAGD
TOP_MAGD_COUNTS = {
    "Pop/Rock": 21024,
    "Electronic": 3460,
    "Country": 2410,
    "R&B": 2040,
    "Jazz": 1179,
    "Latin": 1410,
    "International": 1008,
    "Rap": 701,
    "Vocal": 698,
    "New Age": 496,
    "Folk": 200,
    "Reggae": 141,
    "Blues": 100,
}
TOP_MAGD_TOTAL = 34867

# songs per style in MASD
MASD_COUNTS = {
    "Big Band": 362,
    "Blues Contemporary": 114,
    "Country Traditional": 2065,
    "Dance": 2017,
    "Electronica": 605,
    "Experimental": 733,
    "Folk International": 707,
    "Gospel": 405,
    "Grunge Emo": 302,
    "Hip Hop Rap": 801,
    "Jazz Classic": 496,
    "Metal Alternative": 978,
    "Metal Death": 214,
    "Metal Heavy": 282,
    "Pop Contemporary": 4291,
    "Pop Indie": 1147,
    "Pop Latin": 838,
    "Punk": 113,
    "Reggae": 127,
    "RnB Soul": 544,
    "Rock Alternative": 700,
    "Rock College": 977,
    "Rock Contemporary": 2890,
    "Rock Hard": 2096,
    "Rock Neo Psychedelia": 519,
}
MASD_TOTAL = 24623

# (files with annotation, total annotations) in the Lakh/MSD intersection
LAKH_ANNOTATION_TOTALS = {
    "MASD": (17785, 24623),
    "MAGD": (23496, 37237),
    "top-MAGD": (22535, 34867),
}


class AnnotationError(ValueError):
    pass


def normalize_label(label: str) -> str:
    """Spelling-insensitive label form: 'Pop/Rock', 'Pop_Rock' and 'pop rock' agree,
    as do 'R&B' and 'RnB'."""
    return re.sub(r"[^a-z0-9]", "", label.lower().replace("&", "n"))


_TOP_MAGD = {normalize_label(g) for g in TOP_MAGD_COUNTS}


def _read_pairs(path, what):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not all(f.strip() for f in fields):
                raise AnnotationError("%s:%d: malformed %s line %r" % (path, lineno, what, line))
            yield fields[0].strip(), fields[1].strip()


def load_annotations(path, scheme: str, mapping_path) -> dict[str, frozenset[str]]:
    """Map MIDI piece ids to their label sets.

    ``path`` holds ``label<TAB>track_id`` lines, ``mapping_path`` holds
    ``midi_file<TAB>track_id`` lines. Annotated tracks with no MIDI file are
    skipped and counted in a log message. Pieces without any label are absent.
    """
    if scheme not in SCHEMES:
        raise ValueError("unknown annotation scheme %r, expected one of %s" % (scheme, SCHEMES))
    by_track = defaultdict(set)
    for label, track in _read_pairs(path, "annotation"):
        if scheme == "top-MAGD" and normalize_label(label) not in _TOP_MAGD:
            continue
        by_track[track].add(label)
    files_by_track = defaultdict(list)
    for midi_file, track in _read_pairs(mapping_path, "mapping"):
        files_by_track[track].append(midi_file)
    out = defaultdict(set)
    unmapped = 0
    for track, labels in by_track.items():
        files = files_by_track.get(track)
        if not files:
            unmapped += 1
            continue
        for midi_file in files:
            out[midi_file] |= labels
    if unmapped:
        log.info("%d annotated track ids have no MIDI file in the mapping", unmapped)
    return {piece: frozenset(labels) for piece, labels in out.items() if labels}
