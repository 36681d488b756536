"""Synthetic MIDI corpora with planted genre motifs, for demos and tests."""

from __future__ import annotations

import os
import random

from .midi import write_midi

# (onset in quarter-note/480 units, pitch offset); distinct shapes per genre
PLANTED_MOTIFS = {
    "GenreA": ((0, 0), (240, 4), (480, 7), (720, 12), (960, 7)),
    "GenreB": ((0, 0), (120, -2), (360, -5), (480, -3), (840, -9)),
}


def planted_piece(motif, rng: random.Random, tpqn: int = 480, repeats: int = 3,
                  noise_notes: int = 24, bars: int = 16):
    """Notes of one piece: ``repeats`` transposed copies of ``motif`` plus noise."""
    scale = tpqn / 480
    bar = 4 * tpqn
    slots = rng.sample(range(bars // 2), repeats)
    notes = set()
    for slot in slots:
        start = slot * 2 * bar + rng.randrange(4) * (tpqn // 2)
        base = rng.randrange(48, 72)
        notes.update((start + int(t * scale), base + p) for t, p in motif)
    for _ in range(noise_notes):
        notes.add((rng.randrange(bars * bar), rng.randrange(36, 96)))
    return sorted(notes)


def make_planted_corpus(dest, n_files: int = 200, seed: int = 0,
                        motifs=PLANTED_MOTIFS, tpqns=(480, 960, 192, 96)):
    """Write ``n_files`` MIDI files plus ``annotations.tsv`` and ``mapping.tsv``.

    Files alternate between the genres of ``motifs``. Returns the paths of the
    corpus directory, the annotation file and the mapping file.
    """
    rng = random.Random(seed)
    corpus = os.path.join(dest, "corpus")
    os.makedirs(corpus, exist_ok=True)
    genres = sorted(motifs)
    ann_lines, map_lines = [], []
    for k in range(n_files):
        genre = genres[k % len(genres)]
        tpqn = tpqns[k % len(tpqns)]
        name = "piece%04d.mid" % k
        track_id = "TRSYN%013d" % k
        notes = planted_piece(motifs[genre], rng, tpqn)
        with open(os.path.join(corpus, name), "wb") as fh:
            fh.write(write_midi([notes], tpqn=tpqn))
        ann_lines.append("%s\t%s\n" % (genre, track_id))
        map_lines.append("%s\t%s\n" % (name, track_id))
    ann = os.path.join(dest, "annotations.tsv")
    mapping = os.path.join(dest, "mapping.tsv")
    with open(ann, "w", newline="\n") as fh:
        fh.writelines(ann_lines)
    with open(mapping, "w", newline="\n") as fh:
        fh.writelines(map_lines)
    return corpus, ann, mapping
