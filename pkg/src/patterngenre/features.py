"""Piece-by-pattern occurrence counts and the pattern export format."""

from __future__ import annotations

import hashlib
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .patterns import PatternKey, serialize_key

VOCABULARY_FILE = "vocabulary.txt"
OCCURRENCES_FILE = "occurrences.tsv"


def _key_str(key) -> str:
    return serialize_key(key) if isinstance(key, PatternKey) else str(key)


@dataclass(frozen=True)
class PatternVocabulary:
    keys: tuple[str, ...]

    def __post_init__(self):
        if list(self.keys) != sorted(set(self.keys)):
            raise ValueError("vocabulary keys must be distinct and sorted")
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(self.keys)})

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key) -> bool:
        return _key_str(key) in self._index

    def index(self, key) -> int:
        return self._index[_key_str(key)]

    def digest(self) -> str:
        h = hashlib.sha256()
        for k in self.keys:
            h.update(k.encode("utf-8") + b"\n")
        return h.hexdigest()


@dataclass(frozen=True)
class FeatureMatrix:
    """Sparse occurrence counts; rows are piece ids in sorted order."""

    rows: tuple[str, ...]
    counts: sp.csr_matrix

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def row_index(self, piece_id: str) -> int:
        return self.rows.index(piece_id)

    def cell(self, piece_id: str, column: int) -> int:
        return int(self.counts[self.row_index(piece_id), column])

    def cells(self):
        """Yield (piece_id, column, count) for every non-zero cell in row/column order."""
        coo = self.counts.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for r, c, v in zip(coo.row[order].tolist(), coo.col[order].tolist(),
                           coo.data[order].tolist()):
            yield self.rows[r], c, v

    def select(self, piece_ids: Iterable[str]) -> "FeatureMatrix":
        wanted = sorted(set(piece_ids))
        pos = {p: i for i, p in enumerate(self.rows)}
        idx = [pos[p] for p in wanted]
        return FeatureMatrix(tuple(wanted), self.counts[idx])


def aggregate(instances: Iterable[tuple[str, object]],
              pieces: Iterable[str] = ()) -> tuple[FeatureMatrix, PatternVocabulary]:
    """Count (piece_id, key) instances into a matrix.

    ``pieces`` adds rows for pieces that produced no patterns.
    """
    return aggregate_counts(Counter((piece, _key_str(key)) for piece, key in instances), pieces)


def aggregate_counts(counts: Mapping[tuple[str, str], int], pieces: Iterable[str] = (),
                     vocabulary: PatternVocabulary | None = None,
                     ) -> tuple[FeatureMatrix, PatternVocabulary]:
    """Build the matrix from already-merged (piece_id, key) -> count partials.

    With ``vocabulary`` given, columns follow it and every key must be in it.
    """
    vocab = vocabulary or PatternVocabulary(tuple(sorted({k for _, k in counts})))
    rows = tuple(sorted(set(pieces) | {p for p, _ in counts}))
    row_pos = {p: i for i, p in enumerate(rows)}
    entries = [(row_pos[p], vocab.index(k), c) for (p, k), c in counts.items() if c > 0]
    if entries:
        r, c, v = map(np.asarray, zip(*entries))
    else:
        r = c = v = np.empty(0, dtype=np.int64)
    matrix = sp.csr_matrix((v.astype(np.int64), (r, c)), shape=(len(rows), len(vocab)))
    matrix.sum_duplicates()
    matrix.sort_indices()
    return FeatureMatrix(rows, matrix), vocab


def export_patterns(matrix: FeatureMatrix, vocabulary: PatternVocabulary, path) -> tuple[str, str]:
    """Write ``vocabulary.txt`` (line = column) and ``occurrences.tsv`` under ``path``."""
    os.makedirs(path, exist_ok=True)
    vocab_path = os.path.join(path, VOCABULARY_FILE)
    occ_path = os.path.join(path, OCCURRENCES_FILE)
    with open(vocab_path, "w", encoding="utf-8", newline="\n") as fh:
        for key in vocabulary.keys:
            fh.write(key + "\n")
    with open(occ_path, "w", encoding="utf-8", newline="\n") as fh:
        for piece, col, count in sorted(matrix.cells()):
            fh.write("%s\t%d\t%d\n" % (piece, col, count))
    return vocab_path, occ_path


def read_patterns(path) -> tuple[FeatureMatrix, PatternVocabulary]:
    """Load an export written by :func:`export_patterns`."""
    with open(os.path.join(path, VOCABULARY_FILE), encoding="utf-8") as fh:
        vocab = PatternVocabulary(tuple(line.rstrip("\n") for line in fh))
    counts = {}
    with open(os.path.join(path, OCCURRENCES_FILE), encoding="utf-8") as fh:
        for line in fh:
            piece, col, count = line.rstrip("\n").split("\t")
            counts[(piece, vocab.keys[int(col)])] = int(count)
    return aggregate_counts(counts, vocabulary=vocab)
