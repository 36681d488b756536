import os
import random

import pytest
from hypothesis import given, strategies as st

from patterngenre.annotations import (TOP_MAGD_COUNTS, AnnotationError, load_annotations,
                                      normalize_label)
from patterngenre.features import (PatternVocabulary, aggregate, aggregate_counts,
                                   export_patterns, read_patterns)
from patterngenre.patterns import parse_key


def test_counts_per_piece():
    matrix, vocab = aggregate([("A", "(0|0)(6|3)"), ("A", "(0|0)(6|3)"), ("B", "(0|0)(6|3)")])
    col = vocab.index("(0|0)(6|3)")
    assert matrix.cell("A", col) == 2
    assert matrix.cell("B", col) == 1


def test_pattern_key_objects_accepted():
    key = parse_key("(0|0)(1|1)")
    matrix, vocab = aggregate([("A", key), ("A", "(0|0)(1|1)")])
    assert vocab.keys == ("(0|0)(1|1)",)
    assert matrix.cell("A", 0) == 2


def test_empty_stream():
    matrix, vocab = aggregate([])
    assert matrix.shape == (0, 0)
    assert len(vocab) == 0


def test_disjoint_keys_block_diagonal():
    matrix, vocab = aggregate([("A", "(0|0)(1|1)"), ("A", "(0|0)(2|1)"), ("B", "(0|0)(3|1)")])
    dense = matrix.counts.toarray()
    assert dense.tolist() == [[1, 1, 0], [0, 0, 1]]


def test_rows_and_vocabulary_sorted():
    matrix, vocab = aggregate([("b", "(0|0)(2|1)"), ("a", "(0|0)(10|1)"), ("c", "(0|0)(1|1)")],
                              pieces=["d"])
    assert matrix.rows == ("a", "b", "c", "d")
    assert list(vocab.keys) == sorted(vocab.keys)
    assert matrix.counts[3].nnz == 0


def test_vocabulary_rejects_unsorted():
    with pytest.raises(ValueError):
        PatternVocabulary(("(0|0)(2|1)", "(0|0)(1|1)"))


instance_streams = st.lists(st.tuples(st.sampled_from("abcde"),
                                      st.sampled_from(["(0|0)", "(0|0)(1|1)", "(0|0)(2|-1)",
                                                       "(0|0)(0|4)(6|3)"])), max_size=60)


@given(instance_streams, st.randoms())
def test_order_independent_and_conserving(stream, rnd):
    m1, v1 = aggregate(stream)
    shuffled = list(stream)
    rnd.shuffle(shuffled)
    m2, v2 = aggregate(shuffled)
    assert v1 == v2 and m1.rows == m2.rows
    assert (m1.counts != m2.counts).nnz == 0
    assert m1.counts.sum() == len(stream)
    assert len(v1) == len({k for _, k in stream})


def test_export_format(tmp_path):
    matrix, vocab = aggregate([("songX", "(0|0)(6|3)"), ("songX", "(0|0)(6|3)")])
    vocab_path, occ_path = export_patterns(matrix, vocab, tmp_path)
    assert open(vocab_path, "rb").read() == b"(0|0)(6|3)\n"
    assert open(occ_path, "rb").read() == b"songX\t0\t2\n"


def test_export_empty(tmp_path):
    matrix, vocab = aggregate([])
    for path in export_patterns(matrix, vocab, tmp_path):
        assert os.path.getsize(path) == 0


def test_export_deterministic_and_readable(tmp_path):
    rng = random.Random(1)
    stream = [("p%d" % rng.randrange(9), "(0|0)(%d|%d)" % (rng.randrange(1, 20), rng.randrange(-5, 5)))
              for _ in range(300)]
    m, v = aggregate(stream)
    a = export_patterns(m, v, tmp_path / "a")
    rng.shuffle(stream)
    m2, v2 = aggregate(stream)
    b = export_patterns(m2, v2, tmp_path / "b")
    for x, y in zip(a, b):
        assert open(x, "rb").read() == open(y, "rb").read()
    lines = open(a[1]).read().splitlines()
    rows = [(l.split("\t")[0], int(l.split("\t")[1])) for l in lines]
    assert rows == sorted(rows)
    m3, v3 = read_patterns(tmp_path / "a")
    assert v3 == v and (m3.counts != m.counts).nnz == 0


def _write(path, lines):
    path.write_text("".join(l + "\n" for l in lines))
    return path


def test_annotations_join(tmp_path):
    ann = _write(tmp_path / "a.tsv", ["Pop_Rock\tTRAAAAA", "Jazz\tTRBBBBB", "Jazz\tTRCCCCC"])
    mapping = _write(tmp_path / "m.tsv", ["x.mid\tTRAAAAA", "y.mid\tTRBBBBB"])
    got = load_annotations(ann, "MAGD", mapping)
    assert got == {"x.mid": {"Pop_Rock"}, "y.mid": {"Jazz"}}


def test_annotations_multi_label(tmp_path):
    ann = _write(tmp_path / "a.tsv", ["Pop_Rock\tTR1", "Electronic\tTR1"])
    mapping = _write(tmp_path / "m.tsv", ["x.mid\tTR1", "dir/z.mid\tTR1"])
    got = load_annotations(ann, "MAGD", mapping)
    assert got["x.mid"] == {"Pop_Rock", "Electronic"}
    assert got["dir/z.mid"] == {"Pop_Rock", "Electronic"}


def test_top_magd_restricts_to_thirteen_genres(tmp_path):
    ann = _write(tmp_path / "a.tsv", ["Pop_Rock\tTR1", "Comedy_Spoken\tTR1", "RnB\tTR2",
                                      "Stage\tTR3", "New Age\tTR4"])
    mapping = _write(tmp_path / "m.tsv", ["a.mid\tTR1", "b.mid\tTR2", "c.mid\tTR3", "d.mid\tTR4"])
    got = load_annotations(ann, "top-MAGD", mapping)
    assert got == {"a.mid": {"Pop_Rock"}, "b.mid": {"RnB"}, "d.mid": {"New Age"}}
    assert len(TOP_MAGD_COUNTS) == 13
    assert sum(TOP_MAGD_COUNTS.values()) == 34867
    assert "c.mid" not in load_annotations(ann, "top-MAGD", mapping)
    assert load_annotations(ann, "MAGD", mapping)["c.mid"] == {"Stage"}


def test_label_normalization():
    assert normalize_label("Pop/Rock") == normalize_label("Pop_Rock")
    assert normalize_label("R&B") == normalize_label("RnB")


def test_malformed_annotation_line_reports_line_number(tmp_path):
    ann = _write(tmp_path / "a.tsv", ["Jazz\tTR1", "no tab here"])
    mapping = _write(tmp_path / "m.tsv", ["x.mid\tTR1"])
    with pytest.raises(AnnotationError, match=":2:"):
        load_annotations(ann, "MAGD", mapping)


def test_unmapped_tracks_skipped_and_counted(tmp_path, caplog):
    ann = _write(tmp_path / "a.tsv", ["Jazz\tTR1", "Jazz\tTR2", "Rap\tTR3"])
    mapping = _write(tmp_path / "m.tsv", ["x.mid\tTR1"])
    with caplog.at_level("INFO"):
        assert load_annotations(ann, "MASD", mapping) == {"x.mid": {"Jazz"}}
    assert "2 annotated track ids" in caplog.text


def test_unknown_scheme(tmp_path):
    with pytest.raises(ValueError):
        load_annotations(tmp_path / "a", "GTZAN", tmp_path / "b")
