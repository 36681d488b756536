import numpy as np
import pytest
from hypothesis import given, strategies as st

from patterngenre.metrics import (FoldMetrics, auc_roc, balanced_accuracy_from_confusion,
                                  confusion, evaluate, f1_and_accuracy, f1_from_confusion,
                                  format_cell, read_results, results_row, summarize,
                                  write_results)

from oracles import auc_trapezoid


def test_auc_examples():
    assert auc_roc([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0
    assert auc_roc([0.3, 0.3, 0.3, 0.3], [1, 0, 1, 0]) == 0.5
    assert auc_roc([0.2, 0.9], [1, 0]) == 0.0


def test_auc_degenerate():
    with pytest.raises(ValueError):
        auc_roc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        auc_roc([0.1, 0.2], [0, 0])


def labelled_scores():
    return st.integers(2, 40).flatmap(lambda n: st.tuples(
        st.lists(st.integers(0, 1000).map(lambda k: k / 1000), min_size=n, max_size=n),
        st.lists(st.booleans(), min_size=n, max_size=n).filter(lambda y: any(y) and not all(y))))


@given(labelled_scores())
def test_auc_matches_trapezoid(data):
    scores, labels = data
    assert abs(auc_roc(scores, labels) - auc_trapezoid(scores, labels)) <= 1e-12


@given(labelled_scores())
def test_auc_invariant_under_monotone_map(data):
    scores, labels = data
    s = np.asarray(scores)
    assert auc_roc(np.exp(3 * s) - 7, labels) == pytest.approx(auc_roc(s, labels), abs=1e-12)


@given(st.integers(2, 30), st.randoms())
def test_auc_complement_without_ties(n, rnd):
    scores = rnd.sample(range(1000), n)
    labels = [True, False] + [rnd.random() < 0.5 for _ in range(n - 2)]
    flipped = [not y for y in labels]
    assert auc_roc(scores, labels) + auc_roc(scores, flipped) == pytest.approx(1.0, abs=1e-12)


def test_confusion_case():
    cm = confusion([1, 1, 0, 0], [1, 0, 1, 0])
    assert cm == (1, 1, 1, 1)
    assert f1_from_confusion(*cm) == 0.5
    assert balanced_accuracy_from_confusion(*cm) == 0.5
    assert f1_and_accuracy([0.9, 0.6, 0.2, 0.1], [1, 0, 1, 0]) == (0.5, 0.5)


def test_perfect_predictions():
    assert f1_and_accuracy([0.9, 0.8, 0.1], [1, 1, 0]) == (1.0, 1.0)


def test_all_negative_predictions():
    f1, acc = f1_and_accuracy([0.1, 0.2, 0.3], [1, 0, 1])
    assert f1 == 0.0
    assert acc == 0.5


def test_macro_over_labels_skips_degenerate():
    scores = np.array([[0.9, 0.9, 0.9], [0.1, 0.2, 0.1], [0.8, 0.8, 0.9]])
    labels = np.array([[1, 1, 1], [0, 0, 1], [1, 1, 1]])
    f1, acc = f1_and_accuracy(scores, labels)
    # label 2 has no negatives and is ignored
    assert (f1, acc) == (1.0, 1.0)


def test_evaluate_breakdown():
    scores = np.array([[0.9, 0.2], [0.1, 0.7], [0.6, 0.4], [0.3, 0.9]])
    labels = np.array([[1, 0], [0, 1], [1, 1], [0, 0]])
    m = evaluate(scores, labels, ["a", "b"])
    assert set(m.per_label) == {"a", "b"}
    assert m.per_label["a"]["auc_roc"] == 1.0
    assert m.per_label["b"]["auc_roc"] == 0.5
    assert m.auc_roc == 0.75
    assert m.per_label["b"]["accuracy"] == 0.5


def test_summary_uses_sample_std():
    folds = [FoldMetrics(a, a, a) for a in (0.8, 0.81, 0.82, 0.83, 0.84)]
    s = summarize(folds)
    assert s["auc_roc"][0] == pytest.approx(0.82)
    assert s["auc_roc"][1] == pytest.approx(np.std([0.8, 0.81, 0.82, 0.83, 0.84], ddof=1))


def test_results_table_round_trip(tmp_path):
    assert format_cell(0.8161, 0.0049) == "0.816 (0.005)"
    row = results_row("P2-5", "top-MAGD", {"auc_roc": (0.816, 0.005), "f1": (0.649, 0.005),
                                           "accuracy": (0.641, 0.005)}, 2763773)
    assert row == ("P2-5", "top-MAGD", "0.816 (0.005)", "0.649 (0.005)", "0.641 (0.005)", "2763773")
    write_results([row], tmp_path / "r.tsv")
    assert read_results(tmp_path / "r.tsv") == [row]
