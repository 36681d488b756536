"""Multi-label evaluation: macro AUC-ROC, F1 and balanced accuracy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

METRIC_NAMES = ("auc_roc", "f1", "accuracy")
RESULTS_HEADER = ("config", "scheme", "auc_roc", "f1", "accuracy", "n_patterns")


def _binary(labels) -> np.ndarray:
    y = np.asarray(labels)
    return y.astype(bool)


def _check_both_classes(y: np.ndarray) -> None:
    if y.all() or not y.any():
        raise ValueError("labels need at least one positive and one negative example")


def auc_roc(scores, labels) -> float:
    """Mann-Whitney AUC; a tied positive/negative pair counts one half."""
    s = np.asarray(scores, dtype=float)
    y = _binary(labels)
    _check_both_classes(y)
    ranks = rankdata(s)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def confusion(predicted, labels) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) for boolean predictions."""
    pred = _binary(predicted)
    y = _binary(labels)
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    tn = int(np.sum(~pred & ~y))
    return tp, fp, fn, tn


def f1_from_confusion(tp, fp, fn, tn) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def balanced_accuracy_from_confusion(tp, fp, fn, tn) -> float:
    recalls = [tp / (tp + fn) if tp + fn else None, tn / (tn + fp) if tn + fp else None]
    recalls = [r for r in recalls if r is not None]
    return sum(recalls) / len(recalls)


def f1_and_accuracy(scores, labels, threshold: float = 0.5) -> tuple[float, float]:
    """Macro F1 and macro balanced accuracy after thresholding the scores.

    Accepts a single label (1-D) or a pieces x labels array; in the 2-D case
    labels lacking positives or negatives are left out of the averages.
    """
    s = np.asarray(scores, dtype=float)
    y = _binary(labels)
    if s.ndim == 1:
        _check_both_classes(y)
        cm = confusion(s >= threshold, y)
        return f1_from_confusion(*cm), balanced_accuracy_from_confusion(*cm)
    f1s, accs = [], []
    for j in range(s.shape[1]):
        if y[:, j].all() or not y[:, j].any():
            continue
        cm = confusion(s[:, j] >= threshold, y[:, j])
        f1s.append(f1_from_confusion(*cm))
        accs.append(balanced_accuracy_from_confusion(*cm))
    if not f1s:
        raise ValueError("no label has both positive and negative examples")
    return float(np.mean(f1s)), float(np.mean(accs))


@dataclass
class FoldMetrics:
    auc_roc: float
    f1: float
    accuracy: float
    per_label: dict[str, dict[str, float]] = field(default_factory=dict)


def evaluate(scores, labels, label_names, threshold: float = 0.5) -> FoldMetrics:
    """Macro metrics over the labels that have both classes among the rows."""
    s = np.asarray(scores, dtype=float)
    y = _binary(labels)
    per_label = {}
    for j, name in enumerate(label_names):
        yj = y[:, j]
        if yj.all() or not yj.any():
            continue
        cm = confusion(s[:, j] >= threshold, yj)
        tp, fp, fn, tn = cm
        per_label[name] = {
            "auc_roc": auc_roc(s[:, j], yj),
            "f1": f1_from_confusion(*cm),
            "balanced_accuracy": balanced_accuracy_from_confusion(*cm),
            "accuracy": (tp + tn) / len(yj),
            "positives": int(yj.sum()),
        }
    if not per_label:
        raise ValueError("no label has both positive and negative examples")
    return FoldMetrics(
        auc_roc=float(np.mean([v["auc_roc"] for v in per_label.values()])),
        f1=float(np.mean([v["f1"] for v in per_label.values()])),
        accuracy=float(np.mean([v["balanced_accuracy"] for v in per_label.values()])),
        per_label=per_label,
    )


def summarize(folds) -> dict[str, tuple[float, float]]:
    """Mean and sample standard deviation of each metric across folds."""
    out = {}
    for name in METRIC_NAMES:
        values = np.array([getattr(f, name) for f in folds], dtype=float)
        std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        out[name] = (float(values.mean()), std)
    return out


def format_cell(mean: float, std: float) -> str:
    return "%.3f (%.3f)" % (mean, std)


def results_row(config: str, scheme: str, summary, n_patterns: int) -> tuple[str, ...]:
    return (config, scheme, *(format_cell(*summary[m]) for m in METRIC_NAMES), str(n_patterns))


def write_results(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(RESULTS_HEADER) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def read_results(path) -> list[tuple[str, ...]]:
    with open(path, encoding="utf-8") as fh:
        header = tuple(fh.readline().rstrip("\n").split("\t"))
        if header != RESULTS_HEADER:
            raise ValueError("%s: unexpected results header %r" % (path, header))
        return [tuple(line.rstrip("\n").split("\t")) for line in fh if line.strip()]
