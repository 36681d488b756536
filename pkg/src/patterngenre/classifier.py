"""One-vs-rest L2 logistic regression with balanced class weights, and k-fold CV.

For one label with targets y in {0, 1} the minimized objective is

    sum_i  c(y_i) * log(1 + exp(-s_i * (w . x_i + b)))  +  reg / 2 * |w|^2

with s_i = 2 y_i - 1, c(1) = N / (2 N_pos), c(0) = N / (2 N_neg). The bias
is not penalized. Optimization is L-BFGS (scipy) with the analytic gradient.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize
from scipy.special import expit

from .features import FeatureMatrix
from .metrics import FoldMetrics, evaluate, summarize

log = logging.getLogger(__name__)

GRAD_TOL = 1e-4
MAX_ITER = 1000
MODEL_FORMAT = "patterngenre-model"
MODEL_VERSION = 1


def class_weights(labels) -> tuple[float, float]:
    """Balanced weights (w_pos, w_neg) = (N / 2 N_pos, N / 2 N_neg)."""
    y = np.asarray(labels).astype(bool)
    n = len(y)
    n_pos = int(y.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("balanced weights need both classes (N=%d, N_pos=%d)" % (n, n_pos))
    return n / (2 * n_pos), n / (2 * n_neg)


def sample_weights(labels) -> np.ndarray:
    y = np.asarray(labels).astype(bool)
    w_pos, w_neg = class_weights(y)
    return np.where(y, w_pos, w_neg)


def logistic_loss(params, X, y, weights, reg: float) -> tuple[float, np.ndarray]:
    """Weighted L2-regularized logistic loss and its gradient.

    ``params`` is the weight vector followed by the bias.
    """
    w, b = params[:-1], params[-1]
    signs = np.where(np.asarray(y).astype(bool), 1.0, -1.0)
    margin = signs * (X @ w + b)
    loss = float(weights @ np.logaddexp(0.0, -margin) + 0.5 * reg * (w @ w))
    dz = -weights * signs * expit(-margin)
    grad = np.empty_like(params)
    grad[:-1] = X.T @ dz + reg * w
    grad[-1] = dz.sum()
    return loss, grad


@dataclass
class BinaryFit:
    weights: np.ndarray
    bias: float
    iterations: int
    grad_norm: float
    converged: bool
    losses: list[float] = field(default_factory=list)


def fit_binary(X, y, reg: float = 1.0, weights=None, record_losses: bool = False) -> BinaryFit:
    X = sp.csr_matrix(X, dtype=float)
    y = np.asarray(y).astype(bool)
    weights = sample_weights(y) if weights is None else np.asarray(weights, dtype=float)
    x0 = np.zeros(X.shape[1] + 1)
    losses = []

    def fun(params):
        return logistic_loss(params, X, y, weights, reg)

    callback = None
    if record_losses:
        losses.append(fun(x0)[0])

        def callback(params):
            losses.append(fun(params)[0])

    res = minimize(fun, x0, jac=True, method="L-BFGS-B", callback=callback,
                   options={"maxiter": MAX_ITER, "gtol": GRAD_TOL, "ftol": 1e-15})
    grad_norm = float(np.max(np.abs(fun(res.x)[1])))
    converged = grad_norm < GRAD_TOL
    if not converged:
        log.warning("logistic regression stopped at gradient max-norm %.3g after %d iterations",
                    grad_norm, res.nit)
    return BinaryFit(res.x[:-1].copy(), float(res.x[-1]), int(res.nit), grad_norm, converged, losses)


@dataclass
class TrainedModel:
    labels: tuple[str, ...]
    weights: np.ndarray          # labels x features
    bias: np.ndarray             # labels
    reg: float
    iterations: tuple[int, ...]
    grad_norms: tuple[float, ...]
    vocabulary_digest: str = ""
    skipped: tuple[str, ...] = ()

    @property
    def converged(self) -> bool:
        return all(g < GRAD_TOL for g in self.grad_norms)

    def __eq__(self, other):
        if not isinstance(other, TrainedModel):
            return NotImplemented
        return (self.labels == other.labels and self.reg == other.reg
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.bias, other.bias)
                and self.iterations == other.iterations
                and self.grad_norms == other.grad_norms
                and self.vocabulary_digest == other.vocabulary_digest
                and self.skipped == other.skipped)


def train(X, Y, labels, reg: float = 1.0, vocabulary_digest: str = "") -> TrainedModel:
    """Fit one balanced binary classifier per label column of ``Y``.

    Labels without both classes among the rows are skipped and listed in
    ``TrainedModel.skipped``. The optimizer is deterministic, so no seed is
    needed.
    """
    X = sp.csr_matrix(X, dtype=float)
    Y = np.asarray(Y).astype(bool)
    kept, skipped, ws, bs, its, gns = [], [], [], [], [], []
    for j, name in enumerate(labels):
        yj = Y[:, j]
        if yj.all() or not yj.any():
            skipped.append(name)
            continue
        fit = fit_binary(X, yj, reg)
        kept.append(name)
        ws.append(fit.weights)
        bs.append(fit.bias)
        its.append(fit.iterations)
        gns.append(fit.grad_norm)
    if skipped:
        log.info("skipped labels lacking both classes: %s", ", ".join(skipped))
    weights = np.vstack(ws) if ws else np.zeros((0, X.shape[1]))
    return TrainedModel(tuple(kept), weights, np.asarray(bs, dtype=float), float(reg),
                        tuple(its), tuple(gns), vocabulary_digest, tuple(skipped))


def predict_scores(model: TrainedModel, X) -> np.ndarray:
    """Per-row, per-label probabilities (rows x labels)."""
    X = sp.csr_matrix(X, dtype=float)
    if X.shape[1] != model.weights.shape[1]:
        raise ValueError("matrix has %d columns, model expects %d"
                         % (X.shape[1], model.weights.shape[1]))
    return expit(np.asarray(X @ model.weights.T) + model.bias)


def save_model(model: TrainedModel, path) -> None:
    meta = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "labels": list(model.labels),
        "skipped": list(model.skipped),
        "reg": model.reg,
        "iterations": list(model.iterations),
        "grad_norms": list(model.grad_norms),
        "vocabulary_sha256": model.vocabulary_digest,
    }
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)),
                 weights=model.weights, bias=model.bias)


def load_model(path) -> TrainedModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != MODEL_FORMAT or meta.get("version") != MODEL_VERSION:
            raise ValueError("%s is not a version %d model file" % (path, MODEL_VERSION))
        return TrainedModel(tuple(meta["labels"]), data["weights"].copy(), data["bias"].copy(),
                            meta["reg"], tuple(meta["iterations"]), tuple(meta["grad_norms"]),
                            meta["vocabulary_sha256"], tuple(meta["skipped"]))


@dataclass(frozen=True)
class FoldPlan:
    seed: int
    assignments: Mapping[str, int]
    n_folds: int = 5

    def test_rows(self, fold: int) -> list[str]:
        return sorted(p for p, f in self.assignments.items() if f == fold)

    def train_rows(self, fold: int) -> list[str]:
        return sorted(p for p, f in self.assignments.items() if f != fold)


def make_fold_plan(piece_ids, seed: int = 0, n_folds: int = 5) -> FoldPlan:
    """Seeded uniform random split of the sorted ids into near-equal folds."""
    ids = sorted(set(piece_ids))
    if len(ids) < n_folds:
        raise ValueError("need at least %d pieces for %d-fold CV, got %d"
                         % (n_folds, n_folds, len(ids)))
    perm = np.random.default_rng(seed).permutation(len(ids))
    assignments = {ids[idx]: pos % n_folds for pos, idx in enumerate(perm.tolist())}
    return FoldPlan(seed, assignments, n_folds)


@dataclass
class CVResult:
    labels: tuple[str, ...]
    folds: list[FoldMetrics]
    summary: dict[str, tuple[float, float]]
    plan: FoldPlan


def label_matrix(pieces, annotations, labels) -> np.ndarray:
    col = {label: j for j, label in enumerate(labels)}
    Y = np.zeros((len(pieces), len(labels)), dtype=bool)
    for i, piece in enumerate(pieces):
        for label in annotations[piece]:
            Y[i, col[label]] = True
    return Y


def cross_validate(matrix: FeatureMatrix, annotations: Mapping[str, frozenset],
                   reg: float = 1.0, seed: int = 0, n_folds: int = 5) -> CVResult:
    """k-fold CV over the pieces that are both in the matrix and annotated."""
    pieces = sorted(set(matrix.rows) & {p for p, ls in annotations.items() if ls})
    if not pieces:
        raise ValueError("no annotated pieces in the feature matrix")
    labels = tuple(sorted(set().union(*(annotations[p] for p in pieces))))
    plan = make_fold_plan(pieces, seed, n_folds)
    data = matrix.select(pieces)
    Y = label_matrix(data.rows, annotations, labels)
    row = {p: i for i, p in enumerate(data.rows)}
    folds = []
    for k in range(n_folds):
        tr = [row[p] for p in plan.train_rows(k)]
        te = [row[p] for p in plan.test_rows(k)]
        model = train(data.counts[tr], Y[tr], labels, reg)
        scores = predict_scores(model, data.counts[te])
        kept = [labels.index(name) for name in model.labels]
        folds.append(evaluate(scores, Y[te][:, kept], model.labels))
    return CVResult(labels, folds, summarize(folds), plan)
