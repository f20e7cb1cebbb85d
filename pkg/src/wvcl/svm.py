"""Kernel SVMs trained by SMO, combined one-vs-one through an ECOC model."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelSpec:
    """Polynomial kernel ``(gamma * <x, y> + coef0) ** degree``.

    ``gamma=None`` means 1 / feature dimension, resolved at training time.
    """

    kind: str = "polynomial"
    degree: int = 2
    gamma: float | None = None
    coef0: float = 1.0

    def __post_init__(self):
        if self.kind != "polynomial":
            raise InvalidInputError(f"unsupported kernel {self.kind!r}")
        if self.degree < 1:
            raise InvalidInputError(f"kernel degree must be >= 1, got {self.degree}")
        if self.gamma is not None and not self.gamma > 0:
            raise InvalidInputError(f"kernel gamma must be positive, got {self.gamma}")

    def resolved(self, dim: int) -> KernelSpec:
        if self.gamma is not None:
            return self
        return KernelSpec(self.kind, self.degree, 1.0 / dim, self.coef0)

    def matrix(self, a, b) -> np.ndarray:
        a = np.atleast_2d(a)
        b = np.atleast_2d(b)
        if a.shape[1] != b.shape[1]:
            raise InvalidInputError(f"feature length mismatch: {a.shape[1]} vs {b.shape[1]}")
        g = self.gamma if self.gamma is not None else 1.0 / a.shape[1]
        return (g * (a @ b.T) + self.coef0) ** self.degree


def kernel(x, y, spec: KernelSpec) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise InvalidInputError(f"kernel arguments differ in length: {x.size} vs {y.size}")
    return float(spec.matrix(x[None, :], y[None, :])[0, 0])


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.mean.size:
            raise InvalidInputError(f"expected {self.mean.size} features, got {x.shape[-1]}")
        return (x - self.mean) / self.std


def fit_standardizer(features) -> Standardizer:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InvalidInputError("standardizer needs at least 2 training rows")
    std = x.std(axis=0)
    return Standardizer(x.mean(axis=0), np.where(std < 1e-12, 1.0, std))


def apply_standardizer(std: Standardizer, x) -> np.ndarray:
    return std.transform(x)


@dataclass
class BinarySvm:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for each support vector
    bias: float
    spec: KernelSpec
    C: float
    n_iter: int = 0
    objective_trace: list[float] = field(default_factory=list, repr=False)

    def decision_function(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if self.support_vectors.shape[0] == 0:
            return np.full(x.shape[0], self.bias)
        return self.spec.matrix(x, self.support_vectors) @ self.dual_coef + self.bias

    def predict(self, x) -> np.ndarray:
        return np.where(self.decision_function(x) >= 0, 1, -1)


def kkt_residual(svm: BinarySvm, X, y, alpha) -> float:
    """Largest violation of the soft-margin KKT conditions on the training set."""
    y = np.asarray(y, dtype=np.float64)
    margin = y * svm.decision_function(X)
    at_zero = alpha <= 0
    at_c = alpha >= svm.C
    free = ~at_zero & ~at_c
    viol = np.zeros_like(margin)
    viol[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    viol[at_c] = np.maximum(0.0, margin[at_c] - 1.0)
    viol[free] = np.abs(margin[free] - 1.0)
    return float(viol.max(initial=0.0))


def train_binary_svm(X, y, C: float = 1.0, spec: KernelSpec = KernelSpec(), tol: float = 1e-3,
                     max_iter: int = 200_000, track_objective: bool = False):
    """Solve the soft-margin dual by SMO with maximal-violating-pair selection.

    Returns ``(svm, alpha)`` where ``alpha`` holds the dual variable of every
    training row (useful for KKT checks).  Iterates until the KKT gap drops
    below ``tol / 2`` so the reported residual stays within ``tol``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise InvalidInputError("X must be (n, d) with one label per row")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InvalidInputError("binary labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise InvalidInputError("binary SVM needs both classes present")
    if not C > 0:
        raise InvalidInputError(f"box constraint C must be positive, got {C}")

    spec = spec.resolved(X.shape[1])
    n = y.size
    Q = spec.matrix(X, X) * np.outer(y, y)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 0.5 a'Qa - sum(a)
    eps = tol / 2.0
    trace = []

    it = 0
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * grad
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        if score[i] - score[j] < eps:
            break
        it += 1

        if y[i] != y[j]:
            quad = max(Q[i, i] + Q[j, j] + 2 * Q[i, j], 1e-12)
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            ai, aj = alpha[i] + delta, alpha[j] + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(Q[i, i] + Q[j, j] - 2 * Q[i, j], 1e-12)
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            ai, aj = alpha[i] - delta, alpha[j] + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total

        d_i, d_j = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        grad += Q[i] * d_i + Q[j] * d_j
        if track_objective:
            trace.append(float(0.5 * alpha @ grad - 0.5 * alpha.sum()))
    else:
        log.warning("SMO stopped at max_iter=%d before reaching tol=%g", max_iter, tol)

    score = -y * grad
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        b = float(np.mean(score[free]))
    else:
        # no free vectors: any b between the active bounds satisfies KKT
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        b = float(0.5 * (score[up].max() + score[low].min()))

    sv = alpha > 0
    svm = BinarySvm(X[sv].copy(), alpha[sv] * y[sv], b, spec, float(C), it, trace)
    return svm, alpha


def build_ovo_coding(n_classes: int) -> np.ndarray:
    """One column per class pair (i < j) in lexicographic order: +1 at i, -1 at j."""
    if n_classes < 2:
        raise InvalidInputError(f"need at least 2 classes, got {n_classes}")
    pairs = [(i, j) for i in range(n_classes) for j in range(i + 1, n_classes)]
    M = np.zeros((n_classes, len(pairs)), dtype=np.int8)
    for col, (i, j) in enumerate(pairs):
        M[i, col], M[j, col] = 1, -1
    return M


@dataclass
class EcocModel:
    standardizer: Standardizer
    coding: np.ndarray
    learners: list[BinarySvm]
    classes: np.ndarray
    decoding: str = "loss"
    metadata: dict = field(default_factory=dict)
    kkt_residuals: list[float] = field(default_factory=list, repr=False)

    @property
    def n_features(self) -> int:
        return self.standardizer.mean.size

    def decision_values(self, X) -> np.ndarray:
        Xs = self.standardizer.transform(np.atleast_2d(X))
        return np.column_stack([lr.decision_function(Xs) for lr in self.learners])

    def losses(self, X) -> np.ndarray:
        return decode_losses(self.decision_values(X), self.coding, self.decoding)

    def predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Class labels and per-class losses for each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise InvalidInputError(f"model expects {self.n_features} features, got {X.shape[1]}")
        losses = self.losses(X)
        # argmin returns the first minimum: ties go to the lowest class index
        return self.classes[np.argmin(losses, axis=1)], losses


def decode_losses(f: np.ndarray, coding: np.ndarray, decoding: str = "loss") -> np.ndarray:
    """Per-class average loss over the learners that involve the class."""
    M = coding.astype(np.float64)
    z = f[:, None, :] * M[None, :, :]
    if decoding == "loss":
        per = np.maximum(0.0, 1.0 - z) / 2.0
    elif decoding == "hamming":
        per = (1.0 - np.sign(z)) / 2.0
    else:
        raise InvalidInputError(f"unknown decoding {decoding!r}")
    per = per * (M != 0)[None, :, :]
    return per.sum(axis=2) / np.abs(M).sum(axis=1)[None, :]


def train_ecoc(features, labels, C: float = 1.0, spec: KernelSpec = KernelSpec(), tol: float = 1e-3,
               decoding: str = "loss", classes: Sequence | None = None,
               max_iter: int = 200_000) -> EcocModel:
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != labels.size:
        raise InvalidInputError("features must be (n, d) with one label per row")
    classes = np.unique(labels) if classes is None else np.asarray(classes)
    if classes.size < 2:
        raise InvalidInputError("ECOC training needs at least 2 classes")
    for c in classes:
        if np.count_nonzero(labels == c) < 2:
            raise InvalidInputError(f"class {c!r} has fewer than 2 training rows")
    if not np.all(np.isin(labels, classes)):
        raise InvalidInputError("labels contain classes outside the declared class list")

    std = fit_standardizer(X)
    Xs = std.transform(X)
    spec = spec.resolved(X.shape[1])
    coding = build_ovo_coding(classes.size)
    learners, residuals = [], []
    for col in range(coding.shape[1]):
        pos = classes[coding[:, col] == 1][0]
        neg = classes[coding[:, col] == -1][0]
        rows = (labels == pos) | (labels == neg)
        y = np.where(labels[rows] == pos, 1.0, -1.0)
        svm, alpha = train_binary_svm(Xs[rows], y, C, spec, tol, max_iter=max_iter)
        learners.append(svm)
        residuals.append(kkt_residual(svm, Xs[rows], y, alpha))
    return EcocModel(std, coding, learners, classes, decoding, kkt_residuals=residuals)


def confusion_matrix(true_idx, pred_idx, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(true_idx), np.asarray(pred_idx)), 1)
    return cm


def evaluate(model: EcocModel, features, labels) -> tuple[float, np.ndarray]:
    labels = np.asarray(labels)
    if labels.size == 0:
        raise InvalidInputError("empty test set")
    pred, _ = model.predict(features)
    index = {c: i for i, c in enumerate(model.classes.tolist())}
    t = np.array([index[c] for c in labels.tolist()])
    p = np.array([index[c] for c in pred.tolist()])
    cm = confusion_matrix(t, p, model.classes.size)
    return float(np.trace(cm) / cm.sum()), cm
