"""Fused part+object features and a linear one-vs-rest SVM.

The trainer is a dual coordinate-descent solver for the L1-loss SVM with the
bias folded into the weight vector as a constant feature, so no separate
intercept update is needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyTraining, LengthMismatch, ShapeMismatch, SingleClass
from .tensor import l2_normalize


@dataclass(frozen=True)
class FusedFeature:
    """Concatenation of independently L2-normalized blocks."""

    vector: np.ndarray
    block_dims: tuple[int, ...]

    def __post_init__(self):
        self.vector.setflags(write=False)


def fuse_features(blocks: Sequence[np.ndarray]) -> FusedFeature:
    """Normalize each block to unit length, then concatenate.

    The fused vector has squared norm equal to the number of blocks, so each
    block contributes equally no matter how its raw magnitudes compare.
    """
    if not blocks:
        raise LengthMismatch("need at least one feature block")
    parts = []
    dims = []
    for b in blocks:
        b = np.asarray(b, dtype=np.float32)
        if b.ndim != 1:
            raise ShapeMismatch(f"feature block must be rank 1, got rank {b.ndim}")
        if dims and b.shape[0] != dims[0]:
            raise LengthMismatch(
                f"blocks differ in length: {dims[0]} vs {b.shape[0]}")
        parts.append(l2_normalize(b))
        dims.append(b.shape[0])
    return FusedFeature(vector=np.concatenate(parts), block_dims=tuple(dims))


@dataclass(frozen=True)
class LinearSvmModel:
    classes: tuple
    weights: np.ndarray         # (n_classes, dim)
    biases: np.ndarray          # (n_classes,)
    c_reg: float
    dual_traces: tuple[tuple[float, ...], ...] = ()  # per class, per epoch

    def __post_init__(self):
        self.weights.setflags(write=False)
        self.biases.setflags(write=False)


def _solve_binary(x: np.ndarray, y: np.ndarray, c_reg: float, seed: int,
                  gap_tol: float = 1e-4, max_epochs: int = 1000):
    """Dual coordinate descent on one +1/-1 problem.

    Returns (weights, bias, dual trace).  The dual objective can only rise:
    each coordinate step solves its one-variable subproblem exactly.
    """
    n, d = x.shape
    aug = np.hstack([x, np.ones((n, 1))])          # bias as a constant feature
    q_diag = np.einsum("ij,ij->i", aug, aug)
    alpha = np.zeros(n)
    w = np.zeros(d + 1)
    rng = np.random.default_rng(seed)
    trace = []

    for _ in range(max_epochs):
        order = rng.permutation(n)
        for i in order:
            g = y[i] * float(aug[i] @ w) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= c_reg:
                pg = max(g, 0.0)
            else:
                pg = g
            if abs(pg) < 1e-12:
                continue
            a_new = min(max(a - g / q_diag[i], 0.0), c_reg)
            if a_new != a:
                w += (a_new - a) * y[i] * aug[i]
                alpha[i] = a_new

        dual = float(alpha.sum() - 0.5 * (w @ w))
        trace.append(dual)
        margins = 1.0 - y * (aug @ w)
        primal = float(0.5 * (w @ w) + c_reg * np.clip(margins, 0.0, None).sum())
        if primal - dual <= gap_tol:
            break

    return w[:d].copy(), float(w[d]), tuple(trace)


def train_linear_svm(x, labels: Sequence, c_reg: float = 1.0,
                     seed: int = 0, gap_tol: float = 1e-4,
                     max_epochs: int = 1000) -> LinearSvmModel:
    """One-vs-rest linear SVM over the sorted distinct labels.

    Rows may be plain vectors or FusedFeature instances.  Each binary
    problem stops once its duality gap drops to gap_tol or after
    max_epochs coordinate passes, whichever comes first.
    """
    if len(x) == 0:
        raise EmptyTraining("no training rows")
    if isinstance(x[0], FusedFeature):
        x = [f.vector for f in x]
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch(f"training matrix must be rank 2, got rank {x.ndim}")
    labels = list(labels)
    if len(labels) != x.shape[0]:
        raise LengthMismatch(f"{x.shape[0]} rows but {len(labels)} labels")
    if c_reg <= 0:
        raise ValueError(f"c_reg must be positive, got {c_reg}")

    classes = sorted(set(labels))
    if len(classes) < 2:
        raise SingleClass(f"need at least 2 classes, got {len(classes)}")

    weights = np.zeros((len(classes), x.shape[1]))
    biases = np.zeros(len(classes))
    traces = []
    for idx, cls in enumerate(classes):
        y = np.where(np.asarray([lab == cls for lab in labels]), 1.0, -1.0)
        w, b, trace = _solve_binary(x, y, c_reg, seed=seed + idx,
                                    gap_tol=gap_tol, max_epochs=max_epochs)
        weights[idx] = w
        biases[idx] = b
        traces.append(trace)

    return LinearSvmModel(classes=tuple(classes), weights=weights,
                          biases=biases, c_reg=float(c_reg),
                          dual_traces=tuple(traces))


def decision_scores(model: LinearSvmModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.weights.shape[1]:
        raise ShapeMismatch(
            f"feature dim {x.shape[1]} does not match model dim {model.weights.shape[1]}")
    scores = x @ model.weights.T + model.biases
    return scores[0] if single else scores


def predict(model: LinearSvmModel, x: np.ndarray):
    """Highest-scoring class; ties break toward the earlier sorted class."""
    scores = decision_scores(model, x)
    if scores.ndim == 1:
        return model.classes[int(np.argmax(scores))]
    return [model.classes[int(i)] for i in np.argmax(scores, axis=1)]


def serialize_model(model: LinearSvmModel) -> dict:
    return {
        "classes": list(model.classes),
        "weights": [[float(v) for v in row] for row in model.weights],
        "biases": [float(b) for b in model.biases],
        "c_reg": model.c_reg,
    }


def load_model(payload: dict) -> LinearSvmModel:
    try:
        classes = tuple(payload["classes"])
        weights = np.asarray(payload["weights"], dtype=np.float64)
        biases = np.asarray(payload["biases"], dtype=np.float64)
        c_reg = float(payload["c_reg"])
    except (KeyError, TypeError, ValueError) as exc:
        raise LengthMismatch(f"bad model payload: {exc}") from exc
    if weights.ndim != 2 or weights.shape[0] != len(classes) or biases.shape != (len(classes),):
        raise ShapeMismatch("model arrays disagree with class count")
    return LinearSvmModel(classes=classes, weights=weights, biases=biases, c_reg=c_reg)
