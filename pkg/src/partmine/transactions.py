"""Turn a stack of activation maps into a transaction database.

Each feature map becomes one transaction; the items are the row-major grid
indices of positions whose activation strictly exceeds the threshold alpha
(the mean of the strictly positive activations).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroStack, ShapeMismatch
from .tensor import Tensor


@dataclass(frozen=True)
class ThresholdReport:
    """Alpha threshold(s) computed from a feature stack.

    mode "global" carries one alpha for the whole stack, mode "per-map" one
    alpha per feature map.  Maps without any positive value get +inf so they
    yield an empty transaction; positive_count is the number of strictly
    positive values in the stack.
    """

    mode: str
    alpha: float | tuple[float, ...]
    positive_count: int


@dataclass(frozen=True)
class TransactionDB:
    """Fixed item universe of h*w grid positions plus one transaction per map."""

    universe_size: int
    grid: tuple[int, int]
    transactions: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.transactions)


def compute_threshold(stack: Tensor, mode: str = "global") -> ThresholdReport:
    """Mean of the strictly positive activations, globally or per map."""
    if stack.rank != 3:
        raise ShapeMismatch(f"feature stack must be rank 3, got {stack.rank}")
    if mode not in ("global", "per-map"):
        raise ValueError(f"unknown threshold mode {mode!r}")
    data = stack.data
    positive = data > 0
    count = int(positive.sum())

    if mode == "global":
        if count == 0:
            raise AllZeroStack("no strictly positive activation in the stack")
        alpha = float(data[positive].mean(dtype=np.float64))
        return ThresholdReport(mode="global", alpha=alpha, positive_count=count)

    alphas = []
    for c in range(data.shape[0]):
        vals = data[c][positive[c]]
        alphas.append(float(vals.mean(dtype=np.float64)) if vals.size else float("inf"))
    return ThresholdReport(mode="per-map", alpha=tuple(alphas), positive_count=count)


def build_transactions(stack: Tensor, thr: ThresholdReport) -> TransactionDB:
    """One transaction per map: the indices activated strictly above alpha.

    Item index is row * w + col.  Maps with nothing above threshold yield an
    empty transaction, which is kept so N stays equal to the map count.
    """
    if stack.rank != 3:
        raise ShapeMismatch(f"feature stack must be rank 3, got {stack.rank}")
    c, h, w = stack.dims
    if thr.mode == "per-map":
        if len(thr.alpha) != c:
            raise ShapeMismatch(f"{len(thr.alpha)} per-map alphas for {c} maps")
        alphas = thr.alpha
    else:
        alphas = (thr.alpha,) * c

    flat = stack.data.reshape(c, h * w)
    transactions = []
    for i in range(c):
        a = alphas[i]
        if a == float("inf"):
            transactions.append(())
            continue
        transactions.append(tuple(int(j) for j in np.flatnonzero(flat[i] > a)))
    return TransactionDB(universe_size=h * w, grid=(h, w), transactions=tuple(transactions))


def dump_transactions(db: TransactionDB) -> str:
    """Line-oriented debug dump: one transaction per line, ascending indices."""
    return "\n".join(" ".join(str(i) for i in t) for t in db.transactions) + "\n"
