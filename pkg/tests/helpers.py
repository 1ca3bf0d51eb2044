"""Small builders shared across test modules."""

from __future__ import annotations

import numpy as np

from partmine import PatternSet, PartDescriptorTable, TransactionDB


def make_db(transactions, grid=(4, 5)) -> TransactionDB:
    """TransactionDB over an h*w universe from plain item lists."""
    h, w = grid
    return TransactionDB(
        universe_size=h * w,
        grid=(h, w),
        transactions=tuple(tuple(sorted(set(t))) for t in transactions),
    )


def random_db(rng: np.random.Generator, max_items: int = 12,
              max_tx: int = 25) -> TransactionDB:
    """Random small database within the exhaustive miner's guard."""
    universe = int(rng.integers(2, max_items + 1))
    n_tx = int(rng.integers(1, max_tx + 1))
    transactions = []
    for _ in range(n_tx):
        size = int(rng.integers(0, universe + 1))
        transactions.append(sorted(rng.choice(universe, size, replace=False)))
    return TransactionDB(
        universe_size=universe,
        grid=(1, universe),
        transactions=tuple(tuple(int(i) for i in t) for t in transactions),
    )


def pattern_dict(ps: PatternSet) -> dict[tuple[int, ...], float]:
    return {items: supp for items, supp in ps.patterns}


def separable_points(seed: int = 7, n: int = 200):
    """Two linearly separable 2-D clouds of n/2 points each."""
    rng = np.random.default_rng(seed)
    half = n // 2
    lo = rng.uniform([-4.0, -4.0], [-1.0, 4.0], (half, 2))
    hi = rng.uniform([1.0, -4.0], [4.0, 4.0], (n - half, 2))
    x = np.vstack([lo, hi])
    labels = ["left"] * half + ["right"] * (n - half)
    return x, labels


def block_descriptor_table(k: int, rows: int = 60, seed: int = 0,
                           dim: int = 32) -> tuple[PartDescriptorTable, list[int]]:
    """Descriptor table whose rows fall into k mutually orthogonal groups.

    Group g lives in its own coordinate slice of the descriptor space, so
    cosine affinity between groups is exactly zero (block-diagonal affinity).
    Returns the table and the planted group id per row.
    """
    assert dim % k == 0
    rng = np.random.default_rng(seed)
    span = dim // k
    table_rows = []
    planted = []
    for row in range(rows):
        g = row % k
        vec = np.zeros(dim)
        vec[g * span:(g + 1) * span] = rng.uniform(0.1, 1.0, span)
        table_rows.append((f"img{row // k:03d}", g, vec))
        planted.append(g)
    table = PartDescriptorTable(rows=tuple(table_rows),
                                feature_dims=(dim, 1, 1))
    return table, planted


def grouping(labels) -> frozenset[frozenset[int]]:
    """Partition of row indices induced by labels, for order-free comparison."""
    groups: dict[int, set[int]] = {}
    for row, lab in enumerate(labels):
        groups.setdefault(int(lab), set()).add(row)
    return frozenset(frozenset(g) for g in groups.values())
