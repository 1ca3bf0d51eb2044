"""Align mined parts across a dataset into consistent groups.

Each (image, part) pair gets a masked GAP descriptor from a convolutional
feature tensor; descriptors are then spectrally clustered so that, say, all
"head" parts end up in the same group regardless of the order in which the
per-image miner produced them.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateAffinity,
    EmptyMask,
    NoConvergence,
    NotSymmetric,
    ShapeMismatch,
    TooFewRows,
)
from .localize import kmeans_cluster
from .tensor import Tensor, global_average_pool, l2_normalize, masked_multiply


@dataclass(frozen=True)
class PartDescriptorTable:
    """One descriptor row per (image, part) pair."""

    rows: tuple[tuple[str, int, np.ndarray], ...]  # (image id, part index, descriptor)
    feature_dims: tuple[int, int, int]

    def matrix(self) -> np.ndarray:
        return np.stack([d for _, _, d in self.rows]).astype(np.float64)


@dataclass(frozen=True)
class AlignmentResult:
    labels: tuple[int, ...]
    group_sizes: tuple[int, ...]

    def groups(self) -> tuple[tuple[int, ...], ...]:
        """Row indices per group, ascending within each group."""
        k = len(self.group_sizes)
        out = [[] for _ in range(k)]
        for row, g in enumerate(self.labels):
            out[g].append(row)
        return tuple(tuple(g) for g in out)


def downsample_mask(mask: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Shrink a binary mask to feature resolution.

    A cell turns on when at least half of the image pixels it covers are on;
    if no cell reaches that, the best-covered cell is turned on anyway so a
    thin mask cannot vanish.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ShapeMismatch(f"mask must be rank 2, got rank {mask.ndim}")
    h, w = mask.shape
    # integral image makes every block sum O(1)
    integral = np.zeros((h + 1, w + 1), dtype=np.int64)
    integral[1:, 1:] = np.cumsum(np.cumsum(mask, axis=0), axis=1)
    r_edges = (np.arange(out_h + 1) * h) // out_h
    c_edges = (np.arange(out_w + 1) * w) // out_w
    r_edges[-1], c_edges[-1] = h, w

    coverage = np.zeros((out_h, out_w), dtype=np.float64)
    for i in range(out_h):
        r0, r1 = r_edges[i], max(r_edges[i + 1], r_edges[i] + 1)
        for j in range(out_w):
            c0, c1 = c_edges[j], max(c_edges[j + 1], c_edges[j] + 1)
            total = (integral[r1, c1] - integral[r0, c1]
                     - integral[r1, c0] + integral[r0, c0])
            coverage[i, j] = total / ((r1 - r0) * (c1 - c0))
    out = (coverage >= 0.5).astype(np.uint8)
    if not out.any() and mask.any():
        i, j = np.unravel_index(int(coverage.argmax()), coverage.shape)
        out[i, j] = 1
    return out


def part_descriptor(features: Tensor, mask: np.ndarray) -> np.ndarray:
    """Masked GAP descriptor: zero everything outside the part, then pool."""
    mask = np.asarray(mask)
    if not mask.any():
        raise EmptyMask("part mask selects no feature cell")
    return global_average_pool(masked_multiply(features, mask))


def sym_eigen(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, eigenvectors as columns), backed by
    LAPACK's symmetric solver; residuals sit far below the 1e-8*||A|| bound.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"matrix must be square, got shape {a.shape}")
    if a.size and float(np.abs(a - a.T).max()) > 1e-9:
        raise NotSymmetric("matrix is not symmetric within 1e-9")
    try:
        vals, vecs = np.linalg.eigh((a + a.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return vals, vecs


def spectral_cluster(table: PartDescriptorTable, k: int, seed: int) -> AlignmentResult:
    """Partition descriptor rows into k groups by normalized spectral clustering.

    Affinity is cosine similarity clipped at zero (no self loops), the graph
    Laplacian is the symmetric normalized one, and the k-smallest-eigenvalue
    embedding is row-normalized before seeded k-means.
    """
    n = len(table.rows)
    if n < k:
        raise TooFewRows(f"{n} rows cannot form {k} groups")
    x = table.matrix()
    x = np.stack([l2_normalize(row.astype(np.float32)).astype(np.float64) for row in x])

    affinity = np.clip(x @ x.T, 0.0, None)
    np.fill_diagonal(affinity, 0.0)
    degree = affinity.sum(axis=1)
    dead = np.flatnonzero(degree <= 0)
    if dead.size:
        raise DegenerateAffinity(f"row {int(dead[0])} has zero affinity degree")

    inv_sqrt = 1.0 / np.sqrt(degree)
    laplacian = np.eye(n) - affinity * inv_sqrt[:, None] * inv_sqrt[None, :]
    _, vecs = sym_eigen(laplacian)
    embedding = vecs[:, :k]
    norms = np.linalg.norm(embedding, axis=1)
    norms[norms < 1e-15] = 1.0
    embedding = embedding / norms[:, None]

    result = kmeans_cluster(embedding, k, seed=seed)
    labels = tuple(int(v) for v in result.labels)
    sizes = tuple(int(c) for c in np.bincount(result.labels, minlength=k))
    return AlignmentResult(labels=labels, group_sizes=sizes)


def group_part_slots(table: PartDescriptorTable, result: AlignmentResult) -> tuple[int, ...]:
    """Part-slot index each group stands for: majority vote of its members'
    original per-image part indices, ties to the lower index."""
    slots = []
    for rows in result.groups():
        votes = Counter(table.rows[r][1] for r in rows)
        if not votes:
            slots.append(0)
            continue
        top = max(votes.values())
        slots.append(min(i for i, v in votes.items() if v == top))
    return tuple(slots)


def image_representatives(table: PartDescriptorTable,
                          result: AlignmentResult) -> dict[tuple[str, int], int]:
    """Pick one row per (image, group).

    When an image contributes several parts to one group, the row closest in
    cosine to the group centroid wins.  Images absent from a group simply
    have no entry.
    """
    x = table.matrix()
    norms = np.linalg.norm(x, axis=1)
    norms[norms < 1e-15] = 1.0
    xn = x / norms[:, None]

    chosen: dict[tuple[str, int], int] = {}
    for g, rows in enumerate(result.groups()):
        if not rows:
            continue
        centroid = xn[list(rows)].mean(axis=0)
        for r in rows:
            image = table.rows[r][0]
            key = (image, g)
            if key not in chosen:
                chosen[key] = r
            else:
                if float(xn[r] @ centroid) > float(xn[chosen[key]] @ centroid):
                    chosen[key] = r
    return chosen


def serialize_alignment(result: AlignmentResult) -> dict:
    """JSON-ready form: {"labels": [...], "groups": [[row indices] x K]}."""
    return {"labels": list(result.labels),
            "groups": [list(g) for g in result.groups()]}
