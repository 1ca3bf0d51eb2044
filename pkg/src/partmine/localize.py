"""Part localization: support map, component filtering, clustering, geometry.

The flow for one image is: merge mined patterns into a support map, upsample
it to image size, keep the largest connected component, k-means the positive
(x, y, value) triples into part centers, then cut a square mask of side
l = lambda * min(box width, box height) around each center.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMap, EmptyMask, ShapeMismatch, TooFewPoints, ZeroExtent
from .mining import PatternSet
from .tensor import Tensor, bilinear_resize, masked_multiply
from .transactions import TransactionDB

FEATURE_GRID = "feature-grid"
IMAGE = "image"


@dataclass(frozen=True)
class SupportMap:
    """Non-negative 2-D grid of per-position item frequencies."""

    grid: np.ndarray
    scale: str
    source_dims: tuple[int, int]
    warning: str | None = None

    def __post_init__(self):
        g = np.ascontiguousarray(self.grid, dtype=np.float32)
        if g.ndim != 2:
            raise ShapeMismatch(f"support map must be rank 2, got {g.ndim}")
        g.flags.writeable = False
        object.__setattr__(self, "grid", g)


@dataclass(frozen=True)
class PartLayout:
    """Object box, k part centers, side length and the k binary part masks."""

    object_box: tuple[int, int, int, int]  # (x_min, y_min, width, height)
    centers: tuple[tuple[int, int], ...]   # (x, y) integer pixels
    side: int
    masks: tuple[np.ndarray, ...]
    k: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "k", len(self.centers))
        if len(self.masks) != len(self.centers):
            raise ShapeMismatch("one mask per center required")

    def part_boxes(self) -> tuple[tuple[int, int, int, int], ...]:
        """(x, y, w, h) bounding box of each part mask."""
        boxes = []
        for m in self.masks:
            ys, xs = np.nonzero(m)
            boxes.append((int(xs.min()), int(ys.min()),
                          int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1)))
        return tuple(boxes)


def build_support_map(patterns: PatternSet, db: TransactionDB) -> SupportMap:
    """Raw transaction count per position for items covered by any pattern.

    Positions whose item occurs in no mined pattern stay zero.  An empty
    pattern set is not fatal: the all-zero map carries a warning instead.
    """
    h, w = db.grid
    grid = np.zeros((h, w), dtype=np.float32)
    mined = patterns.items()
    if not mined:
        return SupportMap(grid=grid, scale=FEATURE_GRID, source_dims=(h, w),
                          warning="empty pattern set, support map is all zero")
    counts = np.zeros(db.universe_size, dtype=np.int64)
    for t in db.transactions:
        for i in t:
            counts[i] += 1
    for item in mined:
        grid[item // w, item % w] = counts[item]
    return SupportMap(grid=grid, scale=FEATURE_GRID, source_dims=(h, w))


def upsample_support_map(s: SupportMap, image_h: int, image_w: int) -> SupportMap:
    """Bilinear upsampling of a feature-grid map to image size."""
    if s.scale != FEATURE_GRID:
        raise ValueError("support map is already at image scale")
    if image_h < 1 or image_w < 1:
        raise ZeroExtent(f"image extents must be >= 1, got ({image_h}, {image_w})")
    up = bilinear_resize(Tensor(s.grid), image_h, image_w)
    return SupportMap(grid=up.data, scale=IMAGE, source_dims=s.source_dims,
                      warning=s.warning)


def _row_runs(row: np.ndarray):
    """Inclusive (start, end) column spans of the True runs in one mask row."""
    padded = np.empty(row.size + 2, dtype=np.int8)
    padded[0] = padded[-1] = 0
    padded[1:-1] = row
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def _largest_component(mask: np.ndarray, connectivity: int) -> np.ndarray:
    """Boolean mask of the largest connected component of `mask`.

    Run-based labeling with union-find; size ties go to the component whose
    first pixel comes earliest in row-major order (roots are created in scan
    order and unions keep the smaller id, so the smallest root wins ties).
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    h, w = mask.shape
    reach = 1 if connectivity == 8 else 0

    parent: list[int] = []
    size: list[int] = []

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    all_runs = []  # (row, start, end, label)
    prev: list[tuple[int, int, int]] = []  # (start, end, label) of previous row
    for r in range(h):
        runs = _row_runs(mask[r])
        cur = []
        j = 0
        for a0, a1 in runs:
            label = -1
            while j < len(prev) and prev[j][1] < a0 - reach:
                j += 1
            jj = j
            while jj < len(prev) and prev[jj][0] <= a1 + reach:
                root = find(prev[jj][2])
                if label == -1:
                    label = root
                elif root != label:
                    keep, drop = (label, root) if label < root else (root, label)
                    parent[drop] = keep
                    size[keep] += size[drop]
                    label = keep
                jj += 1
            if label == -1:
                label = len(parent)
                parent.append(label)
                size.append(0)
            size[find(label)] += a1 - a0 + 1
            cur.append((a0, a1, label))
            all_runs.append((r, a0, a1, label))
        prev = cur

    if not parent:
        return np.zeros_like(mask, dtype=bool)
    roots = [i for i in range(len(parent)) if find(i) == i]
    best = min(roots, key=lambda i: (-size[i], i))
    out = np.zeros_like(mask, dtype=bool)
    for r, a0, a1, label in all_runs:
        if find(label) == best:
            out[r, a0 : a1 + 1] = True
    return out


def extract_largest_component(s: SupportMap, connectivity: int = 8) -> SupportMap:
    """Zero every positive region except the largest connected one."""
    positive = s.grid > 0
    if not positive.any():
        raise EmptyMap("support map has no positive cell")
    keep = _largest_component(positive, connectivity)
    return SupportMap(grid=np.where(keep, s.grid, 0.0), scale=s.scale,
                      source_dims=s.source_dims, warning=s.warning)


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    inertia: float
    trace: tuple[float, ...]  # within-cluster sum of squares per Lloyd iteration


def kmeans_cluster(points, k: int, seed: int, max_iter: int = 300,
                   tol: float = 1e-6) -> KMeansResult:
    """Seeded k-means++ followed by Lloyd iterations.

    Deterministic for a given seed; stops when the largest center movement
    drops below tol.  Empty clusters are re-seeded with the point currently
    farthest from its assigned center.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ShapeMismatch(f"points must be a 2-D array, got rank {pts.ndim}")
    n = pts.shape[0]
    if k < 1 or n < k:
        raise TooFewPoints(f"{n} points cannot form {k} clusters")

    rng = np.random.default_rng(seed)
    centers = np.empty((k, pts.shape[1]), dtype=np.float64)
    centers[0] = pts[rng.integers(n)]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = 0  # all points coincide with a chosen center
        centers[j] = pts[idx]
        d2 = np.minimum(d2, ((pts - centers[j]) ** 2).sum(axis=1))

    trace = []
    for _ in range(max_iter):
        dist = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dist.argmin(axis=1)
        assigned = dist[np.arange(n), labels]
        trace.append(float(assigned.sum()))

        new_centers = centers.copy()
        empty = []
        for j in range(k):
            member = labels == j
            if member.any():
                new_centers[j] = pts[member].mean(axis=0)
            else:
                empty.append(j)
        if empty:
            spare = assigned.copy()
            for j in empty:
                far = int(spare.argmax())
                new_centers[j] = pts[far]
                spare[far] = -1.0
        movement = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if movement < tol:
            break

    # one final assignment so labels and inertia match the returned centers
    dist = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = dist.argmin(axis=1)
    inertia = float(dist[np.arange(n), labels].sum())
    trace.append(inertia)
    return KMeansResult(centers=centers, labels=labels, inertia=inertia,
                        trace=tuple(trace))


def find_part_centers(s: SupportMap, k: int, seed: int,
                      restarts: int = 5) -> tuple[tuple[float, float], ...]:
    """Cluster the positive (x, y, value) triples of a support map.

    Each feature dimension is min-max scaled to [0, 1] before clustering
    (coordinate and frequency ranges differ by orders of magnitude);
    dimensions that are constant over the positive set carry no information
    and are dropped.  Runs `restarts` seeded k-means attempts and keeps the
    lowest-inertia one, then maps centers back to image coordinates.
    """
    ys, xs = np.nonzero(s.grid > 0)
    n = ys.size
    if n < k:
        raise TooFewPoints(f"{n} positive cells cannot form {k} clusters")
    feats = np.column_stack([xs, ys, s.grid[ys, xs]]).astype(np.float64)

    lo = feats.min(axis=0)
    hi = feats.max(axis=0)
    span = hi - lo
    varying = span > 0
    if varying.any():
        scaled = (feats[:, varying] - lo[varying]) / span[varying]
    else:
        scaled = np.zeros((n, 1))  # every positive cell is identical

    best = None
    for attempt in range(restarts):
        result = kmeans_cluster(scaled, k, seed=seed + attempt)
        if best is None or result.inertia < best.inertia:
            best = result

    centers = np.tile(lo, (k, 1))
    if varying.any():
        centers[:, varying] = best.centers * span[varying] + lo[varying]
    return tuple((float(c[0]), float(c[1])) for c in centers)


def _positive_bbox(grid: np.ndarray) -> tuple[int, int, int, int]:
    ys, xs = np.nonzero(grid > 0)
    if ys.size == 0:
        raise EmptyMap("support map has no positive cell")
    return (int(xs.min()), int(ys.min()),
            int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))


def derive_part_layout(centers, s: SupportMap, lam: float,
                       image_h: int, image_w: int) -> PartLayout:
    """Square part masks of side l = lambda * min(box w, box h) around centers.

    The box is the tight bounding box of the positive support; l is rounded
    to the nearest integer with a floor of 1.  A pixel belongs to mask i when
    both |x - cx| <= l/2 and |y - cy| <= l/2; masks are clamped at the image
    border rather than shifted.
    """
    if not 0 < lam <= 1:
        raise ValueError(f"lambda must be in (0, 1], got {lam}")
    x_min, y_min, w_o, h_o = _positive_bbox(s.grid)
    side = max(1, int(np.floor(lam * min(w_o, h_o) + 0.5)))
    half = side // 2

    out_centers = []
    masks = []
    for cx, cy in centers:
        cxi = int(np.floor(cx + 0.5))
        cyi = int(np.floor(cy + 0.5))
        out_centers.append((cxi, cyi))
        x_lo = max(0, cxi - half)
        x_hi = min(image_w - 1, cxi + half)
        y_lo = max(0, cyi - half)
        y_hi = min(image_h - 1, cyi + half)
        mask = np.zeros((image_h, image_w), dtype=np.uint8)
        if x_lo <= x_hi and y_lo <= y_hi:
            mask[y_lo : y_hi + 1, x_lo : x_hi + 1] = 1
        masks.append(mask)
    return PartLayout(object_box=(x_min, y_min, w_o, h_o),
                      centers=tuple(out_centers), side=side, masks=tuple(masks))


def object_box(s: SupportMap, frac: float = 0.2) -> tuple[int, int, int, int]:
    """Bounding box of the largest component after thresholding at frac*max."""
    if not 0 < frac < 1:
        raise ValueError(f"frac must be in (0, 1), got {frac}")
    peak = float(s.grid.max())
    if peak <= 0:
        raise EmptyMap("support map has no positive cell")
    binary = s.grid >= frac * peak
    keep = _largest_component(binary, connectivity=8)
    ys, xs = np.nonzero(keep)
    return (int(xs.min()), int(ys.min()),
            int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))


def crop_region(image: Tensor, mask: np.ndarray, out_h: int = 224,
                out_w: int = 224) -> Tensor:
    """Mask the image, crop to the mask's bounding box, resize to out size."""
    mask = np.asarray(mask)
    if not mask.any():
        raise EmptyMask("mask selects no pixel")
    product = masked_multiply(image, mask)
    ys, xs = np.nonzero(mask)
    y0, y1 = int(ys.min()), int(ys.max())
    x0, x1 = int(xs.min()), int(xs.max())
    window = product.data[..., y0 : y1 + 1, x0 : x1 + 1]
    return bilinear_resize(Tensor(window), out_h, out_w)
