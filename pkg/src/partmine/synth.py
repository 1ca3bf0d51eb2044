"""Synthetic activation stacks with a known planted part structure.

Each stack holds 1024 sparse 28x28 activation maps.  Four cell groups are
planted on the perimeter of a square ring, one L-shaped elbow per corner,
and every group fires jointly (all its cells at once) on its own random
subset of maps.  Filler values too weak to clear the activation threshold
and a handful of moderately popular single noise cells provide clutter.
By construction the planted cells are exactly the frequent items of the
stack's transaction database, so mining, support mapping, and part-center
recovery can all be checked against the returned ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor

N_MAPS = 1024
GRID = (28, 28)
IMAGE_DIMS = (448, 448)

# Ring geometry: the perimeter cells of the square [lo..hi]^2, split into
# four rotationally symmetric elbows by the row and column midlines.
_RING_LO = 8
_RING_HI = 19

# Per-group fraction of maps on which the whole group is active together.
_GROUP_FREQS = (0.13, 0.15, 0.17, 0.19)

# Sub-threshold clutter: every map gets this many weak random cells.
_FILLER_PER_MAP = 60
_FILLER_RANGE = (0.05, 0.25)

# Value range for planted group and noise activations.
_ACTIVE_RANGE = (1.0, 2.0)

# Isolated noise cells outside the ring; each fires alone on a small
# fraction of maps, below any useful support threshold.
_N_NOISE_ITEMS = 40
_NOISE_FREQ_RANGE = (0.01, 0.045)


@dataclass(frozen=True)
class PlantedTruth:
    """Ground truth for one synthetic stack."""

    grid: tuple[int, int]
    image_dims: tuple[int, int]
    group_cells: tuple[tuple[tuple[int, int], ...], ...]
    group_maps: tuple[tuple[int, ...], ...]
    noise_items: tuple[tuple[int, int], ...]
    noise_maps: tuple[tuple[int, ...], ...]
    centers_feature: tuple[tuple[float, float], ...]
    centers_image: tuple[tuple[float, float], ...]

    def expected_transactions(self) -> tuple[tuple[int, ...], ...]:
        """Planted itemset per map: group cells plus noise, filler excluded."""
        h, w = self.grid
        n_maps = max(
            (m + 1 for maps in self.group_maps + self.noise_maps for m in maps),
            default=0,
        )
        per_map: list[set[int]] = [set() for _ in range(max(n_maps, N_MAPS))]
        for cells, maps in zip(self.group_cells, self.group_maps):
            items = [r * w + c for r, c in cells]
            for m in maps:
                per_map[m].update(items)
        for (r, c), maps in zip(self.noise_items, self.noise_maps):
            item = r * w + c
            for m in maps:
                per_map[m].add(item)
        return tuple(tuple(sorted(s)) for s in per_map)


def _ring_elbows(lo: int, hi: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Perimeter of the square [lo..hi]^2 as four corner elbows.

    The midlines split the one-cell-wide perimeter band into rotationally
    symmetric L-shaped pieces, ordered top-left, top-right, bottom-left,
    bottom-right.
    """
    mid = (lo + hi) / 2.0
    perimeter = (
        [(lo, c) for c in range(lo, hi + 1)]
        + [(hi, c) for c in range(lo, hi + 1)]
        + [(r, lo) for r in range(lo + 1, hi)]
        + [(r, hi) for r in range(lo + 1, hi)]
    )
    elbows: dict[str, list[tuple[int, int]]] = {
        "tl": [], "tr": [], "bl": [], "br": [],
    }
    for r, c in perimeter:
        key = ("t" if r < mid else "b") + ("l" if c < mid else "r")
        elbows[key].append((r, c))
    return tuple(tuple(sorted(elbows[k])) for k in ("tl", "tr", "bl", "br"))


def _to_image(point: tuple[float, float], grid: tuple[int, int],
              image_dims: tuple[int, int]) -> tuple[float, float]:
    """Map feature-grid (x, y) to image pixels, corner-aligned."""
    gh, gw = grid
    ih, iw = image_dims
    x, y = point
    return (x * (iw - 1) / (gw - 1), y * (ih - 1) / (gh - 1))


def planted_stack(seed: int, n_maps: int = N_MAPS,
                  grid: tuple[int, int] = GRID,
                  image_dims: tuple[int, int] = IMAGE_DIMS,
                  ) -> tuple[Tensor, PlantedTruth]:
    """Generate one synthetic stack and its ground truth.

    Reproducible for a given seed.  Group activations land in
    ``_ACTIVE_RANGE`` well above the stack's threshold, filler stays
    below it, and noise cells are kept rare enough that support mining
    at any sensible threshold prunes them.
    """
    h, w = grid
    rng = np.random.default_rng(seed)
    data = np.zeros((n_maps, h * w), dtype=np.float32)

    filler_cells = np.argpartition(
        rng.random((n_maps, h * w)), _FILLER_PER_MAP, axis=1,
    )[:, :_FILLER_PER_MAP]
    filler_values = rng.uniform(
        _FILLER_RANGE[0], _FILLER_RANGE[1], filler_cells.shape,
    ).astype(np.float32)
    np.put_along_axis(data, filler_cells, filler_values, axis=1)

    groups = _ring_elbows(_RING_LO, _RING_HI)
    group_maps = []
    centers_feature = []
    for cells, freq in zip(groups, _GROUP_FREQS):
        items = [r * w + c for r, c in cells]
        maps = np.sort(rng.choice(n_maps, int(round(freq * n_maps)),
                                  replace=False))
        values = rng.uniform(_ACTIVE_RANGE[0], _ACTIVE_RANGE[1],
                             (len(maps), len(items))).astype(np.float32)
        data[np.ix_(maps, items)] = values
        group_maps.append(tuple(int(m) for m in maps))
        rows = [r for r, _ in cells]
        cols = [c for _, c in cells]
        centers_feature.append(
            (float(np.mean(cols)), float(np.mean(rows))))

    ring = {cell for cells in groups for cell in cells}
    outside = [(r, c) for r in range(h) for c in range(w)
               if (r, c) not in ring]
    picks = rng.choice(len(outside), _N_NOISE_ITEMS, replace=False)
    noise_items = tuple(outside[i] for i in picks)
    noise_maps = []
    lo_n = int(np.ceil(_NOISE_FREQ_RANGE[0] * n_maps))
    hi_n = int(_NOISE_FREQ_RANGE[1] * n_maps)
    for r, c in noise_items:
        count = int(rng.integers(lo_n, hi_n + 1))
        maps = np.sort(rng.choice(n_maps, count, replace=False))
        data[maps, r * w + c] = rng.uniform(
            _ACTIVE_RANGE[0], _ACTIVE_RANGE[1], count).astype(np.float32)
        noise_maps.append(tuple(int(m) for m in maps))

    truth = PlantedTruth(
        grid=grid,
        image_dims=image_dims,
        group_cells=groups,
        group_maps=tuple(group_maps),
        noise_items=noise_items,
        noise_maps=tuple(noise_maps),
        centers_feature=tuple(centers_feature),
        centers_image=tuple(
            _to_image(p, grid, image_dims) for p in centers_feature),
    )
    return Tensor(data.reshape(n_maps, h, w)), truth


def match_centers(found: tuple[tuple[float, float], ...],
                  planted: tuple[tuple[float, float], ...],
                  ) -> tuple[float, ...]:
    """Greedy one-to-one matching of found centers to planted centers.

    Pairs the globally closest (found, planted) couples first and returns
    the distance for each planted center, in planted order.  Raises
    ``ValueError`` if the counts differ.
    """
    if len(found) != len(planted):
        raise ValueError(
            f"cannot match {len(found)} centers to {len(planted)} planted")
    pairs = sorted(
        (float(np.hypot(fx - px, fy - py)), fi, pi)
        for fi, (fx, fy) in enumerate(found)
        for pi, (px, py) in enumerate(planted)
    )
    used_f: set[int] = set()
    dist: dict[int, float] = {}
    for d, fi, pi in pairs:
        if fi in used_f or pi in dist:
            continue
        used_f.add(fi)
        dist[pi] = d
        if len(dist) == len(planted):
            break
    return tuple(dist[i] for i in range(len(planted)))
