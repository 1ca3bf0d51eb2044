"""Planted-fixture generator: structure, frequencies, and reproducibility."""

import numpy as np
import pytest

from partmine import (
    apriori,
    build_transactions,
    compute_threshold,
    match_centers,
    planted_stack,
)


class TestPlantedStack:
    def test_shapes_and_value_ranges(self):
        stack, truth = planted_stack(seed=0)
        assert stack.dims == (1024, 28, 28)
        assert stack.data.dtype == np.float32
        assert stack.data.min() >= 0.0
        assert truth.grid == (28, 28)
        assert truth.image_dims == (448, 448)

    def test_four_disjoint_connected_groups(self):
        _, truth = planted_stack(seed=1)
        assert len(truth.group_cells) == 4
        seen = set()
        for cells in truth.group_cells:
            assert len(cells) >= 4
            assert not (set(cells) & seen)
            seen.update(cells)

    def test_group_and_noise_frequencies(self):
        _, truth = planted_stack(seed=2)
        n = 1024
        for maps in truth.group_maps:
            assert len(maps) >= 0.12 * n
        for maps in truth.noise_maps:
            assert 0 < len(maps) < 0.05 * n

    def test_noise_cells_avoid_the_groups(self):
        _, truth = planted_stack(seed=3)
        planted = {c for g in truth.group_cells for c in g}
        assert not (set(truth.noise_items) & planted)

    def test_transactions_match_the_planted_itemsets(self):
        stack, truth = planted_stack(seed=4)
        db = build_transactions(stack, compute_threshold(stack))
        assert tuple(tuple(t) for t in db.transactions) == \
            truth.expected_transactions()

    def test_mined_items_equal_planted_union(self):
        stack, truth = planted_stack(seed=5)
        db = build_transactions(stack, compute_threshold(stack))
        ps = apriori(db, beta=0.07, max_len=3)
        union = {r * truth.grid[1] + c
                 for g in truth.group_cells for r, c in g}
        assert ps.items() == union

    def test_same_seed_reproduces_the_stack(self):
        a, _ = planted_stack(seed=6)
        b, _ = planted_stack(seed=6)
        assert np.array_equal(a.data, b.data)

    def test_centers_scale_to_image_coordinates(self):
        _, truth = planted_stack(seed=7)
        for (fx, fy), (ix, iy) in zip(truth.centers_feature,
                                      truth.centers_image):
            assert ix == pytest.approx(fx * 447 / 27)
            assert iy == pytest.approx(fy * 447 / 27)


class TestMatchCenters:
    def test_identity_matching(self):
        pts = ((0.0, 0.0), (10.0, 0.0))
        assert match_centers(pts, pts) == (0.0, 0.0)

    def test_greedy_pairs_closest_first(self):
        found = ((1.0, 0.0), (7.0, 0.0))
        planted = ((0.0, 0.0), (6.0, 0.0))
        assert match_centers(found, planted) == (1.0, 1.0)

    def test_one_to_one_even_when_one_found_center_dominates(self):
        found = ((0.0, 0.0), (50.0, 50.0))
        planted = ((1.0, 0.0), (2.0, 0.0))
        dist = match_centers(found, planted)
        assert dist[0] == pytest.approx(1.0)
        assert dist[1] == pytest.approx(np.hypot(48.0, 50.0))

    def test_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            match_centers(((0.0, 0.0),), ((0.0, 0.0), (1.0, 1.0)))
