"""Tests for update/mask.py"""

import math

import numpy as np
import pytest

from dpu_sim.contribution.metrics import ContributionVector
from dpu_sim.nn.network import WeightVector
from dpu_sim.update.mask import Mask, rewind, rpu_mask, select_mask, target_k_count


def argmax_removal(values: np.ndarray, count: int) -> set[int]:
    """Quadratic reference selection: repeatedly take the first maximum."""
    remaining = list(values)
    chosen = set()
    for _ in range(count):
        best = None
        for i, v in enumerate(remaining):
            if i in chosen:
                continue
            if best is None or v > remaining[best]:
                best = i
        chosen.add(best)
    return chosen


class TestTargetKCount:
    """Tests for target_k_count()."""

    @pytest.mark.parametrize(
        "n, k, expected",
        [(100, 0.1, 10), (10, 0.25, 3), (10, 0.01, 1), (7, 1.0, 7), (1000, 0.0005, 1)],
    )
    def test_rounding_and_clamp(self, n, k, expected):
        """Count should be round-half-up of k*I, clamped to [1, I]."""
        assert target_k_count(n, k) == expected

    @pytest.mark.parametrize("k", [0.0, -0.1, 1.01])
    def test_rejects_ratio_out_of_range(self, k):
        """k must lie in (0, 1]."""
        with pytest.raises(ValueError, match="updating ratio"):
            target_k_count(10, k)


class TestMask:
    """Tests for Mask."""

    def test_is_read_only(self):
        """Mask bits should not be writable."""
        mask = Mask([True, False])
        with pytest.raises(ValueError):
            mask.bits[0] = False

    def test_equality_and_cardinality(self):
        """Masks compare by bits and count their ones."""
        assert Mask([1, 0, 1]) == Mask([True, False, True])
        assert Mask([1, 0, 1]).cardinality == 2
        assert Mask.full(4).cardinality == 4
        assert Mask.empty(4).ones().tolist() == []


class TestSelectMask:
    """Tests for select_mask()."""

    def test_picks_largest(self):
        """Ones should sit at the largest contributions."""
        mask = select_mask(np.array([0.1, 5.0, 0.3, 2.0]), 0.5)
        assert mask.ones().tolist() == [1, 3]

    def test_ties_prefer_lower_index(self):
        """Among equal contributions the lower index wins."""
        mask = select_mask(ContributionVector(np.ones(6), "global"), 0.5)
        assert mask.ones().tolist() == [0, 1, 2]

    @pytest.mark.parametrize("k", [0.01, 0.1, 0.5, 1.0])
    def test_matches_argmax_removal(self, k):
        """Selection should match the quadratic reference on random vectors."""
        rng = np.random.default_rng(int(k * 100))
        for _ in range(10):
            values = np.round(rng.normal(size=200), 1)
            mask = select_mask(values, k)
            assert mask.cardinality == target_k_count(200, k)
            assert set(mask.ones().tolist()) == argmax_removal(values, mask.cardinality)

    @pytest.mark.parametrize("k", [0.1, 0.3, 0.5])
    def test_unchanged_under_cubing(self, k):
        """A strictly increasing map of positive contributions selects the same set."""
        values = np.random.default_rng(3).integers(1, 10, size=60).astype(np.float64)
        assert select_mask(values**3, k) == select_mask(values, k)


class TestRpuMask:
    """Tests for rpu_mask()."""

    def test_per_layer_counts(self, make_arch):
        """Each layer should get round(k * layer size) ones."""
        arch = make_arch(4, 8, 3)
        mask = rpu_mask(arch, 0.3, seed=5)
        for layer in arch.layers:
            ones = int(mask.bits[layer.start : layer.stop].sum())
            assert ones == math.floor(0.3 * layer.size + 0.5)

    def test_deterministic(self, make_arch):
        """Same seed should give the same mask."""
        arch = make_arch()
        assert rpu_mask(arch, 0.1, 3) == rpu_mask(arch, 0.1, 3)

    def test_seeds_differ(self, make_arch):
        """Different seeds should give different masks on a non-trivial net."""
        arch = make_arch(4, 16, 16, 3)
        assert rpu_mask(arch, 0.1, 1) != rpu_mask(arch, 0.1, 2)


class TestRewind:
    """Tests for rewind()."""

    def test_takes_full_update_on_mask(self, make_arch):
        """Masked entries come from w_f, the rest from w."""
        arch = make_arch(1, 1)
        w = WeightVector([1.0, 2.0], arch)
        w_f = WeightVector([3.0, 4.0], arch)
        assert rewind(w, w_f, Mask([False, True])).values.tolist() == [1.0, 4.0]

    def test_frozen_coordinates_bit_exact(self, make_arch, make_weights):
        """Frozen coordinates should be bit-identical to w."""
        arch = make_arch()
        w = make_weights(arch, seed=1, scale=1.0)
        w_f = make_weights(arch, seed=2, scale=1.0)
        mask = select_mask(np.random.default_rng(0).random(arch.n_weights), 0.1)
        out = rewind(w, w_f, mask)
        frozen = ~mask.bits
        assert np.array_equal(out.values[frozen].view(np.uint64), w.values[frozen].view(np.uint64))

    def test_length_mismatch(self, make_arch, make_weights):
        """A mask of the wrong length should raise."""
        arch = make_arch(2, 3)
        w = make_weights(arch)
        with pytest.raises(ValueError, match="mask length"):
            rewind(w, w, Mask.full(arch.n_weights - 1))
