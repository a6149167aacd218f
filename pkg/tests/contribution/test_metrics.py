"""Tests for contribution/metrics.py and contribution/diagnostics.py"""

import logging

import numpy as np
import pytest

from dpu_sim.contribution.diagnostics import dump_contributions, smoothness_report
from dpu_sim.contribution.metrics import (
    ContributionError,
    ContributionKind,
    ContributionVector,
    TraceState,
    accumulate_local,
    combine,
    global_contribution,
)
from dpu_sim.nn.network import WeightVector, loss_and_gradient
from dpu_sim.nn.optim import OptimizerState
from dpu_sim.update.mask import select_mask
from dpu_sim.update.training import FullBatch, run_steps


class TestContributionVector:
    """Tests for ContributionVector."""

    def test_global_must_be_nonnegative(self):
        """Negative global contributions should be rejected."""
        with pytest.raises(ValueError, match="non-negative"):
            ContributionVector([1.0, -0.1], ContributionKind.GLOBAL)

    def test_local_may_be_negative(self):
        """Local contributions may be negative."""
        c = ContributionVector([1.0, -0.1], "local")
        assert c.kind is ContributionKind.LOCAL
        assert len(c) == 2

    def test_rejects_inf(self):
        """Non-finite entries should be rejected."""
        with pytest.raises(ValueError, match="NaN or Inf"):
            ContributionVector([np.inf], "local")


class TestGlobalContribution:
    """Tests for global_contribution()."""

    def test_squared_displacement(self, make_arch):
        """Entries should be (w_f - w)^2."""
        arch = make_arch(1, 1)
        w = WeightVector([1.0, 2.0], arch)
        w_f = WeightVector([4.0, 1.5], arch)
        assert global_contribution(w, w_f).values.tolist() == [9.0, 0.25]

    def test_arch_mismatch(self, make_arch, make_weights):
        """Vectors of different architectures should raise."""
        with pytest.raises(ValueError, match="mismatch"):
            global_contribution(make_weights(make_arch(2, 3)), make_weights(make_arch(3, 2)))

    def test_permutation_equivariant(self, make_arch, make_weights):
        """Permuting both vectors permutes the contribution the same way."""
        arch = make_arch(3, 4, 2)
        w = make_weights(arch, seed=1)
        w_f = make_weights(arch, seed=2)
        order = np.random.default_rng(5).permutation(arch.n_weights)
        permuted = global_contribution(
            WeightVector(w.values[order], arch), WeightVector(w_f.values[order], arch)
        )
        assert np.array_equal(permuted.values, global_contribution(w, w_f).values[order])

    def test_doubling_displacement_quadruples(self, make_arch, make_weights):
        """Doubling w_f - w multiplies every entry by four and keeps the top-k set."""
        arch = make_arch(3, 4, 2)
        w = WeightVector(np.zeros(arch.n_weights), arch)
        w_f = make_weights(arch, seed=3, scale=0.5)
        base = global_contribution(w, w_f)
        doubled = global_contribution(w, WeightVector(2.0 * w_f.values, arch))
        assert np.array_equal(doubled.values, 4.0 * base.values)
        assert select_mask(doubled, 0.3) == select_mask(base, 0.3)


class TestAccumulateLocal:
    """Tests for accumulate_local()."""

    def test_subtracts_gradient_times_step(self):
        """The trace should accumulate -g * step and count steps."""
        trace = TraceState.zeros(2)
        trace = accumulate_local(trace, np.array([1.0, 2.0]), np.array([-0.5, 0.25]))
        trace = accumulate_local(trace, np.array([1.0, 0.0]), np.array([-1.0, 3.0]))
        assert trace.accumulator.tolist() == [1.5, -0.5]
        assert trace.steps_seen == 2

    def test_rejects_shape_mismatch(self):
        """Gradient and step must match the trace length."""
        with pytest.raises(ValueError):
            accumulate_local(TraceState.zeros(3), np.zeros(2), np.zeros(3))

    def test_sgd_identity(self, make_arch, make_batch, make_weights):
        """Under fixed-rate full-batch SGD the trace equals sum(alpha * g^2)."""
        arch = make_arch(3, 6, 3)
        data = make_batch(arch, size=24, seed=4)
        w = make_weights(arch, seed=4)
        alpha = 0.05
        opt = OptimizerState.create("sgd", np.array([alpha]), arch.n_weights)
        result = run_steps(w, FullBatch(data), opt, 15, track_local=True)

        expected = np.zeros(arch.n_weights)
        values = w.values.copy()
        for _ in range(15):
            _, g = loss_and_gradient(WeightVector(values, arch), data)
            expected += alpha * g * g
            values = values - alpha * g
        assert np.allclose(result.trace.accumulator, expected, atol=1e-10, rtol=0)
        assert np.all(result.trace.accumulator >= 0)


class TestCombine:
    """Tests for combine()."""

    def test_sum_of_normalized_vectors(self):
        """Each vector should be divided by its entry sum before adding."""
        c = combine(
            ContributionVector([3.0, 1.0], "global"),
            ContributionVector([1.0, 1.0], "local"),
        )
        assert c.kind is ContributionKind.COMBINED
        assert np.allclose(c.values, [0.75 + 0.5, 0.25 + 0.5])

    def test_negative_sum_uses_l1_norm(self, caplog):
        """A local vector summing to about zero should fall back to L1 normalization."""
        with caplog.at_level(logging.WARNING):
            c = combine(
                ContributionVector([1.0, 1.0], "global"),
                ContributionVector([2.0, -2.0], "local"),
            )
        assert np.allclose(c.values, [0.5 + 0.5, 0.5 - 0.5])
        assert "L1 norm" in caplog.text

    def test_zero_local_is_dropped(self, caplog):
        """An all-zero local vector should leave the normalized global alone."""
        with caplog.at_level(logging.WARNING):
            c = combine(
                ContributionVector([2.0, 6.0], "global"),
                ContributionVector([0.0, 0.0], "local"),
            )
        assert np.allclose(c.values, [0.25, 0.75])
        assert "contribution is zero" in caplog.text

    def test_invariant_to_positive_rescaling(self):
        """Scaling either input by a positive constant leaves the combined vector unchanged."""
        rng = np.random.default_rng(8)
        c_global = ContributionVector(rng.random(40), "global")
        c_local = ContributionVector(rng.normal(size=40) + 0.5, "local")
        reference = combine(c_global, c_local)
        exact = combine(
            ContributionVector(8.0 * c_global.values, "global"),
            ContributionVector(0.5 * c_local.values, "local"),
        )
        assert np.array_equal(exact.values, reference.values)
        scaled = combine(
            ContributionVector(3.7 * c_global.values, "global"),
            ContributionVector(0.3 * c_local.values, "local"),
        )
        assert np.allclose(scaled.values, reference.values, rtol=1e-12, atol=0)
        assert select_mask(scaled, 0.25) == select_mask(reference, 0.25)

    def test_both_zero_raises(self):
        """Two degenerate vectors should raise ContributionError."""
        with pytest.raises(ContributionError):
            combine(
                ContributionVector([0.0, 0.0], "global"),
                ContributionVector([0.0, 0.0], "local"),
            )

    def test_length_mismatch(self):
        """Vectors of different lengths should raise ValueError."""
        with pytest.raises(ValueError, match="lengths differ"):
            combine(
                ContributionVector([1.0], "global"),
                ContributionVector([1.0, 1.0], "local"),
            )


class TestDiagnostics:
    """Tests for dump_contributions() and smoothness_report()."""

    def test_dump_writes_columns(self, tmp_path):
        """The dump should have a header and one row per weight."""
        g = ContributionVector([1.0, 2.0], "global")
        l_ = ContributionVector([0.5, -0.5], "local")
        c = ContributionVector([0.8, 0.2], "combined")
        path = dump_contributions(tmp_path / "c.txt", g, l_, c)
        lines = path.read_text().splitlines()
        assert lines[0] == "index c_global c_local c_combined"
        assert len(lines) == 3
        assert lines[2].split()[0] == "1"

    def test_full_mask_has_no_gap(self, make_arch, make_batch, make_weights):
        """Rewinding nothing should give zero gap and a holding bound."""
        arch = make_arch(2, 4, 3)
        w = make_weights(arch, seed=1)
        w_f = make_weights(arch, seed=2)
        report = smoothness_report(w, w_f, np.ones(arch.n_weights, bool), make_batch(arch))
        assert report.loss_gap == 0.0
        assert report.rewound_norm_sq == 0.0
        assert report.holds
        assert report.lipschitz > 0
