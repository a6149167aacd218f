"""Tests for nn/network.py and nn/gradcheck.py"""

import numpy as np
import pytest

from dpu_sim.nn.gradcheck import central_difference, finite_diff_gradient, relative_error
from dpu_sim.nn.network import (
    Architecture,
    Batch,
    DimensionError,
    WeightVector,
    accuracy,
    init_weights,
    loss,
    loss_and_gradient,
    predict,
)


class TestArchitecture:
    """Tests for Architecture."""

    def test_weight_count(self):
        """I should sum (fan_in + 1) * fan_out over layers."""
        arch = Architecture((4, 8, 8, 3))
        assert arch.n_weights == (4 + 1) * 8 + (8 + 1) * 8 + (8 + 1) * 3

    def test_layer_slices_are_contiguous(self):
        """Layer slices should tile the weight vector without gaps."""
        arch = Architecture((2, 5, 3))
        layers = arch.layers
        assert layers[0].start == 0
        assert layers[0].weight_stop == 10
        assert layers[0].stop == 15
        assert layers[1].start == 15
        assert layers[1].stop == arch.n_weights

    def test_rejects_single_layer(self):
        """A single layer size should be rejected."""
        with pytest.raises(DimensionError):
            Architecture((4,))

    def test_rejects_zero_width(self):
        """Zero-width layers should be rejected."""
        with pytest.raises(DimensionError):
            Architecture((4, 0, 3))

    def test_rejects_unknown_activation(self):
        """Only relu is supported."""
        with pytest.raises(ValueError, match="unsupported activation"):
            Architecture((2, 3), activation="tanh")

    def test_str(self):
        """String form should join the layer sizes."""
        assert str(Architecture((2, 32, 32, 3))) == "2-32-32-3"


class TestWeightVector:
    """Tests for WeightVector."""

    def test_rejects_wrong_length(self, make_arch):
        """A vector of the wrong length should raise DimensionError."""
        arch = make_arch(2, 3)
        with pytest.raises(DimensionError):
            WeightVector(np.zeros(arch.n_weights + 1), arch)

    def test_rejects_nan(self, make_arch):
        """NaN entries should be rejected."""
        arch = make_arch(2, 3)
        values = np.zeros(arch.n_weights)
        values[0] = np.nan
        with pytest.raises(ValueError, match="NaN"):
            WeightVector(values, arch)

    def test_copies_input(self, make_arch):
        """The vector should not alias the caller's array."""
        arch = make_arch(2, 3)
        values = np.zeros(arch.n_weights)
        w = WeightVector(values, arch)
        values[0] = 1.0
        assert w.values[0] == 0.0

    def test_params_are_views(self, make_arch, make_weights):
        """params() should expose (matrix, bias) views in forward order."""
        arch = make_arch(2, 5, 3)
        w = make_weights(arch, scale=1.0)
        (m0, b0), (m1, b1) = w.params()
        assert m0.shape == (2, 5) and b0.shape == (5,)
        assert m1.shape == (5, 3) and b1.shape == (3,)
        assert m0[0, 1] == w.values[1]
        assert b1[-1] == w.values[-1]

    def test_identical_is_bit_exact(self, make_arch):
        """identical() should tell +0.0 from -0.0."""
        arch = make_arch(1, 1)
        a = WeightVector([0.0, 0.0], arch)
        b = WeightVector([0.0, -0.0], arch)
        assert a.identical(a.copy())
        assert not a.identical(b)


class TestInitWeights:
    """Tests for init_weights()."""

    def test_deterministic(self, make_arch):
        """Same (arch, seed) should give bit-identical vectors."""
        arch = make_arch()
        assert init_weights(arch, 7).identical(init_weights(arch, 7))

    def test_different_seeds_differ(self, make_arch):
        """Different seeds should give different vectors."""
        arch = make_arch()
        assert not init_weights(arch, 1).identical(init_weights(arch, 2))

    def test_biases_zero_and_matrices_bounded(self, make_arch):
        """Biases should be zero and matrices within the Glorot limit."""
        arch = make_arch(4, 8, 3)
        w = init_weights(arch, 0)
        for layer, (matrix, bias) in zip(arch.layers, w.params()):
            limit = np.sqrt(6.0 / (layer.fan_in + layer.fan_out))
            assert np.all(bias == 0.0)
            assert np.all(np.abs(matrix) <= limit)


class TestBatch:
    """Tests for Batch."""

    def test_rejects_mismatched_rows(self):
        """Input and label row counts must agree."""
        with pytest.raises(DimensionError):
            Batch(np.zeros((3, 2)), np.zeros(2, dtype=int))

    def test_rejects_empty(self):
        """Empty batches should be rejected."""
        with pytest.raises(DimensionError):
            Batch(np.zeros((0, 2)), np.zeros(0, dtype=int))

    def test_check_rejects_label_out_of_range(self, make_arch):
        """Labels must be below the class count."""
        arch = make_arch(2, 3)
        batch = Batch(np.zeros((2, 2)), np.array([0, 3]))
        with pytest.raises(DimensionError, match="out of range"):
            batch.check(arch)

    def test_check_rejects_feature_mismatch(self, make_arch):
        """Feature count must match the input layer."""
        arch = make_arch(3, 2)
        batch = Batch(np.zeros((2, 2)), np.array([0, 1]))
        with pytest.raises(DimensionError, match="features"):
            batch.check(arch)


class TestLoss:
    """Tests for loss() and loss_and_gradient()."""

    def test_zero_weights_give_log_classes(self, make_arch, make_batch):
        """With all-zero weights the loss should be ln(C)."""
        arch = make_arch(4, 6, 3)
        w = WeightVector(np.zeros(arch.n_weights), arch)
        assert loss(w, make_batch(arch)) == pytest.approx(np.log(3), abs=1e-12)

    def test_loss_matches_loss_and_gradient(self, make_arch, make_batch, make_weights):
        """The forward-only loss should equal the value of loss_and_gradient."""
        arch = make_arch()
        w = make_weights(arch, seed=3)
        data = make_batch(arch, size=20, seed=3)
        value, _ = loss_and_gradient(w, data)
        assert loss(w, data) == value

    def test_row_permutation_is_bit_identical(self, make_arch, make_batch, make_weights):
        """Permuting batch rows should not change loss or gradient at all."""
        arch = make_arch()
        w = make_weights(arch, seed=1)
        data = make_batch(arch, size=32, seed=1)
        order = np.random.default_rng(9).permutation(len(data))
        shuffled = Batch(data.inputs[order], data.labels[order])
        value_a, grad_a = loss_and_gradient(w, data)
        value_b, grad_b = loss_and_gradient(w, shuffled)
        assert value_a == value_b
        assert np.array_equal(grad_a, grad_b)

    def test_duplicated_batch_gives_same_result(self, make_arch, make_batch, make_weights):
        """Repeating every row leaves the mean loss and gradient unchanged."""
        arch = make_arch()
        w = make_weights(arch, seed=2)
        data = make_batch(arch, size=24, seed=2)
        doubled = Batch(
            np.vstack([data.inputs, data.inputs]), np.concatenate([data.labels, data.labels])
        )
        value_a, grad_a = loss_and_gradient(w, data)
        value_b, grad_b = loss_and_gradient(w, doubled)
        assert value_a == pytest.approx(value_b, rel=1e-14, abs=0)
        assert np.allclose(grad_a, grad_b, rtol=1e-12, atol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_gradient_matches_finite_differences(self, make_arch, make_batch, make_weights, seed):
        """Analytic and central-difference gradients should agree to 1e-4."""
        arch = make_arch(4, 8, 8, 3)
        w = make_weights(arch, seed=seed)
        data = make_batch(arch, size=10, seed=100 + seed)
        _, grad = loss_and_gradient(w, data)
        assert relative_error(grad, finite_diff_gradient(w, data)) < 1e-4

    def test_dimension_mismatch_raises(self, make_arch, make_batch, make_weights):
        """A batch for another architecture should raise DimensionError."""
        w = make_weights(make_arch(4, 3))
        with pytest.raises(DimensionError):
            loss_and_gradient(w, make_batch(make_arch(5, 3)))


class TestPredict:
    """Tests for predict() and accuracy()."""

    def test_ties_pick_lowest_class(self, make_arch):
        """Equal logits should predict class 0."""
        arch = make_arch(2, 3)
        w = WeightVector(np.zeros(arch.n_weights), arch)
        assert predict(w, np.ones((4, 2))).tolist() == [0, 0, 0, 0]

    def test_accuracy_counts_matches(self, make_arch):
        """Accuracy should be the fraction of matching predictions."""
        arch = make_arch(2, 3)
        w = WeightVector(np.zeros(arch.n_weights), arch)
        data = Batch(np.ones((4, 2)), np.array([0, 0, 1, 2]))
        assert accuracy(w, data) == 0.5

    def test_predict_rejects_wrong_width(self, make_arch):
        """Inputs with the wrong feature count should raise."""
        arch = make_arch(2, 3)
        w = WeightVector(np.zeros(arch.n_weights), arch)
        with pytest.raises(DimensionError):
            predict(w, np.ones((4, 3)))


class TestCentralDifference:
    """Tests for central_difference() and relative_error()."""

    def test_quadratic(self):
        """The gradient of sum(x^2) should be 2x."""
        x = np.array([1.0, -2.0, 0.5])
        grad = central_difference(lambda v: float(v @ v), x, 1e-5)
        assert np.allclose(grad, 2 * x, atol=1e-8)

    def test_does_not_modify_input(self):
        """The evaluation point should be left untouched."""
        x = np.array([1.0, 2.0])
        central_difference(lambda v: float(v.sum()), x, 1e-3)
        assert x.tolist() == [1.0, 2.0]

    def test_rejects_nonpositive_step(self):
        """A zero step should raise ValueError."""
        with pytest.raises(ValueError):
            central_difference(lambda v: 0.0, np.zeros(2), 0.0)

    def test_relative_error_of_zero_vectors(self):
        """Two zero vectors have zero relative error."""
        assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
