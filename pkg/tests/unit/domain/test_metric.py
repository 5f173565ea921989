"""Unit tests for prototype metric-space scoring."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.domain.metric import (
    class_probabilities,
    eds,
    logit_probabilities,
    loss_gradient,
    metric_loss,
    naive_confidence,
    squared_distances,
)
from src.domain.models import Prototypes
from src.shared.exceptions import (
    DimensionMismatchError,
    InvalidClassIndexError,
    ValidationException,
)


def protos(C: int) -> Prototypes:
    return Prototypes(num_classes=C)


@pytest.mark.unit
@pytest.mark.fast
class TestPrototypes:
    """Tests for the fixed prototype matrix."""

    def test_scaled_one_hot_rows(self) -> None:
        """Prototype t holds C at position t and zero elsewhere."""
        matrix = protos(4).matrix()
        assert np.array_equal(matrix, 4.0 * np.eye(4))

    def test_one_based_vector(self) -> None:
        """Vectors are addressed by 1-based class index."""
        assert protos(3).vector(2).tolist() == [0.0, 3.0, 0.0]


@pytest.mark.unit
@pytest.mark.fast
class TestClassProbabilities:
    """Tests for distance-softmax probabilities."""

    def test_origin_is_uniform(self) -> None:
        """The origin is equidistant from all prototypes."""
        for C in (2, 3, 5):
            assert class_probabilities(np.zeros(C), protos(C)) == pytest.approx(np.full(C, 1.0 / C))

    def test_at_prototype_two_classes(self) -> None:
        """At m_1 with C=2 the first class has probability 1/(1+e^-8)."""
        probs = class_probabilities([2.0, 0.0], protos(2))
        assert probs[0] == pytest.approx(1.0 / (1.0 + math.exp(-8.0)), rel=1e-12)
        assert probs[0] == pytest.approx(0.999665, abs=1e-6)

    def test_sums_to_one_and_open_interval(self) -> None:
        """Probabilities sum to 1 and stay strictly inside (0, 1)."""
        rng = np.random.default_rng(0)
        for _ in range(200):
            C = int(rng.integers(2, 9))
            probs = class_probabilities(rng.normal(scale=2.0, size=C), protos(C))
            assert abs(probs.sum() - 1.0) <= 1e-9
            assert np.all((probs > 0.0) & (probs < 1.0))

    def test_distant_embedding_does_not_vanish(self) -> None:
        """Far-away embeddings still produce a normalized vector."""
        probs = class_probabilities([1e4, -1e4, 3e3], protos(3))
        assert probs.sum() == pytest.approx(1.0)
        assert not np.any(np.isnan(probs))

    def test_argmax_invariant_under_distance_shift(self) -> None:
        """Adding a constant to all squared distances keeps the argmax."""
        rng = np.random.default_rng(1)
        for _ in range(50):
            e = rng.normal(size=4)
            distances = squared_distances(e, protos(4))
            shifted = np.exp(-(distances + 7.5))
            assert int(np.argmax(class_probabilities(e, protos(4)))) == int(np.argmax(shifted))

    def test_dimension_mismatch_raises(self) -> None:
        """Embeddings must have dimension C."""
        with pytest.raises(DimensionMismatchError):
            class_probabilities([0.0, 0.0], protos(3))

    def test_logit_softmax(self) -> None:
        """Equal logits give a uniform vector."""
        assert logit_probabilities([1.0, 1.0, 1.0, 1.0]) == pytest.approx([0.25] * 4)


@pytest.mark.unit
@pytest.mark.fast
class TestNaiveConfidence:
    """Tests for the max-probability score."""

    def test_uniform(self) -> None:
        """Uniform over four classes scores 0.25."""
        assert naive_confidence([0.25, 0.25, 0.25, 0.25]) == 0.25

    def test_maximum_entry(self) -> None:
        """The score is the largest probability."""
        assert naive_confidence([0.7, 0.2, 0.1]) == pytest.approx(0.7)

    def test_composition_with_probabilities(self) -> None:
        """Scoring m_1 with C=2 gives about 0.999665."""
        probs = class_probabilities([2.0, 0.0], protos(2))
        assert naive_confidence(probs) == pytest.approx(0.999665, abs=1e-6)

    def test_empty_raises(self) -> None:
        """An empty vector has no confidence."""
        with pytest.raises(ValidationException):
            naive_confidence([])

    def test_unnormalized_raises(self) -> None:
        """Vectors must sum to one."""
        with pytest.raises(ValidationException):
            naive_confidence([0.5, 0.6])


@pytest.mark.unit
@pytest.mark.fast
class TestMetricLoss:
    """Tests for the distance-based cross-entropy."""

    def test_origin_gives_log_c(self) -> None:
        """Equidistant embeddings cost log C."""
        for C in (2, 3, 6):
            assert metric_loss(np.zeros(C), 1, protos(C)) == pytest.approx(math.log(C))

    def test_at_own_prototype(self) -> None:
        """At m_Y with C=2 the loss is log(1+e^-8)."""
        assert metric_loss([2.0, 0.0], 1, protos(2)) == pytest.approx(3.354e-4, rel=1e-3)

    def test_at_wrong_prototype(self) -> None:
        """At another class's prototype with C=3 the loss is about 18."""
        assert metric_loss([0.0, 3.0, 0.0], 1, protos(3)) == pytest.approx(18.0, abs=1e-6)

    def test_non_negative(self) -> None:
        """The loss never goes negative."""
        rng = np.random.default_rng(2)
        for _ in range(100):
            C = int(rng.integers(2, 9))
            Y = int(rng.integers(1, C + 1))
            assert metric_loss(rng.normal(scale=3.0, size=C), Y, protos(C)) >= 0.0

    def test_monotone_towards_origin(self) -> None:
        """Moving from m_Y toward the origin never decreases the loss."""
        for C in (2, 3, 5):
            prototypes = protos(C)
            start = prototypes.vector(1)
            losses = [
                metric_loss((1.0 - t) * start, 1, prototypes) for t in np.linspace(0.0, 1.0, 101)
            ]
            assert all(b >= a - 1e-12 for a, b in zip(losses, losses[1:], strict=False))

    def test_invalid_class_raises(self) -> None:
        """Class indices are 1-based and bounded by C."""
        for Y in (0, 4):
            with pytest.raises(InvalidClassIndexError):
                metric_loss(np.zeros(3), Y, protos(3))


@pytest.mark.unit
@pytest.mark.fast
class TestLossGradient:
    """Tests for the analytic loss gradient."""

    def test_origin_two_classes(self) -> None:
        """At the origin with C=2 and Y=1 the gradient is m_2 - m_1."""
        assert loss_gradient([0.0, 0.0], 1, protos(2)) == pytest.approx([-2.0, 2.0])

    def test_small_at_own_prototype(self) -> None:
        """The gradient nearly vanishes at an attained prototype."""
        gradient = loss_gradient([0.0, 0.0, 0.0, 0.0, 5.0], 5, protos(5))
        assert np.linalg.norm(gradient) < 1e-9

    def test_matches_central_differences(self) -> None:
        """Analytic and finite-difference gradients agree on random draws."""
        rng = np.random.default_rng(5)
        step = 1e-5

        for _ in range(120):
            C = int(rng.integers(2, 9))
            Y = int(rng.integers(1, C + 1))
            prototypes = protos(C)
            e = rng.normal(scale=C / 2.0, size=C)

            numeric = np.zeros(C)
            for k in range(C):
                offset = np.zeros(C)
                offset[k] = step
                numeric[k] = (
                    metric_loss(e + offset, Y, prototypes) - metric_loss(e - offset, Y, prototypes)
                ) / (2.0 * step)

            analytic = loss_gradient(e, Y, prototypes)
            error = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1.0)
            assert error <= 1e-5


@pytest.mark.unit
@pytest.mark.fast
class TestEds:
    """Tests for the Euclidean distance sum."""

    def test_closed_forms(self) -> None:
        """EDS is C^3 at the origin and 2C^2(C-1) at a prototype."""
        for C in range(2, 11):
            prototypes = protos(C)
            at_origin = eds(np.zeros(C), prototypes)
            at_prototype = eds(prototypes.vector(1), prototypes)

            assert at_origin == float(C**3)
            assert at_prototype == float(2 * C**2 * (C - 1))
            if C >= 3:
                assert at_origin < at_prototype
            else:
                assert at_origin == at_prototype

    def test_dimension_mismatch_raises(self) -> None:
        """Embeddings must have dimension C."""
        with pytest.raises(DimensionMismatchError):
            eds([1.0], protos(2))
