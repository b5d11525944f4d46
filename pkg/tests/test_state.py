"""
Unit tests for state vectors and diagonal observables.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Adjust path to import from src
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from csltools.errors import DimensionMismatch, InvalidParameter, NotNormalized, ZeroNorm
from csltools.state import (
    DiagonalObservable,
    StateVector,
    expectation,
    normalize,
    probabilities,
    two_level_state,
    variance,
)


class TestStateVector:
    """Tests for StateVector construction."""

    def test_default_labels(self):
        """Labels should default to 0..d-1."""
        state = StateVector([1.0, 0.0, 0.0])
        assert state.labels == (0, 1, 2)
        assert state.dim == 3

    def test_custom_labels(self):
        state = StateVector([1.0, 0.0], labels=("here", "there"))
        assert state.labels == ("here", "there")

    def test_label_count_must_match(self):
        with pytest.raises(DimensionMismatch):
            StateVector([1.0, 0.0], labels=("only",))

    def test_empty_state_rejected(self):
        with pytest.raises(DimensionMismatch):
            StateVector([])

    def test_amplitudes_are_read_only(self):
        """States are immutable values."""
        state = StateVector([1.0, 0.0])
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.5

    def test_input_array_not_aliased(self):
        raw = np.array([1.0, 0.0], dtype=complex)
        state = StateVector(raw)
        raw[0] = 0.0
        assert state.amplitudes[0] == 1.0

    def test_two_level_state(self):
        state = two_level_state(0.3)
        np.testing.assert_allclose(probabilities(state), [0.7, 0.3], atol=1e-15)

    def test_two_level_state_rejects_bad_probability(self):
        with pytest.raises(InvalidParameter):
            two_level_state(1.5)


class TestNormalize:
    """Tests for normalize()."""

    def test_positive_rescale(self):
        state = normalize(StateVector([2.0, 0.0]))
        np.testing.assert_allclose(state.amplitudes, [1.0, 0.0])

    def test_unit_state_unchanged(self):
        amplitudes = [1 / np.sqrt(2), 1 / np.sqrt(2)]
        state = normalize(StateVector(amplitudes))
        np.testing.assert_allclose(state.amplitudes, amplitudes, atol=1e-15)

    def test_complex_three_four_five(self):
        state = normalize(StateVector([3.0, 4.0j]))
        np.testing.assert_allclose(state.amplitudes, [0.6, 0.8j], atol=1e-15)

    def test_zero_norm(self):
        with pytest.raises(ZeroNorm):
            normalize(StateVector([0.0, 0.0]))

    def test_input_untouched(self):
        original = StateVector([2.0, 0.0])
        normalize(original)
        assert original.amplitudes[0] == 2.0

    def test_labels_preserved(self):
        state = normalize(StateVector([0.0, 5.0], labels=("a", "b")))
        assert state.labels == ("a", "b")

    @pytest.mark.parametrize("seed", range(5))
    def test_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        raw = StateVector(3.0 * (rng.standard_normal(4) + 1j * rng.standard_normal(4)))
        once = normalize(raw)
        np.testing.assert_allclose(normalize(once).amplitudes, once.amplitudes, rtol=0, atol=1e-15)


class TestProbabilities:
    """Tests for probabilities()."""

    def test_complex_amplitudes(self):
        state = StateVector([np.sqrt(0.3), 1j * np.sqrt(0.7)])
        np.testing.assert_allclose(probabilities(state), [0.3, 0.7], atol=1e-15)

    def test_basis_state(self):
        np.testing.assert_array_equal(probabilities(StateVector([1.0, 0.0])), [1.0, 0.0])

    def test_three_four_five(self):
        state = StateVector([0.6, 0.8j])
        np.testing.assert_allclose(probabilities(state), [0.36, 0.64], atol=1e-15)

    def test_sum_to_one(self):
        rng = np.random.default_rng(7)
        raw = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        p = probabilities(normalize(StateVector(raw)))
        assert abs(p.sum() - 1.0) < 1e-12
        assert np.all(p >= 0)

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            probabilities(StateVector([1.0, 1.0]))

    @pytest.mark.parametrize("phi", [0.0, 0.7, np.pi / 2, 2.5, -1.3])
    def test_global_phase_invariant(self, phi):
        rng = np.random.default_rng(11)
        state = normalize(StateVector(rng.standard_normal(3) + 1j * rng.standard_normal(3)))
        rotated = state.with_amplitudes(np.exp(1j * phi) * state.amplitudes)
        np.testing.assert_allclose(probabilities(rotated), probabilities(state), rtol=0, atol=1e-15)


class TestObservable:
    """Tests for expectation() and variance()."""

    def test_eigenstate(self, two_level_m):
        state = StateVector([1.0, 0.0])
        assert expectation(two_level_m, state) == 0.0
        assert variance(two_level_m, state) == 0.0

    def test_even_superposition(self, two_level_m):
        state = two_level_state(0.5)
        assert expectation(two_level_m, state) == pytest.approx(0.5)
        assert variance(two_level_m, state) == pytest.approx(0.25)

    def test_shifted_eigenvalues(self):
        M = DiagonalObservable([2.0, 5.0])
        state = StateVector([np.sqrt(0.3), np.sqrt(0.7)])
        assert expectation(M, state) == pytest.approx(4.1)

    def test_bernoulli_variance(self, two_level_m):
        state = StateVector([np.sqrt(0.3), np.sqrt(0.7)])
        assert variance(two_level_m, state) == pytest.approx(0.21)

    def test_degenerate_support_has_zero_variance(self):
        """Support within one eigenvalue gives exactly zero."""
        M = DiagonalObservable([3.0, 3.0, 7.0])
        state = StateVector([np.sqrt(0.5), np.sqrt(0.5), 0.0])
        assert variance(M, state) == 0.0

    def test_dimension_mismatch(self, two_level_m):
        with pytest.raises(DimensionMismatch):
            expectation(two_level_m, StateVector([1.0, 0.0, 0.0]))

    def test_non_finite_eigenvalue(self):
        with pytest.raises(InvalidParameter):
            DiagonalObservable([0.0, np.inf])

    def test_spread_squared(self):
        assert DiagonalObservable([1.0, 4.0, 2.0]).spread_squared() == 9.0
