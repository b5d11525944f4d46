"""
Tests for the noise-averaged master equation.
"""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

# Adjust path to import from src
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from csltools.density import DensityMatrix, evolve_density
from csltools.dynamics import CslParams
from csltools.errors import DimensionMismatch, InvalidDensityMatrix, InvalidParameter
from csltools.noise import Cutoff
from csltools.state import DiagonalObservable, StateVector, two_level_state

HALF_COHERENT = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)


class TestDensityMatrix:
    """Tests for DensityMatrix values."""

    def test_from_state(self):
        rho = DensityMatrix.from_state(StateVector([0.6, 0.8j]))
        np.testing.assert_allclose(rho.populations(), [0.36, 0.64])
        assert rho.coherence(0, 1) == pytest.approx(-0.48j)
        assert rho.purity() == pytest.approx(1.0)

    def test_validate_accepts_pure_state(self):
        DensityMatrix.from_state(two_level_state(0.3)).validate()

    def test_validate_rejects_trace(self):
        with pytest.raises(InvalidDensityMatrix):
            DensityMatrix(np.eye(2)).validate()

    def test_validate_rejects_non_hermitian(self):
        with pytest.raises(InvalidDensityMatrix):
            DensityMatrix([[0.5, 0.1], [0.0, 0.5]]).validate()

    def test_validate_rejects_negative_population(self):
        with pytest.raises(InvalidDensityMatrix):
            DensityMatrix([[1.5, 0.0], [0.0, -0.5]]).validate()

    def test_rejects_non_square(self):
        with pytest.raises(InvalidDensityMatrix):
            DensityMatrix(np.zeros((2, 3)))

    def test_mix(self):
        a = DensityMatrix([[1.0, 0.0], [0.0, 0.0]])
        b = DensityMatrix([[0.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(a.mix(b, 0.25).populations(), [0.25, 0.75])

    def test_mix_weight_range(self):
        a = DensityMatrix(HALF_COHERENT)
        with pytest.raises(InvalidParameter):
            a.mix(a, 1.5)


class TestEvolveDensity:
    """Tests for evolve_density()."""

    def test_unitary_evolution(self, sigma_x, two_level_m):
        rho = DensityMatrix.from_state(two_level_state(0.3))
        t = 1.0
        evolved = evolve_density(rho, sigma_x, two_level_m, CslParams(0.0, 0.01), t)
        U = expm(-1j * sigma_x * t)
        expected = U @ rho.matrix @ U.conj().T
        np.testing.assert_allclose(evolved.matrix, expected, atol=1e-8)

    def test_two_level_coherence_decay(self, two_level_m):
        rho = DensityMatrix(HALF_COHERENT)
        evolved = evolve_density(rho, None, two_level_m, CslParams(1.0, 0.01), 2.0)
        assert evolved.coherence(0, 1).real == pytest.approx(0.5 * np.exp(-1.0), rel=1e-8)
        assert evolved.coherence(0, 1).real == pytest.approx(0.1839, abs=1e-4)

    def test_populations_untouched(self, two_level_m):
        rho = DensityMatrix.from_state(two_level_state(0.7))
        for t in (0.5, 3.0, 20.0):
            evolved = evolve_density(rho, None, two_level_m, CslParams(1.0, 0.01), t)
            np.testing.assert_allclose(evolved.populations(), [0.3, 0.7], atol=1e-15)

    def test_decay_rate_matches_eigenvalue_gap(self):
        M = DiagonalObservable([0.0, 1.0, 3.0])
        rho = DensityMatrix(np.full((3, 3), 1.0 / 3.0))
        evolved = evolve_density(rho, None, M, CslParams(0.5, 0.01), 1.0)
        # rate (lam/2)(M_0 - M_2)^2 = 2.25
        assert evolved.coherence(0, 2).real == pytest.approx(np.exp(-2.25) / 3.0, rel=1e-7)

    @pytest.mark.parametrize("weight", [0.0, 0.25, 0.5, 1.0])
    def test_linearity(self, sigma_x, two_level_m, weight):
        """Evolving a mixture equals mixing the evolved states."""
        rho1 = DensityMatrix.from_state(two_level_state(0.3))
        rho2 = DensityMatrix.from_state(StateVector([1 / np.sqrt(2), 1j / np.sqrt(2)]))
        params = CslParams(0.8, 0.01)
        H = 0.7 * sigma_x
        mixed_first = evolve_density(rho1.mix(rho2, weight), H, two_level_m, params, 1.5)
        evolved_first = evolve_density(rho1, H, two_level_m, params, 1.5).mix(
            evolve_density(rho2, H, two_level_m, params, 1.5), weight,
        )
        assert np.max(np.abs(mixed_first.matrix - evolved_first.matrix)) < 1e-8

    def test_trace_and_hermiticity_preserved(self, sigma_x, two_level_m):
        rho = DensityMatrix.from_state(two_level_state(0.2))
        evolved = evolve_density(rho, 0.3 * sigma_x, two_level_m, CslParams(2.0, 0.01), 3.0)
        evolved.validate(tolerance=1e-10)

    def test_zero_time(self, two_level_m):
        rho = DensityMatrix(HALF_COHERENT)
        assert evolve_density(rho, None, two_level_m, CslParams(1.0, 0.01), 0.0) is rho

    def test_negative_time(self, two_level_m):
        with pytest.raises(InvalidParameter):
            evolve_density(DensityMatrix(HALF_COHERENT), None, two_level_m, CslParams(1.0, 0.01), -1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            evolve_density(
                DensityMatrix(HALF_COHERENT), None, DiagonalObservable([0.0, 1.0, 2.0]),
                CslParams(1.0, 0.01), 1.0,
            )

    def test_cutoff_uses_white_equation(self, two_level_m, caplog):
        params = CslParams(1.0, 0.01, spectrum=Cutoff(5.0))
        with caplog.at_level(logging.INFO, logger="csltools.density"):
            evolved = evolve_density(DensityMatrix(HALF_COHERENT), None, two_level_m, params, 2.0)
        assert "white-noise master equation" in caplog.text
        assert evolved.coherence(0, 1).real == pytest.approx(0.5 * np.exp(-1.0), rel=1e-8)
