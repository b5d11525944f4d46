"""
Unit tests for dimension-tagged physical quantities.
"""

import sys
from pathlib import Path

import pytest

# Adjust path to import from src
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from csltools.errors import IncompatibleDimensions, InvalidParameter
from csltools.units import (
    DALTON_KG,
    NUCLEON_MASS_KG,
    Dimension,
    PhysicalQuantity,
    rate,
    seconds,
)


class TestConversions:
    """Tests for boundary unit conversions."""

    def test_centimetres(self):
        assert PhysicalQuantity.of(1e-5, "cm").to("m") == pytest.approx(1e-7)

    def test_daltons(self):
        mass = PhysicalQuantity.of(720.0, "Da")
        assert mass.dimension is Dimension.MASS
        assert mass.to("kg") == pytest.approx(720.0 * DALTON_KG)

    def test_nucleon_is_about_one_dalton(self):
        assert NUCLEON_MASS_KG / DALTON_KG == pytest.approx(1.00728, rel=1e-5)

    def test_milliseconds(self):
        assert PhysicalQuantity.of(10.0, "ms").to("s") == pytest.approx(0.01)

    def test_unknown_unit(self):
        with pytest.raises(InvalidParameter):
            PhysicalQuantity.of(1.0, "furlong")

    def test_incompatible_target(self):
        with pytest.raises(IncompatibleDimensions):
            seconds(1.0).to("kg")

    def test_non_finite(self):
        with pytest.raises(InvalidParameter):
            rate(float("nan"))


class TestArithmetic:
    """Tests for dimension rules in arithmetic."""

    def test_rate_times_time_is_dimensionless(self):
        product = rate(1e-17) * seconds(1e7)
        assert product.dimension is Dimension.DIMENSIONLESS
        assert product.value == pytest.approx(1e-10)

    def test_product_commutes(self):
        assert (seconds(2.0) * rate(3.0)).dimension is Dimension.DIMENSIONLESS

    def test_inverse_time_is_rate(self):
        assert (1.0 / seconds(1e-7)).dimension is Dimension.RATE

    def test_ratio_of_rates(self):
        ratio = rate(1e-17) / rate(2e-18)
        assert ratio.dimension is Dimension.DIMENSIONLESS
        assert ratio.value == pytest.approx(5.0)

    def test_add_same_dimension(self):
        assert (rate(1.0) + rate(2.0)).value == 3.0

    def test_add_rate_and_time(self):
        with pytest.raises(IncompatibleDimensions):
            rate(1.0) + seconds(1.0)

    def test_subtract_mass_and_length(self):
        with pytest.raises(IncompatibleDimensions):
            PhysicalQuantity.of(1.0, "kg") - PhysicalQuantity.of(1.0, "m")

    def test_compare_incompatible(self):
        with pytest.raises(IncompatibleDimensions):
            rate(1.0) < seconds(1.0)

    def test_compare_compatible(self):
        assert rate(1.0) < rate(2.0)
        assert rate(2.0) <= rate(2.0)

    def test_unmodelled_product(self):
        with pytest.raises(IncompatibleDimensions):
            PhysicalQuantity.of(1.0, "kg") * PhysicalQuantity.of(1.0, "m")

    def test_scalar_scaling(self):
        assert (2.0 * seconds(3.0)).value == 6.0
        assert (seconds(3.0) / 3.0).dimension is Dimension.TIME

    def test_add_plain_number(self):
        with pytest.raises(IncompatibleDimensions):
            rate(1.0) + 1.0

    def test_str(self):
        assert str(rate(2e-18)) == "2e-18 s^-1"
