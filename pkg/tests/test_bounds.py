"""
Tests for the phenomenological bounds on lambda.

Order-of-magnitude figures are asserted on log10 values within one order;
table distances are asserted exactly.
"""

import dataclasses
import math
import sys
from pathlib import Path

import pytest

# Adjust path to import from src
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from csltools.bounds import (
    CONVENTIONAL_LAMBDA,
    REFERENCE_POINTER,
    BoundKind,
    Compatibility,
    PointerSpec,
    amplification_factor,
    bounds_table,
    cosmology_consistency,
    diffraction_lambda_bound,
    enhanced_lambda,
    excluded_by,
    heating_rate_per_particle,
    heating_temperature_rate,
    lambda_lower_bound_pointer,
    least_stringent,
    mass_to_confront,
    most_stringent,
    nucleons_per_cell,
    size_factor_to_confront,
    xray_bound_applies,
)
from csltools.errors import NonPositiveInput
from csltools.noise import Cutoff, White
from csltools.units import NUCLEON_MASS_KG

EXPECTED_TABLE = [
    ("Fullerene diffraction experiments", BoundKind.LABORATORY, 13),
    ("Decay of supercurrents (SQUIDs)", BoundKind.LABORATORY, 14),
    ("Spontaneous X-ray emission from Ge", BoundKind.LABORATORY, 6),
    ("Proton decay", BoundKind.LABORATORY, 18),
    ("Mirror cantilever interferometric experiment", BoundKind.LABORATORY, 9),
    ("Dissociation of cosmic hydrogen", BoundKind.COSMOLOGICAL, 17),
    ("Heating of intergalactic medium (IGM)", BoundKind.COSMOLOGICAL, 8),
    ("Heating of interstellar dust grains", BoundKind.COSMOLOGICAL, 15),
]


def by_name(fragment):
    return next(b for b in bounds_table() if fragment in b.name)


class TestPointer:
    """Lower bounds from a measuring pointer."""

    def test_amplification_single_nucleon(self):
        assert amplification_factor(PointerSpec(1, 1, 1.0)) == 1

    def test_amplification_pointer(self):
        assert amplification_factor(REFERENCE_POINTER) == pytest.approx(1e24)

    def test_amplification_linear_in_total(self):
        doubled = dataclasses.replace(REFERENCE_POINTER, n_total=2 * REFERENCE_POINTER.n_total)
        assert amplification_factor(doubled) == 2 * amplification_factor(REFERENCE_POINTER)

    def test_nucleons_per_cell(self):
        assert nucleons_per_cell(1e-5) == pytest.approx(1e9)

    def test_reference_pointer_cell_count(self):
        """The reference pointer packs solid density into an r_C = 1e-5 cm cell."""
        assert REFERENCE_POINTER.n_per_cell == nucleons_per_cell(1e-5)

    def test_lower_bound(self):
        bound = lambda_lower_bound_pointer(REFERENCE_POINTER)
        assert bound == pytest.approx(1e-17, rel=1e-12)
        assert math.log10(bound) == pytest.approx(-17.0, abs=1e-12)

    def test_lower_bound_inverse_in_time(self):
        slower = PointerSpec(1e15, 1e9, 1e-6)
        assert lambda_lower_bound_pointer(slower) == pytest.approx(
            lambda_lower_bound_pointer(REFERENCE_POINTER) / 10.0
        )

    def test_lower_bound_millisecond(self):
        assert lambda_lower_bound_pointer(PointerSpec(1e15, 1e9, 1e-3)) == pytest.approx(1e-21)

    def test_rejects_non_positive(self):
        with pytest.raises(NonPositiveInput):
            PointerSpec(1e15, 0.0, 1e-7)

    def test_enhanced(self):
        assert enhanced_lambda(1e-17) == pytest.approx(1e-9)
        assert enhanced_lambda(1.0) == 1e8


class TestDiffraction:
    """Upper bounds from molecular interference."""

    def test_fullerene(self):
        bound = diffraction_lambda_bound(720.0, 10e-3)
        assert bound == pytest.approx(1.929e-4, rel=1e-3)
        assert round(math.log10(bound / CONVENTIONAL_LAMBDA)) == 13

    def test_unit_case(self):
        assert diffraction_lambda_bound(1.0, 1.0) == 1.0

    def test_inverse_square_exact(self):
        assert diffraction_lambda_bound(2 * 720.0) == diffraction_lambda_bound(720.0) / 4

    def test_inverse_square_general(self):
        assert diffraction_lambda_bound(3 * 500.0) == pytest.approx(
            diffraction_lambda_bound(500.0) / 9, rel=1e-14
        )

    def test_rejects_sub_dalton(self):
        with pytest.raises(NonPositiveInput):
            diffraction_lambda_bound(0.5)

    def test_confront_conventional(self):
        assert math.log10(mass_to_confront(1e-17, 10e-3)) == pytest.approx(9.0, abs=1.0)

    def test_confront_enhanced(self):
        assert math.log10(mass_to_confront(1e-9, 10e-3)) == pytest.approx(5.0, abs=1.0)

    def test_confront_inverts_bound(self):
        mass = mass_to_confront(1e-12)
        assert diffraction_lambda_bound(mass) == pytest.approx(1e-12)

    def test_size_factor(self):
        assert math.log10(size_factor_to_confront(CONVENTIONAL_LAMBDA)) == pytest.approx(6.0, abs=1.0)
        assert math.log10(size_factor_to_confront(enhanced_lambda(CONVENTIONAL_LAMBDA))) == pytest.approx(2.0, abs=1.0)


class TestHeating:
    """Spontaneous heating of free particles."""

    def test_nucleon_rate(self):
        assert heating_rate_per_particle(1e-17, NUCLEON_MASS_KG, 1e-7) == pytest.approx(5e-45, rel=0.02)

    def test_linear_in_lambda(self):
        base = heating_rate_per_particle(1e-17, NUCLEON_MASS_KG, 1e-7)
        assert heating_rate_per_particle(2e-17, NUCLEON_MASS_KG, 1e-7) == pytest.approx(2 * base)

    def test_inverse_square_in_r_c(self):
        base = heating_rate_per_particle(1e-17, NUCLEON_MASS_KG, 1e-7)
        assert heating_rate_per_particle(1e-17, NUCLEON_MASS_KG, 1e-6) == pytest.approx(base / 100)

    def test_temperature_rate(self):
        power = heating_rate_per_particle(1e-17, NUCLEON_MASS_KG, 1e-7)
        drift = heating_temperature_rate(1e-17, NUCLEON_MASS_KG, 1e-7)
        assert drift == pytest.approx(2.0 * power / (3.0 * 1.380649e-23))

    def test_rejects_zero_mass(self):
        with pytest.raises(NonPositiveInput):
            heating_rate_per_particle(1e-17, 0.0, 1e-7)


class TestBoundsTable:
    """Regression of the reference table."""

    def test_rows(self):
        rows = [(b.name, b.kind, b.orders_above_conventional) for b in bounds_table()]
        assert rows == EXPECTED_TABLE

    def test_lambda_max_exact_powers(self):
        for bound in bounds_table():
            assert bound.lambda_max == float(f"1e{bound.orders_above_conventional - 17}")

    def test_xray(self):
        xray = by_name("X-ray")
        assert xray.lambda_max == 1e-11
        assert xray.distance_from_enhanced == -2
        assert xray.is_xray

    def test_proton_decay(self):
        assert by_name("Proton").lambda_max == 1e1

    def test_igm(self):
        igm = by_name("IGM")
        assert igm.lambda_max == 1e-9
        assert igm.distance_from_enhanced == 0

    def test_ordering(self):
        assert most_stringent(BoundKind.LABORATORY).name == "Spontaneous X-ray emission from Ge"
        assert least_stringent(BoundKind.LABORATORY).name == "Proton decay"

    def test_conventional_not_excluded(self):
        lower = lambda_lower_bound_pointer(REFERENCE_POINTER)
        assert all(lower < bound.lambda_max for bound in bounds_table())

    def test_enhanced_excluded_by_xray_only(self):
        enhanced = enhanced_lambda(CONVENTIONAL_LAMBDA)
        assert enhanced > by_name("X-ray").lambda_max
        assert [b.name for b in excluded_by(enhanced)] == ["Spontaneous X-ray emission from Ge"]

    def test_cutoff_lifts_xray_bound(self):
        enhanced = enhanced_lambda(CONVENTIONAL_LAMBDA)
        assert excluded_by(enhanced, Cutoff(1e17)) == []

    def test_high_cutoff_keeps_xray_bound(self):
        assert xray_bound_applies(Cutoff(1e19))
        assert xray_bound_applies(White())
        assert not xray_bound_applies(Cutoff(1e17))

    def test_record(self):
        record = by_name("Fullerene").to_record()
        assert record["kind"] == "Laboratory"
        assert record["distance"] == 13
        assert record["lambda_max"] == 1e-4


class TestCosmology:
    """Comparison of lambda with the Hubble rate."""

    def test_conventional(self):
        report = cosmology_consistency(1e-17)
        assert report.ratio == pytest.approx(5.0)
        assert report.verdict is Compatibility.COMPATIBLE

    def test_enhanced(self):
        report = cosmology_consistency(1e-9)
        assert report.ratio == pytest.approx(5e8)
        assert report.verdict is Compatibility.STRAINED

    def test_equality(self):
        report = cosmology_consistency(2e-18)
        assert report.ratio == 1.0
        assert report.verdict is Compatibility.COMPATIBLE
