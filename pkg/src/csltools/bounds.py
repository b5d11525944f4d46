"""
Phenomenological bounds on the collapse rate lambda.

Lower bounds come from requiring that a measuring pointer reaches a definite
outcome quickly; upper bounds come from experiments and cosmological data
(the reference table) and from the diffraction of large molecules. All
comparisons are at the level of orders of magnitude, with r_C = 1e-5 cm.

Two calibrations are design decisions rather than measured inputs: the
amplification law (effective dM^2 = nucleons per r_C cell * total nucleons)
and the molecular coherence time of 10 ms used for diffraction bounds.
"""

import csv
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import List, Optional

from .dynamics import DEFAULT_R_C_CM
from .errors import InvalidParameter, NonPositiveInput
from .noise import Cutoff, Spectrum, White
from .units import BOLTZMANN, HBAR, Dimension, PhysicalQuantity, rate, seconds

CONVENTIONAL_EXPONENT = -17
CONVENTIONAL_LAMBDA = 1e-17
ENHANCEMENT_ORDERS = 8
ENHANCEMENT_FACTOR = 1e8
HUBBLE_RATE = 2e-18
DIFFRACTION_COHERENCE_TIME = 10e-3
FULLERENE_MASS_DA = 720.0
XRAY_CUTOFF_FREQUENCY = 1e18
SOLID_NUCLEON_DENSITY_CM3 = 1e24
COMPATIBLE_RATIO_RANGE = (0.1, 100.0)
TABLE_RESOURCE = "bounds_table.csv"
EQUALITY_TOLERANCE = 1e-9


class BoundKind(Enum):
    LABORATORY = "Laboratory"
    COSMOLOGICAL = "Cosmological"


class Compatibility(Enum):
    COMPATIBLE = "Compatible"
    STRAINED = "Strained"


@dataclass(frozen=True)
class ExperimentBound:
    """An upper bound on lambda, as orders of magnitude above the conventional value."""
    name: str
    kind: BoundKind
    orders_above_conventional: int

    @property
    def lambda_max(self) -> float:
        # parse the decimal literal so the value is the exact power of ten
        return float(f"1e{CONVENTIONAL_EXPONENT + self.orders_above_conventional}")

    @property
    def distance_from_enhanced(self) -> int:
        return self.orders_above_conventional - ENHANCEMENT_ORDERS

    @property
    def is_xray(self) -> bool:
        return "X-ray" in self.name

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "distance": self.orders_above_conventional,
            "lambda_max": self.lambda_max,
            "distance_from_enhanced": self.distance_from_enhanced,
        }


@dataclass(frozen=True)
class PointerSpec:
    """
    A rigid measuring pointer.

    Attributes:
        n_total: Nucleons displaced by the pointer
        n_per_cell: Nucleons within one r_C correlation cell
        t_required: Time within which the outcome must be definite (s)
    """
    n_total: float
    n_per_cell: float
    t_required: float

    def __post_init__(self):
        for name in ("n_total", "n_per_cell", "t_required"):
            if not getattr(self, name) > 0:
                raise NonPositiveInput(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class CosmologyReport:
    lam: float
    ratio: float
    verdict: Compatibility

    def to_record(self) -> dict:
        return {"lambda": self.lam, "ratio_to_hubble": self.ratio, "verdict": self.verdict.value}


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise NonPositiveInput(f"{name} must be positive, got {value}")


def nucleons_per_cell(r_c_cm: float, density_per_cm3: float = SOLID_NUCLEON_DENSITY_CM3) -> float:
    """Nucleons in a cube of side r_C at the given number density."""
    _positive(r_c_cm=r_c_cm, density_per_cm3=density_per_cm3)
    return density_per_cm3 * r_c_cm ** 3


REFERENCE_POINTER = PointerSpec(
    n_total=1e15, n_per_cell=nucleons_per_cell(DEFAULT_R_C_CM), t_required=1e-7,
)


def amplification_factor(spec: PointerSpec) -> float:
    """Effective squared mass-density spread n_per_cell * n_total of a displaced pointer."""
    return spec.n_per_cell * spec.n_total


def lambda_lower_bound_pointer(spec: PointerSpec) -> float:
    """Smallest lambda collapsing the pointer within t_required: 1/(n N t)."""
    amplified = PhysicalQuantity(amplification_factor(spec), Dimension.DIMENSIONLESS)
    return (1.0 / (amplified * seconds(spec.t_required))).to("s^-1")


def enhanced_lambda(base: float) -> float:
    """Lower bound raised by the latent-image requirement, a factor 1e8."""
    _positive(base=base)
    return base * ENHANCEMENT_FACTOR


def diffraction_lambda_bound(mass_da: float, coherence_time: float = DIFFRACTION_COHERENCE_TIME) -> float:
    """
    Upper bound on lambda from interference of a molecule of given mass.

    A molecule smaller than r_C with N nucleons decoheres at lam N^2; seeing
    fringes after coherence_time bounds lam by 1/(N^2 t).

    Args:
        mass_da: Molecular mass in Daltons (>= 1), used as the nucleon count
        coherence_time: Time in superposition (s)

    Returns:
        Bound in s^-1
    """
    _positive(coherence_time=coherence_time)
    if not mass_da >= 1.0:
        raise NonPositiveInput(f"Molecular mass must be at least 1 Da, got {mass_da}")
    return 1.0 / (mass_da * mass_da * coherence_time)


def mass_to_confront(lambda_target: float, coherence_time: float = DIFFRACTION_COHERENCE_TIME) -> float:
    """Molecular mass (Da) whose diffraction bound equals lambda_target."""
    _positive(lambda_target=lambda_target, coherence_time=coherence_time)
    return 1.0 / math.sqrt(lambda_target * coherence_time)


def size_factor_to_confront(
    lambda_target: float,
    coherence_time: float = DIFFRACTION_COHERENCE_TIME,
    reference_mass_da: float = FULLERENE_MASS_DA,
) -> float:
    """How many times heavier than the reference molecule a confronting molecule must be."""
    _positive(reference_mass_da=reference_mass_da)
    return mass_to_confront(lambda_target, coherence_time) / reference_mass_da


def heating_rate_per_particle(lam: float, mass_kg: float, r_c_m: float) -> float:
    """
    Mean energy gain of a free particle from the noise, 3 lam hbar^2 / (4 m r_C^2), in W.

    Taken from the standard collapse literature; the bound table itself does
    not depend on it.
    """
    _positive(lam=lam, mass_kg=mass_kg, r_c_m=r_c_m)
    return 3.0 * lam * HBAR ** 2 / (4.0 * mass_kg * r_c_m ** 2)


def heating_temperature_rate(lam: float, mass_kg: float, r_c_m: float) -> float:
    """Temperature drift (K/s) of a monatomic gas heated at heating_rate_per_particle."""
    return 2.0 * heating_rate_per_particle(lam, mass_kg, r_c_m) / (3.0 * BOLTZMANN)


def _parse_kind(raw: str) -> BoundKind:
    try:
        return BoundKind(raw)
    except ValueError:
        raise InvalidParameter(f"Unknown bound kind in reference table: {raw}") from None


def bounds_table() -> List[ExperimentBound]:
    """
    Reference upper bounds on lambda, in table order.

    Read from the versioned data file shipped with the package.
    """
    text = resources.files("csltools").joinpath("data", TABLE_RESOURCE).read_text(encoding="utf-8")
    rows = csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))
    return [
        ExperimentBound(
            name=row["name"],
            kind=_parse_kind(row["kind"]),
            orders_above_conventional=int(row["distance"]),
        )
        for row in rows
    ]


def cosmology_consistency(lam: float) -> CosmologyReport:
    """
    Compare lambda with the Hubble rate.

    A ratio within [0.1, 100] is compatible with a cosmological origin of the
    noise field.
    """
    _positive(lam=lam)
    ratio = (rate(lam) / rate(HUBBLE_RATE)).value
    low, high = COMPATIBLE_RATIO_RANGE
    verdict = Compatibility.COMPATIBLE if low <= ratio <= high else Compatibility.STRAINED
    return CosmologyReport(lam=lam, ratio=ratio, verdict=verdict)


def xray_bound_applies(spectrum: Spectrum) -> bool:
    """The spontaneous X-ray bound needs noise power up to ~1e18 s^-1."""
    if isinstance(spectrum, White):
        return True
    if isinstance(spectrum, Cutoff):
        return spectrum.omega_max >= XRAY_CUTOFF_FREQUENCY
    raise InvalidParameter(f"Unknown spectrum {spectrum!r}")


def excluded_by(lam: float, spectrum: Optional[Spectrum] = None) -> List[ExperimentBound]:
    """Table entries whose upper bound lies below lam (an equal bound does not exclude)."""
    _positive(lam=lam)
    spectrum = spectrum if spectrum is not None else White()
    skip_xray = not xray_bound_applies(spectrum)
    return [
        bound for bound in bounds_table()
        if bound.lambda_max * (1.0 + EQUALITY_TOLERANCE) < lam
        and not (skip_xray and bound.is_xray)
    ]


def most_stringent(kind: BoundKind) -> ExperimentBound:
    return min((b for b in bounds_table() if b.kind is kind), key=lambda b: b.orders_above_conventional)


def least_stringent(kind: BoundKind) -> ExperimentBound:
    return max((b for b in bounds_table() if b.kind is kind), key=lambda b: b.orders_above_conventional)
