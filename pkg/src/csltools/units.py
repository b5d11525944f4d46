"""
Physical quantities with a dimension tag.

Only the handful of dimensions the collapse phenomenology needs are
modelled. Arithmetic between incompatible dimensions raises
IncompatibleDimensions instead of silently producing a number.

Values are stored in SI units; Daltons and centimetres are accepted at the
boundary through CONVERSIONS.
"""

import math
from dataclasses import dataclass
from enum import Enum

from scipy import constants

from .errors import IncompatibleDimensions, InvalidParameter


class Dimension(Enum):
    """Dimension of a physical quantity."""
    DIMENSIONLESS = "1"
    RATE = "s^-1"
    TIME = "s"
    LENGTH = "m"
    MASS = "kg"
    NUCLEON_COUNT = "nucleons"
    POWER = "W"


DALTON_KG = constants.physical_constants["atomic mass constant"][0]
NUCLEON_MASS_KG = constants.m_p
HBAR = constants.hbar
BOLTZMANN = constants.k

# exact factors from boundary units to SI
CONVERSIONS = {
    "s": (Dimension.TIME, 1.0),
    "ms": (Dimension.TIME, constants.milli),
    "s^-1": (Dimension.RATE, 1.0),
    "m": (Dimension.LENGTH, 1.0),
    "cm": (Dimension.LENGTH, constants.centi),
    "kg": (Dimension.MASS, 1.0),
    "Da": (Dimension.MASS, DALTON_KG),
    "nucleons": (Dimension.NUCLEON_COUNT, 1.0),
    "W": (Dimension.POWER, 1.0),
    "1": (Dimension.DIMENSIONLESS, 1.0),
}

_PRODUCTS = {
    frozenset([Dimension.RATE, Dimension.TIME]): Dimension.DIMENSIONLESS,
}

_QUOTIENTS = {
    (Dimension.DIMENSIONLESS, Dimension.TIME): Dimension.RATE,
    (Dimension.DIMENSIONLESS, Dimension.RATE): Dimension.TIME,
}


@dataclass(frozen=True)
class PhysicalQuantity:
    value: float
    dimension: Dimension

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise InvalidParameter(f"Quantity value must be finite, got {self.value}")

    @classmethod
    def of(cls, value: float, unit: str) -> "PhysicalQuantity":
        """Build a quantity from a value in one of the CONVERSIONS units."""
        try:
            dimension, factor = CONVERSIONS[unit]
        except KeyError:
            raise InvalidParameter(f"Unknown unit: {unit}") from None
        return cls(value * factor, dimension)

    def to(self, unit: str) -> float:
        """Value expressed in a compatible unit."""
        dimension, factor = CONVERSIONS[unit]
        if dimension is not self.dimension:
            raise IncompatibleDimensions(
                f"Cannot express {self.dimension.value} in {unit}"
            )
        return self.value / factor

    def _same(self, other: "PhysicalQuantity", op: str) -> None:
        if not isinstance(other, PhysicalQuantity):
            raise IncompatibleDimensions(f"Cannot {op} a quantity and {type(other).__name__}")
        if other.dimension is not self.dimension:
            raise IncompatibleDimensions(
                f"Cannot {op} {self.dimension.value} and {other.dimension.value}"
            )

    def __add__(self, other: "PhysicalQuantity") -> "PhysicalQuantity":
        self._same(other, "add")
        return PhysicalQuantity(self.value + other.value, self.dimension)

    def __sub__(self, other: "PhysicalQuantity") -> "PhysicalQuantity":
        self._same(other, "subtract")
        return PhysicalQuantity(self.value - other.value, self.dimension)

    def __lt__(self, other: "PhysicalQuantity") -> bool:
        self._same(other, "compare")
        return self.value < other.value

    def __le__(self, other: "PhysicalQuantity") -> bool:
        self._same(other, "compare")
        return self.value <= other.value

    def __mul__(self, other) -> "PhysicalQuantity":
        if isinstance(other, (int, float)):
            return PhysicalQuantity(self.value * other, self.dimension)
        if not isinstance(other, PhysicalQuantity):
            return NotImplemented
        if self.dimension is Dimension.DIMENSIONLESS:
            return PhysicalQuantity(self.value * other.value, other.dimension)
        if other.dimension is Dimension.DIMENSIONLESS:
            return PhysicalQuantity(self.value * other.value, self.dimension)
        result = _PRODUCTS.get(frozenset([self.dimension, other.dimension]))
        if result is None:
            raise IncompatibleDimensions(
                f"No modelled dimension for {self.dimension.value} * {other.dimension.value}"
            )
        return PhysicalQuantity(self.value * other.value, result)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "PhysicalQuantity":
        if isinstance(other, (int, float)):
            return PhysicalQuantity(self.value / other, self.dimension)
        if not isinstance(other, PhysicalQuantity):
            return NotImplemented
        if other.dimension is self.dimension:
            return PhysicalQuantity(self.value / other.value, Dimension.DIMENSIONLESS)
        if other.dimension is Dimension.DIMENSIONLESS:
            return PhysicalQuantity(self.value / other.value, self.dimension)
        result = _QUOTIENTS.get((self.dimension, other.dimension))
        if result is None:
            raise IncompatibleDimensions(
                f"No modelled dimension for {self.dimension.value} / {other.dimension.value}"
            )
        return PhysicalQuantity(self.value / other.value, result)

    def __rtruediv__(self, other) -> "PhysicalQuantity":
        if not isinstance(other, (int, float)):
            return NotImplemented
        return PhysicalQuantity(other, Dimension.DIMENSIONLESS) / self

    def __str__(self) -> str:
        return f"{self.value:.6g} {self.dimension.value}"


def rate(value: float) -> PhysicalQuantity:
    return PhysicalQuantity(value, Dimension.RATE)


def seconds(value: float) -> PhysicalQuantity:
    return PhysicalQuantity(value, Dimension.TIME)
