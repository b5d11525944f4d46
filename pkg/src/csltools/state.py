"""
State vectors and diagonal observables over a finite labeled basis.

All values are immutable: operations return new objects and never modify
their inputs, so states can be shared freely between workers.
"""

from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, NotNormalized, ZeroNorm

NORM_TOLERANCE = 1e-9
ZERO_NORM_FLOOR = 1e-300


def _frozen(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Complex amplitudes over a labeled basis.

    Labels are opaque identifiers; if omitted they default to 0..d-1.
    """
    amplitudes: np.ndarray
    labels: Tuple[Hashable, ...] = field(default=())

    def __post_init__(self):
        amplitudes = _frozen(self.amplitudes, np.complex128).reshape(-1)
        if amplitudes.size < 1:
            raise DimensionMismatch("State vector needs at least one amplitude")
        labels = tuple(self.labels) if self.labels else tuple(range(amplitudes.size))
        if len(labels) != amplitudes.size:
            raise DimensionMismatch(
                f"{len(labels)} labels for {amplitudes.size} amplitudes"
            )
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def with_amplitudes(self, amplitudes: np.ndarray) -> "StateVector":
        """Return a state over the same basis with new amplitudes."""
        return StateVector(amplitudes, self.labels)

    def __repr__(self) -> str:
        return f"StateVector({self.amplitudes.tolist()!r}, labels={self.labels!r})"


@dataclass(frozen=True, eq=False)
class DiagonalObservable:
    """
    An observable that is diagonal in the state basis.

    For the collapse coupling the eigenvalues are effective mass densities,
    in nucleons per correlation cell.
    """
    eigenvalues: np.ndarray
    unit: str = "nucleons per r_C cell"

    def __post_init__(self):
        eigenvalues = _frozen(self.eigenvalues, np.float64).reshape(-1)
        if eigenvalues.size < 1:
            raise DimensionMismatch("Observable needs at least one eigenvalue")
        if not np.all(np.isfinite(eigenvalues)):
            raise InvalidParameter("Observable eigenvalues must be finite")
        object.__setattr__(self, "eigenvalues", eigenvalues)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def spread_squared(self) -> float:
        """Squared difference between the largest and smallest eigenvalue."""
        return float((self.eigenvalues.max() - self.eigenvalues.min()) ** 2)

    def __repr__(self) -> str:
        return f"DiagonalObservable({self.eigenvalues.tolist()!r}, unit={self.unit!r})"


def two_level_state(p1: float, labels: Optional[Sequence[Hashable]] = None) -> StateVector:
    """
    Build the real two-level state (sqrt(1 - p1), sqrt(p1)).

    Args:
        p1: Born weight of basis state 1

    Returns:
        Normalized StateVector
    """
    if not 0.0 <= p1 <= 1.0:
        raise InvalidParameter(f"Probability must lie in [0, 1], got {p1}")
    return StateVector(np.sqrt([1.0 - p1, p1]), tuple(labels) if labels else ())


def normalize(state: StateVector) -> StateVector:
    """
    Rescale a state to unit norm by a positive real factor.

    Raises:
        ZeroNorm: if the squared norm vanishes
    """
    norm_sq = state.norm_squared()
    if norm_sq <= ZERO_NORM_FLOOR:
        raise ZeroNorm("Cannot normalize a state with zero norm")
    return state.with_amplitudes(state.amplitudes / np.sqrt(norm_sq))


def _check_normalized(state: StateVector) -> None:
    deviation = abs(state.norm_squared() - 1.0)
    if deviation > NORM_TOLERANCE:
        raise NotNormalized(f"State norm deviates from 1 by {deviation:.3e}")


def _check_dimensions(obs: DiagonalObservable, state: StateVector) -> None:
    if obs.dim != state.dim:
        raise DimensionMismatch(
            f"Observable has {obs.dim} eigenvalues but state has {state.dim} amplitudes"
        )


def probabilities(state: StateVector) -> np.ndarray:
    """
    Born weights |c_i|^2 of a normalized state.

    Raises:
        NotNormalized: if the norm deviates from 1 by more than 1e-9
    """
    _check_normalized(state)
    return np.abs(state.amplitudes) ** 2


def expectation(obs: DiagonalObservable, state: StateVector) -> float:
    """Mean of a diagonal observable, sum_i p_i M_i."""
    _check_dimensions(obs, state)
    return float(np.dot(probabilities(state), obs.eigenvalues))


def variance(obs: DiagonalObservable, state: StateVector) -> float:
    """
    Variance of a diagonal observable in the given state.

    Computed as sum_i p_i (M_i - <M>)^2 so it is exactly zero whenever the
    support of p lies within one eigenvalue.
    """
    _check_dimensions(obs, state)
    p = probabilities(state)
    mean = float(np.dot(p, obs.eigenvalues))
    return float(np.dot(p, (obs.eigenvalues - mean) ** 2))
