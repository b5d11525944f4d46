"""
Noise-averaged density matrix evolution.

Averaging the collapse equation over white noise gives the linear master
equation

    drho/dt = -i [H, rho] - (lam/2) sum_k [M_k, [M_k, rho]]

For diagonal M_k the double commutator acts elementwise,
[M, [M, rho]]_ij = (M_i - M_j)^2 rho_ij, so populations are untouched when
H = 0 and coherences decay at (lam/2) (M_i - M_j)^2.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import CslParams, Observables, _as_eigenvalue_matrix, _check_hamiltonian
from .errors import DimensionMismatch, InvalidDensityMatrix, InvalidParameter
from .noise import White
from .state import StateVector

logger = logging.getLogger(__name__)

DENSITY_TOLERANCE = 1e-12
RK4_STEP_STRENGTH = 1e-2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace matrix over a finite basis."""
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidDensityMatrix(f"Density matrix must be square, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        """Pure-state projector |psi><psi|."""
        c = state.amplitudes
        return cls(np.outer(c, c.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, tolerance: float = DENSITY_TOLERANCE) -> "DensityMatrix":
        """
        Check Hermiticity, unit trace and non-negative populations.

        Raises:
            InvalidDensityMatrix: if any check fails
        """
        rho = self.matrix
        asymmetry = float(np.max(np.abs(rho - rho.conj().T)))
        if asymmetry > tolerance:
            raise InvalidDensityMatrix(f"Not Hermitian: max |rho - rho^dagger| = {asymmetry:.3e}")
        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > tolerance:
            raise InvalidDensityMatrix(f"Trace is {trace}, expected 1")
        if np.min(np.diag(rho).real) < -tolerance:
            raise InvalidDensityMatrix("Negative population on the diagonal")
        return self

    def populations(self) -> np.ndarray:
        return np.diag(self.matrix).real.copy()

    def coherence(self, i: int, j: int) -> complex:
        return complex(self.matrix[i, j])

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def mix(self, other: "DensityMatrix", weight: float) -> "DensityMatrix":
        """Convex combination weight*self + (1 - weight)*other."""
        if other.dim != self.dim:
            raise DimensionMismatch(f"Cannot mix dimensions {self.dim} and {other.dim}")
        if not 0.0 <= weight <= 1.0:
            raise InvalidParameter(f"Mixing weight must lie in [0, 1], got {weight}")
        return DensityMatrix(weight * self.matrix + (1.0 - weight) * other.matrix)


def _dephasing_mask(eigs: np.ndarray) -> np.ndarray:
    """D_ij = sum_k (M_k,i - M_k,j)^2."""
    diff = eigs[:, :, np.newaxis] - eigs[:, np.newaxis, :]
    return np.sum(diff * diff, axis=0)


def _master_rhs(rho: np.ndarray, H: Optional[np.ndarray], damping: np.ndarray) -> np.ndarray:
    drho = -damping * rho
    if H is not None:
        drho = drho - 1j * (H @ rho - rho @ H)
    return drho


def _rk4_step(rho, H, damping, h):
    k1 = _master_rhs(rho, H, damping)
    k2 = _master_rhs(rho + 0.5 * h * k1, H, damping)
    k3 = _master_rhs(rho + 0.5 * h * k2, H, damping)
    k4 = _master_rhs(rho + h * k3, H, damping)
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve_density(
    rho: DensityMatrix,
    H: Optional[np.ndarray],
    M: Observables,
    params: CslParams,
    t_final: float,
    max_step: Optional[float] = None,
) -> DensityMatrix:
    """
    Integrate the averaged master equation with fixed-step RK4.

    The step is chosen so that step * (||H|| + (lam/2) max D) <= 1e-2 unless
    max_step is smaller. A cutoff spectrum has no Markovian average; only
    lam enters here and the white-noise master equation is used.

    Args:
        rho: Initial density matrix
        H: Hermitian Hamiltonian or None
        M: Observable(s) coupled to the noise
        params: Collapse parameters (lam is used)
        t_final: Evolution time, >= 0
        max_step: Optional upper bound on the RK4 step

    Returns:
        Density matrix at t_final
    """
    rho.validate()
    if t_final < 0:
        raise InvalidParameter(f"t_final must be non-negative, got {t_final}")
    eigs = _as_eigenvalue_matrix(M)
    if eigs.shape[1] != rho.dim:
        raise DimensionMismatch(
            f"Observable has {eigs.shape[1]} eigenvalues but density matrix is {rho.dim}x{rho.dim}"
        )
    H = _check_hamiltonian(H, rho.dim)
    if not isinstance(params.spectrum, White):
        logger.info("Averaged evolution uses the white-noise master equation")
    if t_final == 0:
        return rho

    damping = 0.5 * params.lam * _dephasing_mask(eigs)
    scale = float(np.max(damping))
    if H is not None:
        scale += float(np.linalg.norm(H, 2))
    n_steps = max(1, math.ceil(t_final * scale / RK4_STEP_STRENGTH))
    if max_step is not None:
        n_steps = max(n_steps, math.ceil(t_final / max_step))
    h = t_final / n_steps
    logger.debug("RK4 master equation: %d steps of %.3g", n_steps, h)

    current = rho.matrix.copy()
    for _ in range(n_steps):
        current = _rk4_step(current, H, damping, h)
        current = 0.5 * (current + current.conj().T)
    return DensityMatrix(current)
