"""
Norm-preserving stochastic collapse dynamics for discrete quantum systems.

The state obeys the Ito equation

    dpsi = [ -i H dt + sqrt(lam) sum_k (M_k - <M_k>) dW_k
             - (lam/2) sum_k (M_k - <M_k>)^2 dt ] psi

integrated by Euler-Maruyama with renormalization after every step. Its
noise average is the double-commutator master equation in density.py, and
the off-diagonal decoherence rate between basis states i and j is
(lam/2) sum_k (M_k,i - M_k,j)^2. This fixes the factor convention for lam.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidParameter,
    NonHermitianHamiltonian,
    NonPositiveInput,
)
from .noise import NoiseProcess, Spectrum, White
from .state import (
    DiagonalObservable,
    StateVector,
    _check_normalized,
)

logger = logging.getLogger(__name__)

DEFAULT_R_C_CM = 1e-5
DEFAULT_COLLAPSE_EPSILON = 1e-3
HERMITIAN_TOLERANCE = 1e-9
MAX_STEP_STRENGTH = 1e-2
NOISE_CHUNK_STEPS = 256

Observables = Union[DiagonalObservable, Sequence[DiagonalObservable]]


@dataclass(frozen=True)
class CslParams:
    """
    Parameters of the collapse dynamics.

    Attributes:
        lam: Collapse rate lambda (s^-1, or inverse model time units)
        dt: Integration step
        r_c: Noise correlation length in cm, carried for reporting only
        spectrum: White() or Cutoff(omega_max)
    """
    lam: float
    dt: float
    r_c: float = DEFAULT_R_C_CM
    spectrum: Spectrum = field(default_factory=White)

    def __post_init__(self):
        if not self.lam >= 0:
            raise InvalidParameter(f"lambda must be non-negative, got {self.lam}")
        if not self.dt > 0:
            raise InvalidParameter(f"dt must be positive, got {self.dt}")
        if not self.r_c > 0:
            raise InvalidParameter(f"r_c must be positive, got {self.r_c}")


@dataclass
class Trajectory:
    """Sampled record of a single collapse trajectory."""
    times: np.ndarray
    probabilities: np.ndarray  # (samples, dim)
    expectation_m: np.ndarray
    variance_m: np.ndarray
    final_state: StateVector
    outcome: Optional[int]  # None while undecided
    collapse_time: Optional[float] = None

    @property
    def undecided(self) -> bool:
        return self.outcome is None

    def to_records(self) -> List[dict]:
        """One dict per sample: time, p_0..p_{d-1}, expectation_M, variance_M."""
        records = []
        for k, t in enumerate(self.times):
            row = {"time": float(t)}
            for i, p in enumerate(self.probabilities[k]):
                row[f"p_{i}"] = float(p)
            row["expectation_M"] = float(self.expectation_m[k])
            row["variance_M"] = float(self.variance_m[k])
            records.append(row)
        return records


@dataclass
class BatchRun:
    """Raw output of the batched integrator."""
    sample_steps: np.ndarray  # (samples,)
    snapshots: np.ndarray  # (samples, batch, dim) complex
    final: np.ndarray  # (batch, dim) complex
    collapse_step: np.ndarray  # (batch,), -1 when undecided
    outcome: np.ndarray  # (batch,), -1 when undecided


def _as_eigenvalue_matrix(observables: Observables) -> np.ndarray:
    if isinstance(observables, DiagonalObservable):
        observables = [observables]
    observables = list(observables)
    if not observables:
        raise DimensionMismatch("At least one observable is required")
    dims = {obs.dim for obs in observables}
    if len(dims) != 1:
        raise DimensionMismatch(f"Observables have differing dimensions {sorted(dims)}")
    return np.vstack([obs.eigenvalues for obs in observables])


def _check_hamiltonian(H: Optional[np.ndarray], dim: int) -> Optional[np.ndarray]:
    """Validate H, returning None when it is absent or identically zero."""
    if H is None:
        return None
    H = np.asarray(H, dtype=np.complex128)
    if H.shape != (dim, dim):
        raise DimensionMismatch(f"Hamiltonian has shape {H.shape}, expected {(dim, dim)}")
    asymmetry = np.max(np.abs(H - H.conj().T))
    if asymmetry > HERMITIAN_TOLERANCE:
        raise NonHermitianHamiltonian(f"max |H - H^dagger| = {asymmetry:.3e}")
    if not np.any(H):
        return None
    return H


def _step_batch(
    psi: np.ndarray,
    H: Optional[np.ndarray],
    eigs: np.ndarray,
    lam: float,
    dt: float,
    dW: np.ndarray,
) -> np.ndarray:
    """
    One Euler-Maruyama step for a batch of states.

    Args:
        psi: States, shape (batch, dim)
        H: Hamiltonian or None
        eigs: Observable eigenvalues, shape (channels, dim)
        lam: Collapse rate
        dt: Step size
        dW: Noise increments, shape (batch, channels)

    Returns:
        Renormalized states, shape (batch, dim)
    """
    p = psi.real ** 2 + psi.imag ** 2
    mean = p @ eigs.T
    delta = eigs[np.newaxis, :, :] - mean[:, :, np.newaxis]
    gain = (
        math.sqrt(lam) * np.einsum("bcd,bc->bd", delta, dW)
        - 0.5 * lam * dt * np.sum(delta * delta, axis=1)
    )
    updated = psi * (1.0 + gain)
    if H is not None:
        updated = updated - 1j * dt * (psi @ H.T)
    norms = np.sqrt(np.sum(updated.real ** 2 + updated.imag ** 2, axis=1))
    return updated / norms[:, np.newaxis]


def _classify_rows(p: np.ndarray, epsilon: float) -> np.ndarray:
    """Index of the outcome with p >= 1 - epsilon per row, -1 if none."""
    best = np.argmax(p, axis=1)
    decided = p[np.arange(p.shape[0]), best] >= 1.0 - epsilon
    return np.where(decided, best, -1)


def step_count(t_final: float, dt: float) -> int:
    """Number of steps of size dt covering t_final (rounded to the nearest step)."""
    return max(1, int(round(t_final / dt)))


def _integrate_batch(
    psi0: np.ndarray,
    H: Optional[np.ndarray],
    eigs: np.ndarray,
    params: CslParams,
    noises: Sequence[NoiseProcess],
    n_steps: int,
    sample_every: int,
    collapse_epsilon: float,
    stop_on_collapse: bool = True,
) -> BatchRun:
    """
    Integrate a batch of trajectories with one noise process each.

    Absorbed trajectories are frozen when stop_on_collapse is set; their
    noise streams keep advancing so every stream is consumed identically
    regardless of the batch it runs in.
    """
    batch = psi0.shape[0]
    psi = psi0.copy()
    sample_steps = list(range(0, n_steps + 1, sample_every))
    if sample_steps[-1] != n_steps:
        sample_steps.append(n_steps)
    sample_index = {step: k for k, step in enumerate(sample_steps)}
    snapshots = np.empty((len(sample_steps), batch, psi.shape[1]), dtype=np.complex128)
    snapshots[0] = psi

    outcome = _classify_rows(psi.real ** 2 + psi.imag ** 2, collapse_epsilon)
    collapse_step = np.where(outcome >= 0, 0, -1)
    active = outcome < 0
    if not stop_on_collapse:
        active[:] = True

    step = 0
    while step < n_steps:
        chunk = min(NOISE_CHUNK_STEPS, n_steps - step)
        dW = np.stack([noise.increments(chunk, params.dt) for noise in noises], axis=0)
        for j in range(chunk):
            step += 1
            if np.any(active):
                moved = _step_batch(psi[active], H, eigs, params.lam, params.dt, dW[active, j, :])
                psi[active] = moved
                p = psi.real ** 2 + psi.imag ** 2
                newly = _classify_rows(p, collapse_epsilon)
                fresh = (newly >= 0) & (outcome < 0)
                outcome = np.where(fresh, newly, outcome)
                collapse_step = np.where(fresh, step, collapse_step)
                if stop_on_collapse:
                    active &= ~fresh
            if step in sample_index:
                snapshots[sample_index[step]] = psi
        if stop_on_collapse and batch == 1 and not active[0]:
            # a lone absorbed trajectory needs no further noise
            break

    if step < n_steps:
        for step_k, k in sample_index.items():
            if step_k > step:
                snapshots[k] = psi
    return BatchRun(
        sample_steps=np.asarray(sample_steps),
        snapshots=snapshots,
        final=psi,
        collapse_step=collapse_step,
        outcome=outcome,
    )


def _validate_run(
    state: StateVector,
    H: Optional[np.ndarray],
    M: Observables,
) -> Tuple[Optional[np.ndarray], np.ndarray]:
    _check_normalized(state)
    eigs = _as_eigenvalue_matrix(M)
    if eigs.shape[1] != state.dim:
        raise DimensionMismatch(
            f"Observable has {eigs.shape[1]} eigenvalues but state has {state.dim} amplitudes"
        )
    return _check_hamiltonian(H, state.dim), eigs


def sde_step(
    state: StateVector,
    H: Optional[np.ndarray],
    M: Observables,
    params: CslParams,
    noise: NoiseProcess,
) -> StateVector:
    """
    Advance a state by one step of the collapse equation.

    Args:
        state: Normalized state
        H: Hermitian Hamiltonian (None for no free evolution)
        M: Mass-density observable, or one observable per noise channel
        params: Collapse parameters
        noise: Noise process with one channel per observable

    Returns:
        The normalized state after one step of size params.dt
    """
    H, eigs = _validate_run(state, H, M)
    if noise.n_channels != eigs.shape[0]:
        raise DimensionMismatch(
            f"Noise has {noise.n_channels} channels for {eigs.shape[0]} observables"
        )
    dW = noise.increments(1, params.dt)
    psi = _step_batch(state.amplitudes[np.newaxis, :], H, eigs, params.lam, params.dt, dW)
    return state.with_amplitudes(psi[0])


def evolve_trajectory(
    initial: StateVector,
    H: Optional[np.ndarray],
    M: Observables,
    params: CslParams,
    t_final: float,
    sample_every: int = 1,
    collapse_epsilon: float = DEFAULT_COLLAPSE_EPSILON,
    seed: int = 0,
    noise: Optional[NoiseProcess] = None,
) -> Trajectory:
    """
    Integrate one trajectory until it collapses or t_final is reached.

    Args:
        initial: Normalized initial state
        H: Hamiltonian or None
        M: Observable(s) coupled to the noise; the first is recorded
        params: Collapse parameters
        t_final: End time
        sample_every: Record every this many steps
        collapse_epsilon: Absorption threshold, p_max >= 1 - epsilon
        seed: Seed used when no noise process is supplied
        noise: Noise process to consume (derived from seed if omitted)

    Returns:
        Trajectory record
    """
    if not t_final > 0:
        raise InvalidParameter(f"t_final must be positive, got {t_final}")
    if not 0.0 < collapse_epsilon < 0.5:
        raise InvalidParameter(f"collapse_epsilon must lie in (0, 0.5), got {collapse_epsilon}")
    if sample_every < 1:
        raise InvalidParameter(f"sample_every must be at least 1, got {sample_every}")
    H, eigs = _validate_run(initial, H, M)
    if noise is None:
        noise = NoiseProcess.derive(seed, 0, eigs.shape[0], params.spectrum)
    warn_if_coarse(params, M)

    n_steps = step_count(t_final, params.dt)
    run = _integrate_batch(
        initial.amplitudes[np.newaxis, :], H, eigs, params, [noise],
        n_steps, sample_every, collapse_epsilon,
    )
    collapsed_at = int(run.collapse_step[0])
    keep = run.sample_steps <= collapsed_at if collapsed_at >= 0 else np.ones_like(run.sample_steps, bool)
    steps = list(run.sample_steps[keep])
    psis = list(run.snapshots[keep, 0, :])
    if collapsed_at >= 0 and (not steps or steps[-1] != collapsed_at):
        steps.append(collapsed_at)
        psis.append(run.final[0])

    psis = np.array(psis)
    probs = psis.real ** 2 + psis.imag ** 2
    primary = eigs[0]
    means = probs @ primary
    variances = np.sum(probs * (primary[np.newaxis, :] - means[:, np.newaxis]) ** 2, axis=1)
    outcome = int(run.outcome[0]) if run.outcome[0] >= 0 else None
    return Trajectory(
        times=np.asarray(steps, dtype=float) * params.dt,
        probabilities=probs,
        expectation_m=means,
        variance_m=variances,
        final_state=initial.with_amplitudes(run.final[0]),
        outcome=outcome,
        collapse_time=collapsed_at * params.dt if outcome is not None else None,
    )


def warn_if_coarse(params: CslParams, M: Observables) -> None:
    observables = [M] if isinstance(M, DiagonalObservable) else list(M)
    spread = sum(obs.spread_squared() for obs in observables)
    strength = params.lam * spread * params.dt
    if strength > MAX_STEP_STRENGTH:
        logger.warning(
            "lambda * dM^2 * dt = %.3g exceeds %.0e; expect discretization bias",
            strength, MAX_STEP_STRENGTH,
        )


def offdiag_decay_rate(M: DiagonalObservable, i: int, j: int, lam: float) -> float:
    """
    Decay rate of the density-matrix element rho_ij under the averaged dynamics.

    Returns:
        (lam/2) (M_i - M_j)^2
    """
    for index in (i, j):
        if not 0 <= index < M.dim:
            raise IndexOutOfRange(f"Index {index} outside observable of dimension {M.dim}")
    if i == j:
        raise InvalidParameter("Decay rate is defined between distinct basis states")
    return 0.5 * lam * float(M.eigenvalues[i] - M.eigenvalues[j]) ** 2


def collapse_time_estimate(lam: float, delta_m_squared: float) -> float:
    """Characteristic collapse time 1/(lam * dM^2)."""
    if not lam > 0 or not delta_m_squared > 0:
        raise NonPositiveInput(
            f"Collapse time needs positive lambda and dM^2, got {lam} and {delta_m_squared}"
        )
    return 1.0 / (lam * delta_m_squared)


def _log_odds_potential(p: float) -> float:
    return (2.0 * p - 1.0) * math.log(p / (1.0 - p))


def expected_collapse_time(
    p0: float,
    epsilon: float,
    lam: float,
    delta_m_squared: float,
) -> float:
    """
    Mean absorption time of a two-outcome collapse.

    The Born weight follows dp = 2 sqrt(lam dM^2) p (1 - p) dW; the mean
    time to reach epsilon or 1 - epsilon from p0 solves the backward
    equation exactly.

    Args:
        p0: Initial weight of one outcome, within [epsilon, 1 - epsilon]
        epsilon: Absorption threshold
        lam: Collapse rate
        delta_m_squared: Squared eigenvalue spread of the observable

    Returns:
        Expected collapse time
    """
    base = collapse_time_estimate(lam, delta_m_squared)
    if not 0.0 < epsilon < 0.5:
        raise InvalidParameter(f"epsilon must lie in (0, 0.5), got {epsilon}")
    if not epsilon <= p0 <= 1.0 - epsilon:
        raise InvalidParameter(f"p0 = {p0} is already absorbed for epsilon = {epsilon}")
    return 0.5 * base * (_log_odds_potential(epsilon) - _log_odds_potential(p0))
