"""
Ensemble harness for Born-rule statistics of collapse outcomes.

Trajectory k of an ensemble always draws its noise from the stream derived
from (seed, k), and batches are reduced in index order, so the result is
the same whatever number of worker processes runs the batches.
"""

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Iterator, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from .dynamics import (
    DEFAULT_COLLAPSE_EPSILON,
    CslParams,
    Observables,
    _integrate_batch,
    _validate_run,
    step_count,
    warn_if_coarse,
)
from .errors import DimensionMismatch, EmptyRecord, InvalidParameter
from .noise import NoiseProcess
from .state import StateVector, probabilities

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240917
DEFAULT_BATCH_SIZE = 1024
PASS_THRESHOLD = 3.0
NUMERICAL_FLOOR = 1e-12


@dataclass
class EnsembleConfig:
    """Everything needed to reproduce an ensemble run."""
    initial: StateVector
    H: Optional[np.ndarray]
    M: Observables
    params: CslParams
    t_final: float
    n_trajectories: int
    seed: int = DEFAULT_SEED
    collapse_epsilon: float = DEFAULT_COLLAPSE_EPSILON
    sample_every: int = 1
    stop_on_collapse: bool = True
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise InvalidParameter(f"n_trajectories must be at least 1, got {self.n_trajectories}")
        if self.batch_size < 1:
            raise InvalidParameter(f"batch_size must be at least 1, got {self.batch_size}")
        if not self.t_final > 0:
            raise InvalidParameter(f"t_final must be positive, got {self.t_final}")
        if not 0.0 < self.collapse_epsilon < 0.5:
            raise InvalidParameter(
                f"collapse_epsilon must lie in (0, 0.5), got {self.collapse_epsilon}"
            )
        if self.sample_every < 1:
            raise InvalidParameter(f"sample_every must be at least 1, got {self.sample_every}")

    @property
    def n_steps(self) -> int:
        return step_count(self.t_final, self.params.dt)


@dataclass
class OutcomeTally:
    """Outcome counts of an ensemble; undecided trajectories are kept apart."""
    counts: np.ndarray
    undecided: int
    total: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if int(self.counts.sum()) + self.undecided != self.total:
            raise InvalidParameter("Outcome counts and undecided do not add up to total")

    @property
    def decided(self) -> int:
        return self.total - self.undecided

    def undecided_fraction(self) -> float:
        return self.undecided / self.total

    def frequencies(self) -> np.ndarray:
        """Outcome frequencies among decided trajectories."""
        if self.decided == 0:
            return np.zeros_like(self.counts, dtype=float)
        return self.counts / self.decided

    def binomial_z_scores(self, expected: Sequence[float]) -> np.ndarray:
        """Deviation of each decided frequency from `expected` in binomial standard errors."""
        expected = np.asarray(expected, dtype=float)
        if expected.shape != self.counts.shape:
            raise DimensionMismatch("Expected probabilities do not match the outcome count")
        spread = np.sqrt(expected * (1.0 - expected) / max(self.decided, 1))
        diff = np.abs(self.frequencies() - expected)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(spread > 0, diff / spread, np.where(diff > NUMERICAL_FLOOR, np.inf, 0.0))
        return z


@dataclass
class MartingaleRecord:
    """Ensemble mean and standard error of each Born weight at the sample times."""
    times: np.ndarray
    mean: np.ndarray  # (samples, dim)
    stderr: np.ndarray  # (samples, dim)
    n_trajectories: int

    def __len__(self) -> int:
        return len(self.times)

    def to_records(self) -> List[dict]:
        rows = []
        for k, t in enumerate(self.times):
            row = {"time": float(t)}
            for i, value in enumerate(self.mean[k]):
                row[f"mean_p_{i}"] = float(value)
            for i, value in enumerate(self.stderr[k]):
                row[f"stderr_p_{i}"] = float(value)
            rows.append(row)
        return rows


@dataclass
class EnsembleResult:
    tally: OutcomeTally
    record: MartingaleRecord
    mean_density: np.ndarray  # (samples, dim, dim), ensemble average of |psi><psi|
    collapse_times: np.ndarray  # nan where undecided
    config: EnsembleConfig = field(repr=False)


@dataclass
class _BatchSummary:
    sum_p: np.ndarray
    sum_p2: np.ndarray
    sum_rho: np.ndarray
    outcome: np.ndarray
    collapse_step: np.ndarray


def _run_batch(job) -> _BatchSummary:
    config, start, stop = job
    H, eigs = _validate_run(config.initial, config.H, config.M)
    noises = [
        NoiseProcess.derive(config.seed, k, eigs.shape[0], config.params.spectrum)
        for k in range(start, stop)
    ]
    psi0 = np.repeat(config.initial.amplitudes[np.newaxis, :], stop - start, axis=0)
    run = _integrate_batch(
        psi0, H, eigs, config.params, noises, config.n_steps,
        config.sample_every, config.collapse_epsilon, config.stop_on_collapse,
    )
    snaps = run.snapshots
    p = snaps.real ** 2 + snaps.imag ** 2
    return _BatchSummary(
        sum_p=p.sum(axis=1),
        sum_p2=(p * p).sum(axis=1),
        sum_rho=np.einsum("sbi,sbj->sij", snaps, snaps.conj()),
        outcome=run.outcome,
        collapse_step=run.collapse_step,
    )


def _batches(config: EnsembleConfig) -> Iterator[tuple]:
    for start in range(0, config.n_trajectories, config.batch_size):
        yield config, start, min(start + config.batch_size, config.n_trajectories)


def run_ensemble(
    config: EnsembleConfig,
    workers: int = 1,
    progress: bool = False,
) -> EnsembleResult:
    """
    Run an ensemble of collapse trajectories and tally their outcomes.

    Args:
        config: Ensemble configuration
        workers: Worker processes; affects speed only, never results
        progress: Show a progress bar on stderr

    Returns:
        EnsembleResult with tally, martingale record and averaged density matrix
    """
    H, eigs = _validate_run(config.initial, config.H, config.M)
    warn_if_coarse(config.params, config.M)
    if workers < 1:
        raise InvalidParameter(f"workers must be at least 1, got {workers}")
    jobs = list(_batches(config))
    logger.info(
        "Ensemble of %d trajectories, %d steps, %d batches on %d workers",
        config.n_trajectories, config.n_steps, len(jobs), workers,
    )

    if workers == 1 or len(jobs) == 1:
        summaries = list(tqdm(map(_run_batch, jobs), total=len(jobs), disable=not progress))
    else:
        with Pool(processes=min(workers, len(jobs))) as pool:
            summaries = list(
                tqdm(pool.imap(_run_batch, jobs), total=len(jobs), disable=not progress)
            )

    n = config.n_trajectories
    sum_p = sum(s.sum_p for s in summaries)
    sum_p2 = sum(s.sum_p2 for s in summaries)
    sum_rho = sum(s.sum_rho for s in summaries)
    outcome = np.concatenate([s.outcome for s in summaries])
    collapse_step = np.concatenate([s.collapse_step for s in summaries])

    mean = sum_p / n
    if n > 1:
        var = np.maximum(sum_p2 - n * mean * mean, 0.0) / (n - 1)
    else:
        var = np.zeros_like(mean)
    stderr = np.sqrt(var / n)

    n_steps = config.n_steps
    sample_steps = list(range(0, n_steps + 1, config.sample_every))
    if sample_steps[-1] != n_steps:
        sample_steps.append(n_steps)
    times = np.asarray(sample_steps, dtype=float) * config.params.dt

    counts = np.bincount(outcome[outcome >= 0], minlength=config.initial.dim)
    tally = OutcomeTally(counts=counts, undecided=int(np.sum(outcome < 0)), total=n)
    collapse_times = np.where(collapse_step >= 0, collapse_step * config.params.dt, np.nan)
    return EnsembleResult(
        tally=tally,
        record=MartingaleRecord(times=times, mean=mean, stderr=stderr, n_trajectories=n),
        mean_density=sum_rho / n,
        collapse_times=collapse_times,
        config=config,
    )


def classify_outcome(state: StateVector, epsilon: float = DEFAULT_COLLAPSE_EPSILON) -> Optional[int]:
    """
    Outcome a state has collapsed onto, or None while undecided.

    Returns i iff p_i >= 1 - epsilon. Since epsilon < 0.5 at most one such
    index exists.

    Raises:
        NotNormalized: if the state does not have unit norm
    """
    if not 0.0 < epsilon < 0.5:
        raise InvalidParameter(f"epsilon must lie in (0, 0.5), got {epsilon}")
    p = probabilities(state)
    best = int(np.argmax(p))
    return best if p[best] >= 1.0 - epsilon else None


def martingale_test(record: MartingaleRecord, p0: Sequence[float]) -> float:
    """
    Largest standardized drift of the mean Born weights away from p0.

    Returns:
        max over sample times and outcomes of |mean p_i(t) - p_i(0)| / SE;
        deviations below 1e-12 count as zero. The test passes below 3.

    Raises:
        EmptyRecord: if the record holds no samples
    """
    if len(record) == 0:
        raise EmptyRecord("Martingale record has no samples")
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != record.mean.shape[1:]:
        raise DimensionMismatch("p0 does not match the record dimension")
    diff = np.abs(record.mean - p0[np.newaxis, :])
    diff = np.where(diff > NUMERICAL_FLOOR, diff, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(record.stderr > 0, diff / record.stderr, np.where(diff > 0, np.inf, 0.0))
    return float(np.max(z))


def martingale_passes(statistic: float) -> bool:
    return statistic < PASS_THRESHOLD


def median_collapse_time(result: EnsembleResult) -> float:
    """Median absorption time over decided trajectories (nan if none decided)."""
    decided = result.collapse_times[~np.isnan(result.collapse_times)]
    return float(np.median(decided)) if decided.size else math.nan
