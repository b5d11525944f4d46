"""
Noise sources driving the collapse dynamics.

A NoiseProcess owns one counter-based random stream per channel. White
channels produce Wiener increments; cutoff channels produce the exact
integral over each step of an Ornstein-Uhlenbeck process whose spectrum is
flat below omega_max and falls off as omega**-2 above it.

Streams are derived from (master seed, trajectory index) through
numpy.random.SeedSequence, so any trajectory can be regenerated on its own,
in any worker, and yield the same increments.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import signal

from .errors import InvalidParameter


@dataclass(frozen=True)
class White:
    """Flat noise spectrum (Brownian motion increments)."""

    def describe(self) -> str:
        return "white"


@dataclass(frozen=True)
class Cutoff:
    """Noise spectrum cut off above omega_max (s^-1)."""
    omega_max: float

    def __post_init__(self):
        if not self.omega_max > 0:
            raise InvalidParameter(f"omega_max must be positive, got {self.omega_max}")

    def describe(self) -> str:
        return f"cutoff({self.omega_max!r})"


Spectrum = Union[White, Cutoff]


def _ou_step_moments(theta: float, dt: float) -> Tuple[float, float, float, float]:
    """
    Moments of one exact Ornstein-Uhlenbeck step.

    The process is dx = -theta x dt + theta dW, stationary variance theta/2,
    so its integral converges to a Wiener process as theta grows.

    Returns:
        (decay, std of the state innovation, regression of the integral on
        that innovation, residual std of the integral)
    """
    u = theta * dt
    e1 = -math.expm1(-u)
    e2 = -math.expm1(-2.0 * u)
    var_state = 0.5 * theta * e2
    cov = 0.5 * e1 * e1
    if u < 1e-3:
        var_integral = (u ** 3 / 3.0 - u ** 4 / 4.0 + 7.0 * u ** 5 / 60.0) / theta
    else:
        var_integral = (u - 2.0 * e1 + 0.5 * e2) / theta
    residual = max(var_integral - cov * cov / var_state, 0.0)
    return 1.0 - e1, math.sqrt(var_state), cov / math.sqrt(var_state), math.sqrt(residual)


class NoiseProcess:
    """
    Seeded multi-channel noise source for one trajectory.

    Not shared between trajectories: derive a fresh process per trajectory
    with NoiseProcess.derive().
    """

    def __init__(
        self,
        seed: int,
        n_channels: int = 1,
        spectrum: Optional[Spectrum] = None,
        stream: Tuple[int, ...] = (),
    ):
        """
        Initialize a NoiseProcess.

        Args:
            seed: Master seed (non-negative, up to 64 bits)
            n_channels: Number of independent noise channels
            spectrum: White() (default) or Cutoff(omega_max)
            stream: Spawn key identifying this stream under the master seed
        """
        if n_channels < 1:
            raise InvalidParameter(f"n_channels must be at least 1, got {n_channels}")
        if seed < 0 or seed >= 2 ** 64:
            raise InvalidParameter(f"Seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self.n_channels = n_channels
        self.spectrum = spectrum if spectrum is not None else White()
        self.stream = tuple(stream)
        root = np.random.SeedSequence(seed, spawn_key=self.stream)
        self._generators = [
            np.random.Generator(np.random.Philox(child))
            for child in root.spawn(n_channels)
        ]
        self._colored_state = np.zeros(n_channels)
        if isinstance(self.spectrum, Cutoff):
            scale = math.sqrt(0.5 * self.spectrum.omega_max)
            for channel, rng in enumerate(self._generators):
                self._colored_state[channel] = scale * rng.standard_normal()

    @classmethod
    def derive(
        cls,
        master_seed: int,
        index: int,
        n_channels: int = 1,
        spectrum: Optional[Spectrum] = None,
    ) -> "NoiseProcess":
        """Noise process for trajectory `index` under `master_seed`."""
        return cls(master_seed, n_channels, spectrum, stream=(index,))

    def __repr__(self) -> str:
        return (
            f"NoiseProcess(seed={self.seed}, n_channels={self.n_channels}, "
            f"spectrum={self.spectrum.describe()}, stream={self.stream})"
        )

    def channel_increments(self, channel: int, n_steps: int, dt: float) -> np.ndarray:
        """
        Draw the next n_steps increments of one channel.

        Args:
            channel: Channel index
            n_steps: Number of consecutive steps
            dt: Step size

        Returns:
            Array of shape (n_steps,)
        """
        if not dt > 0:
            raise InvalidParameter(f"dt must be positive, got {dt}")
        rng = self._generators[channel]
        if isinstance(self.spectrum, White):
            return math.sqrt(dt) * rng.standard_normal(n_steps)

        theta = self.spectrum.omega_max
        decay, state_std, regress, resid_std = _ou_step_moments(theta, dt)
        z = rng.standard_normal((n_steps, 2))
        innovation = state_std * z[:, 0]
        x0 = self._colored_state[channel]
        states, _ = signal.lfilter([1.0], [1.0, -decay], innovation, zi=[decay * x0])
        previous = np.concatenate(([x0], states[:-1]))
        increments = (
            previous * (1.0 - decay) / theta
            + regress * z[:, 0]
            + resid_std * z[:, 1]
        )
        self._colored_state[channel] = states[-1]
        return increments

    def increments(self, n_steps: int, dt: float) -> np.ndarray:
        """Draw the next n_steps increments of every channel, shape (n_steps, n_channels)."""
        return np.stack(
            [self.channel_increments(ch, n_steps, dt) for ch in range(self.n_channels)],
            axis=1,
        )


def sample_noise_increment(
    noise: NoiseProcess,
    channel: int,
    dt: float,
    spectrum: Optional[Spectrum] = None,
) -> float:
    """
    Draw one increment from a channel of a noise process.

    The spectrum argument, if given, must agree with the process; it exists
    so call sites can state which realization they expect.
    """
    if spectrum is not None and spectrum != noise.spectrum:
        raise InvalidParameter(
            f"Noise process is {noise.spectrum.describe()}, not {spectrum.describe()}"
        )
    return float(noise.channel_increments(channel, 1, dt)[0])


def estimate_spectrum(
    increments: np.ndarray,
    dt: float,
    nperseg: int = 4096,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Welch estimate of the spectral density of a noise increment series.

    The increments are divided by dt so a white process has a flat density
    of 1/pi per unit angular frequency (one-sided).

    Returns:
        (angular frequencies, spectral density per unit angular frequency)
    """
    rate = np.asarray(increments, dtype=float) / dt
    freqs, density = signal.welch(rate, fs=1.0 / dt, nperseg=min(nperseg, rate.size))
    return 2.0 * np.pi * freqs, density / (2.0 * np.pi)
