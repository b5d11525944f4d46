"""
The fair gambler's ruin: the discrete skeleton of Born-rule emergence.

Alice starts with a pennies and Bob with b. Each fair coin flip moves one
penny between them until one player holds all a + b. The exact solver
builds the absorbing Markov chain and solves it directly, so the closed
form a/(a + b) stays an independent check.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import InvalidGame

FAIR = 0.5


@dataclass(frozen=True)
class RuinGame:
    """Initial stakes of the two players."""
    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b < 1:
            raise InvalidGame(f"Stakes must be non-negative with a positive total, got a={self.a}, b={self.b}")

    @property
    def total(self) -> int:
        return self.a + self.b


@dataclass(frozen=True)
class RuinSimulation:
    game: RuinGame
    n_games: int
    alice_wins: int
    mean_length: float
    seed: int

    @property
    def win_frequency(self) -> float:
        return self.alice_wins / self.n_games

    def stderr(self, p: float) -> float:
        """Binomial standard error of the win frequency around probability p."""
        return float(np.sqrt(p * (1.0 - p) / self.n_games))


def transition_matrix(game: RuinGame, p: float = FAIR) -> np.ndarray:
    """
    Transition matrix over Alice's fortune 0..a+b.

    States 0 and a+b are absorbing; every other state moves up with
    probability p and down with 1 - p.
    """
    size = game.total + 1
    markov = np.zeros((size, size))
    markov[0, 0] = 1.0
    markov[-1, -1] = 1.0
    for i in range(1, size - 1):
        markov[i, i + 1] = p
        markov[i, i - 1] = 1.0 - p
    return markov


def _absorbing_blocks(game: RuinGame) -> Tuple[np.ndarray, np.ndarray]:
    markov = transition_matrix(game)
    Q = markov[1:-1, 1:-1]
    R = markov[1:-1, [0, -1]]
    return np.eye(Q.shape[0]) - Q, R


def ruin_probability_exact(game: RuinGame) -> float:
    """
    Probability that Alice ends with every penny.

    Solves (I - Q) x = R[:, win] for the absorption probabilities of the
    transient states and reads off the entry for Alice's initial stake.
    """
    if game.a == 0:
        return 0.0
    if game.b == 0:
        return 1.0
    fundamental_lhs, R = _absorbing_blocks(game)
    absorption = np.linalg.solve(fundamental_lhs, R[:, 1])
    return float(absorption[game.a - 1])


def ruin_expected_length_exact(game: RuinGame) -> float:
    """Expected number of flips until absorption, from (I - Q) t = 1."""
    if game.a == 0 or game.b == 0:
        return 0.0
    fundamental_lhs, _ = _absorbing_blocks(game)
    steps = np.linalg.solve(fundamental_lhs, np.ones(fundamental_lhs.shape[0]))
    return float(steps[game.a - 1])


def ruin_simulate(game: RuinGame, n_games: int, seed: int) -> RuinSimulation:
    """
    Play n_games independent fair games.

    All games advance together; each round flips one coin per unfinished
    game from a single seeded generator, so results depend only on seed.

    Args:
        game: Initial stakes
        n_games: Number of games, >= 1
        seed: Random seed

    Returns:
        RuinSimulation with Alice's win count and the mean game length
    """
    if n_games < 1:
        raise InvalidGame(f"n_games must be at least 1, got {n_games}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    fortune = np.full(n_games, game.a, dtype=np.int64)
    lengths = np.zeros(n_games, dtype=np.int64)
    playing = (fortune > 0) & (fortune < game.total)
    while np.any(playing):
        idx = np.flatnonzero(playing)
        flips = rng.integers(0, 2, size=idx.size)
        fortune[idx] += 2 * flips - 1
        lengths[idx] += 1
        playing[idx] = (fortune[idx] > 0) & (fortune[idx] < game.total)
    return RuinSimulation(
        game=game,
        n_games=n_games,
        alice_wins=int(np.sum(fortune == game.total)),
        mean_length=float(lengths.mean()),
        seed=seed,
    )
