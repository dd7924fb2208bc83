"""Random search over declared hyperparameter spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySpace


@dataclass(frozen=True)
class Continuous:
    lo: float
    hi: float
    log: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("continuous dimension needs lo < hi")
        if self.log and self.lo <= 0:
            raise ValueError("log-scaled dimension needs lo > 0")

    def draw(self, rng):
        if self.log:
            return float(math.exp(rng.uniform(math.log(self.lo), math.log(self.hi))))
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class Choice:
    values: tuple

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("choice dimension needs at least one value")

    def draw(self, rng):
        return self.values[int(rng.integers(len(self.values)))]


class SearchSpace(dict):
    """Ordered mapping name -> Continuous | Choice; draws follow insertion order."""

    def sample(self, rng) -> dict:
        return {name: dim.draw(rng) for name, dim in self.items()}


def random_search(space: SearchSpace, evaluate, iterations: int, seed: int = 0):
    """Evaluate `iterations` independent draws; return (best_params, best_value).

    Non-finite evaluations count as +inf; ties keep the earliest draw.
    """
    if not space:
        raise EmptySpace("search space has no dimensions")
    if iterations < 1:
        raise ValueError("iterations must be positive")
    rng = np.random.default_rng(seed)
    best_params, best_value = None, math.inf
    for _ in range(iterations):
        params = space.sample(rng)
        value = float(evaluate(params))
        if not math.isfinite(value):
            value = math.inf
        if best_params is None or value < best_value:
            best_params, best_value = params, value
    return best_params, best_value


def svr_space() -> SearchSpace:
    return SearchSpace(gamma=Continuous(1e-4, 1e1, log=True), epsilon=Continuous(1e-3, 0.5))


def pso_space(swarm_size: int) -> SearchSpace:
    neighbors = tuple(sorted({min(3, swarm_size), min(5, swarm_size), swarm_size}))
    return SearchSpace(
        c1=Continuous(0.5, 2.5),
        c2=Continuous(0.5, 2.5),
        inertia=Continuous(0.3, 0.95),
        neighbors=Choice(neighbors),
    )


def re_space() -> SearchSpace:
    return SearchSpace(threshold=Continuous(1e-5, 1e-1, log=True))
