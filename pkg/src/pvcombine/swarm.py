"""Particle swarm optimiser with ring (lbest) neighbourhoods and box clipping.

Every particle owns a generator spawned from the run seed, so draws do not
depend on evaluation order. Draw protocol per particle: position (d uniforms),
velocity (d uniforms) at start; then r1 (d uniforms) and r2 (d uniforms)
each iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimension


@dataclass(frozen=True)
class PsoParams:
    inertia: float = 0.7
    c1: float = 1.5
    c2: float = 1.5
    swarm_size: int = 30
    neighbors: int = 30
    max_iterations: int = 200
    bounds: tuple | None = None
    seed: int = 0
    init_range: tuple | None = None

    def __post_init__(self):
        if self.swarm_size < 1 or self.max_iterations < 1:
            raise ValueError("swarm_size and max_iterations must be positive")
        if not 1 <= self.neighbors <= self.swarm_size:
            raise ValueError("neighbors must lie in [1, swarm_size]")
        if self.bounds is not None:
            lo, hi = (np.asarray(b, float) for b in self.bounds)
            if np.any(lo >= hi):
                raise ValueError("bounds need lo < hi in every dimension")


def ring_neighborhoods(size: int, k: int) -> list:
    """Sorted member indices of each particle's ring neighbourhood of size k."""
    left = (k - 1) // 2
    return [np.unique((i - left + np.arange(k)) % size) for i in range(size)]


@dataclass
class Swarm:
    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_value: np.ndarray
    rngs: list
    neighborhoods: list
    params: PsoParams
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    history: list = field(default_factory=list)

    @property
    def global_best(self):
        i = int(np.argmin(self.best_value))
        return self.best_position[i].copy(), float(self.best_value[i])

    def attractors(self) -> np.ndarray:
        """Best personal-best position inside each particle's neighbourhood."""
        out = np.empty_like(self.best_position)
        for i, members in enumerate(self.neighborhoods):
            out[i] = self.best_position[members[np.argmin(self.best_value[members])]]
        return out


def _evaluate(objective, X, vectorized):
    if vectorized:
        vals = np.asarray(objective(X), dtype=float)
    else:
        vals = np.array([objective(x) for x in X], dtype=float)
    return np.where(np.isfinite(vals), vals, np.inf)


def init_swarm(objective, d: int, params: PsoParams, vectorized: bool = False, positions=None, velocities=None) -> Swarm:
    if d <= 0:
        raise InvalidDimension(f"dimension must be positive, got {d}")
    S = params.swarm_size
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(params.seed).spawn(S)]
    if params.bounds is not None:
        lo = np.broadcast_to(np.asarray(params.bounds[0], float), (d,)).copy()
        hi = np.broadcast_to(np.asarray(params.bounds[1], float), (d,)).copy()
        init_lo, init_hi = lo, hi
    else:
        lo = hi = None
        ir = params.init_range or (-1.0, 1.0)
        init_lo = np.full(d, float(ir[0]))
        init_hi = np.full(d, float(ir[1]))
    span = init_hi - init_lo
    X = np.empty((S, d))
    V = np.empty((S, d))
    for i, rng in enumerate(rngs):
        X[i] = rng.uniform(init_lo, init_hi)
        V[i] = rng.uniform(-span / 2, span / 2)
    if positions is not None:
        X = np.array(positions, dtype=float).reshape(S, d)
    if velocities is not None:
        V = np.array(velocities, dtype=float).reshape(S, d)
    vals = _evaluate(objective, X, vectorized)
    swarm = Swarm(
        position=X, velocity=V, best_position=X.copy(), best_value=vals.copy(), rngs=rngs,
        neighborhoods=ring_neighborhoods(S, params.neighbors), params=params, lo=lo, hi=hi,
    )
    swarm.history.append(swarm.global_best[1])
    return swarm


def step(swarm: Swarm, objective, vectorized: bool = False) -> Swarm:
    """One synchronous velocity/position update, evaluation and best refresh."""
    p = swarm.params
    X, V = swarm.position, swarm.velocity
    G = swarm.attractors()
    d = X.shape[1]
    for i, rng in enumerate(swarm.rngs):
        r1 = rng.random(d)
        r2 = rng.random(d)
        V[i] = p.inertia * V[i] + p.c1 * r1 * (swarm.best_position[i] - X[i]) + p.c2 * r2 * (G[i] - X[i])
    X += V
    if swarm.lo is not None:
        clipped = (X < swarm.lo) | (X > swarm.hi)
        np.clip(X, swarm.lo, swarm.hi, out=X)
        V[clipped] = 0.0
    vals = _evaluate(objective, X, vectorized)
    improved = vals < swarm.best_value
    swarm.best_position[improved] = X[improved]
    swarm.best_value[improved] = vals[improved]
    swarm.history.append(swarm.global_best[1])
    return swarm


def optimize(objective, d: int, params: PsoParams, vectorized: bool = False, positions=None, velocities=None):
    """Minimise `objective` over R^d (or the params.bounds box).

    With vectorized=True the objective receives an (S, d) array and returns S
    values. Returns (best_position, best_value).
    """
    swarm = init_swarm(objective, d, params, vectorized, positions, velocities)
    for _ in range(params.max_iterations):
        step(swarm, objective, vectorized)
    return swarm.global_best
