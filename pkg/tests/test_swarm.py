import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pvcombine.errors import InvalidDimension
from pvcombine.swarm import PsoParams, init_swarm, optimize, ring_neighborhoods, step


def bowl(x):
    return float(np.sum((np.asarray(x) - np.array([0.3, 0.7])) ** 2))


def reference_gbest(objective, d, params):
    """Textbook global-best PSO written element by element.

    Shares only the random-draw protocol: per-particle generators spawned
    from the seed; x then v at start, then r1, r2 each iteration.
    """
    S = params.swarm_size
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(params.seed).spawn(S)]
    lo, hi = -1.0, 1.0
    x = [[0.0] * d for _ in range(S)]
    v = [[0.0] * d for _ in range(S)]
    for i in range(S):
        x[i] = list(rngs[i].uniform(np.full(d, lo), np.full(d, hi)))
        v[i] = list(rngs[i].uniform(np.full(d, -(hi - lo) / 2), np.full(d, (hi - lo) / 2)))
    pbest = [list(xi) for xi in x]
    pval = [objective(np.array(xi)) for xi in x]
    trajectory = [np.array(x)]
    for _ in range(params.max_iterations):
        g = pbest[int(np.argmin(pval))]
        for i in range(S):
            r1 = rngs[i].random(d)
            r2 = rngs[i].random(d)
            for k in range(d):
                v[i][k] = (
                    params.inertia * v[i][k]
                    + params.c1 * r1[k] * (pbest[i][k] - x[i][k])
                    + params.c2 * r2[k] * (g[k] - x[i][k])
                )
        for i in range(S):
            for k in range(d):
                x[i][k] = x[i][k] + v[i][k]
        for i in range(S):
            val = objective(np.array(x[i]))
            if val < pval[i]:
                pval[i], pbest[i] = val, list(x[i])
        trajectory.append(np.array(x))
    i = int(np.argmin(pval))
    return trajectory, np.array(pbest[i]), pval[i]


class TestOptimize:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_convex_bowl(self, seed):
        best, value = optimize(bowl, 2, PsoParams(swarm_size=30, neighbors=30, max_iterations=200, seed=seed))
        np.testing.assert_allclose(best, [0.3, 0.7], atol=1e-3)
        assert value < 1e-6

    def test_ring_topology_also_converges(self):
        best, _ = optimize(bowl, 2, PsoParams(swarm_size=30, neighbors=3, max_iterations=300, seed=4))
        np.testing.assert_allclose(best, [0.3, 0.7], atol=1e-3)

    def test_boundary_optimum_is_clipped(self):
        best, value = optimize(lambda x: float((x[0] + 0.5) ** 2), 1, PsoParams(bounds=([0.0], [1.0]), seed=3))
        assert abs(best[0] - 0.0) <= 1e-6
        assert value == pytest.approx(0.25, abs=1e-6)

    def test_fixed_point(self):
        params = PsoParams(swarm_size=1, neighbors=1, max_iterations=20, seed=9)
        best, value = optimize(bowl, 2, params, positions=[[0.3, 0.7]], velocities=[[0.0, 0.0]])
        np.testing.assert_array_equal(best, [0.3, 0.7])
        assert value == 0.0

    def test_invalid_dimension(self):
        with pytest.raises(InvalidDimension):
            optimize(bowl, 0, PsoParams())

    def test_neighbors_bounds(self):
        with pytest.raises(ValueError):
            PsoParams(swarm_size=5, neighbors=6)
        with pytest.raises(ValueError):
            PsoParams(bounds=([1.0], [0.0]))

    @pytest.mark.parametrize("seed", [0, 7])
    def test_gbest_trajectory_matches_reference_bitwise(self, seed):
        params = PsoParams(swarm_size=12, neighbors=12, max_iterations=40, seed=seed)
        ref_traj, ref_best, ref_val = reference_gbest(bowl, 2, params)
        swarm = init_swarm(bowl, 2, params)
        traj = [swarm.position.copy()]
        for _ in range(params.max_iterations):
            step(swarm, bowl)
            traj.append(swarm.position.copy())
        for a, b in zip(traj, ref_traj):
            np.testing.assert_array_equal(a, b)
        best, val = swarm.global_best
        np.testing.assert_array_equal(best, ref_best)
        assert val == ref_val

    def test_vectorized_objective_identical(self):
        params = PsoParams(swarm_size=10, neighbors=3, max_iterations=30, seed=5)
        a = optimize(bowl, 2, params)
        b = optimize(lambda X: np.sum((X - [0.3, 0.7]) ** 2, axis=1), 2, params, vectorized=True)
        np.testing.assert_array_equal(a[0], b[0])


class _Ones:
    def random(self, d):
        return np.ones(d)


class TestStep:
    def test_frozen_velocity(self):
        params = PsoParams(inertia=1.0, c1=0.0, c2=0.0, swarm_size=4, neighbors=4, seed=1)
        swarm = init_swarm(bowl, 2, params)
        x0, v0 = swarm.position.copy(), swarm.velocity.copy()
        step(swarm, bowl)
        np.testing.assert_array_equal(swarm.position, x0 + v0)

    def test_social_term_isolated(self):
        params = PsoParams(inertia=0.0, c1=0.0, c2=1.0, swarm_size=5, neighbors=5, seed=2)
        swarm = init_swarm(bowl, 2, params)
        swarm.rngs = [_Ones() for _ in swarm.rngs]
        x0 = swarm.position.copy()
        g = swarm.attractors()
        step(swarm, bowl)
        np.testing.assert_allclose(swarm.velocity, g - x0, atol=0)

    def test_personal_bests_never_worsen(self):
        params = PsoParams(swarm_size=8, neighbors=3, seed=3)
        swarm = init_swarm(bowl, 2, params)
        prev = swarm.best_value.copy()
        for _ in range(25):
            step(swarm, bowl)
            assert np.all(swarm.best_value <= prev)
            prev = swarm.best_value.copy()
        assert all(a >= b for a, b in zip(swarm.history, swarm.history[1:]))

    def test_gbest_shared_when_neighbourhood_is_everyone(self):
        params = PsoParams(swarm_size=6, neighbors=6, seed=4)
        swarm = init_swarm(bowl, 2, params)
        for _ in range(5):
            G = swarm.attractors()
            assert np.all(G == G[0])
            step(swarm, bowl)


def test_ring_neighbourhoods():
    hoods = ring_neighborhoods(5, 3)
    assert hoods[0].tolist() == [0, 1, 4]
    assert hoods[2].tolist() == [1, 2, 3]
    assert all(len(h) == 5 for h in ring_neighborhoods(5, 5))
    assert ring_neighborhoods(4, 1)[3].tolist() == [3]


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(2, 10))
def test_bounded_positions_stay_in_box(seed, d, S):
    seen = []

    def obj(x):
        seen.append(np.array(x))
        return float(np.sum((x - 2.0) ** 2))

    optimize(obj, d, PsoParams(swarm_size=S, neighbors=min(3, S), max_iterations=15, seed=seed, bounds=(np.zeros(d), np.ones(d))))
    X = np.array(seen)
    assert X.min() >= 0.0 and X.max() <= 1.0


@given(st.integers(0, 2**32 - 1))
def test_deterministic(seed):
    params = PsoParams(swarm_size=6, neighbors=3, max_iterations=10, seed=seed)
    a, b = optimize(bowl, 2, params), optimize(bowl, 2, params)
    np.testing.assert_array_equal(a[0], b[0])
    assert a[1] == b[1]
