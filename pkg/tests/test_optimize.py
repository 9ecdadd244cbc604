import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from posmnl.instances import example_instance, hard_instance, random_instance
from posmnl.model import EMPTY, GENERAL, MULTIPLICATIVE, Placement, expected_revenue
from posmnl.optimize import (
    ConvergenceError,
    EnumerationBudgetError,
    brute_force_optimize,
    dinkelbach_optimize,
    enumeration_size,
    max_weight_matching,
)


def all_matchings(N, K):
    for m in range(min(N, K) + 1):
        for S in itertools.combinations(range(N), m):
            for pos in itertools.permutations(range(K), m):
                yield tuple(zip(S, pos))


def best_matching_weight(W):
    W = np.asarray(W)
    return max(sum(W[i, k] for i, k in pairs if W[i, k] > 0) for pairs in all_matchings(*W.shape))


class TestMaxWeightMatching:
    def test_two_by_two(self):
        W = [[3, 1], [2, 4]]
        assert best_matching_weight(W) == 7
        placement, total = max_weight_matching(W)
        assert placement == Placement(((0, 0), (1, 1)))
        assert total == 7

    def test_non_positive(self):
        placement, total = max_weight_matching([[-1, 0], [-2, -0.5]])
        assert placement == EMPTY and total == 0

    def test_single_column(self):
        placement, total = max_weight_matching([[5], [2], [9]])
        assert placement == Placement(((2, 0),)) and total == 9

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            max_weight_matching([[np.nan, 1.0]])

    def test_ties_lexicographic(self):
        placement, _ = max_weight_matching(np.ones((4, 2)))
        assert placement == Placement(((0, 0), (1, 1)))

    def test_wide_matrix(self):
        W = np.array([[1.0, 5.0, 2.0]])
        placement, total = max_weight_matching(W)
        assert placement == Placement(((0, 1),)) and total == 5.0

    @settings(max_examples=80, deadline=None)
    @given(
        seed=st.integers(0, 10**6),
        N=st.integers(1, 6),
        K=st.integers(1, 4),
    )
    def test_matches_enumeration(self, seed, N, K):
        W = np.random.default_rng(seed).normal(size=(N, K))
        placement, total = max_weight_matching(W)
        assert total == pytest.approx(best_matching_weight(W), abs=1e-12)
        assert all(W[i, k] > 0 for i, k in placement)


class TestDinkelbach:
    def test_single_pair_trace(self):
        res = dinkelbach_optimize([1.0], [[1.0]])
        assert res.placement == Placement(((0, 0),))
        assert res.revenue == 0.5
        assert res.iterations == 2
        assert res.lambda_trace == (0.0, 0.5)

    def test_zero_revenues(self):
        res = dinkelbach_optimize(np.zeros(4), np.full((4, 2), 0.5))
        assert res.placement == EMPTY and res.revenue == 0.0 and res.iterations == 1

    def test_example4_against_brute_force(self):
        inst = example_instance(4)
        d = dinkelbach_optimize(inst.revenues, inst.V)
        b = brute_force_optimize(inst.revenues, inst.V)
        assert d.revenue == pytest.approx(b.revenue, abs=1e-9)
        assert d.placement == b.placement

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError) as info:
            dinkelbach_optimize(example_instance(3).revenues, example_instance(3).V, max_iter=1)
        assert info.value.lambda_trace[0] == 0.0

    def test_zero_attraction_edge_ignored(self):
        res = dinkelbach_optimize([1.0, 0.9], [[0.0], [0.5]])
        assert res.placement == Placement(((1, 0),))

    def test_warm_start_same_answer(self):
        inst = example_instance(6)
        cold = dinkelbach_optimize(inst.revenues, inst.V)
        warm = dinkelbach_optimize(inst.revenues, inst.V, lambda_init=0.5)
        assert warm.placement == cold.placement
        assert warm.revenue == pytest.approx(cold.revenue, abs=1e-12)

    def test_epsilon_stops_early(self):
        inst = example_instance(3)
        exact = dinkelbach_optimize(inst.revenues, inst.V)
        loose = dinkelbach_optimize(inst.revenues, inst.V, epsilon=0.5)
        assert loose.iterations < exact.iterations

    @pytest.mark.parametrize("seed", range(40))
    @pytest.mark.parametrize("kind", [MULTIPLICATIVE, GENERAL])
    def test_oracle_equivalence(self, seed, kind):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(1, 7))
        K = int(rng.integers(1, min(N, 3) + 1))
        inst = random_instance(N, K, kind, seed)
        d = dinkelbach_optimize(inst.revenues, inst.V)
        b = brute_force_optimize(inst.revenues, inst.V)
        assert abs(d.revenue - b.revenue) <= 1e-9
        assert expected_revenue(inst, d.placement) == pytest.approx(d.revenue, abs=1e-9)
        trace = d.lambda_trace
        assert all(b2 >= a for a, b2 in zip(trace, trace[1:]))
        assert trace[-1] == pytest.approx(d.revenue, abs=1e-9)
        assert d.iterations <= 10

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10**6), bump=st.floats(0.0, 1.0))
    def test_dominance(self, seed, bump):
        inst = random_instance(5, 3, GENERAL, seed)
        rng = np.random.default_rng(seed)
        i, k = int(rng.integers(5)), int(rng.integers(3))
        V2 = inst.V.copy()
        V2[i, k] += bump
        assert dinkelbach_optimize(inst.revenues, V2).revenue >= dinkelbach_optimize(inst.revenues, inst.V).revenue - 1e-12

    @pytest.mark.parametrize("inst", [example_instance(i) for i in range(1, 7)] + [hard_instance(8, 2, 1000)],
                             ids=lambda x: x.name)
    def test_corpus_iterations(self, inst):
        res = dinkelbach_optimize(inst.revenues, inst.V)
        assert res.iterations <= 10


class TestBruteForce:
    def test_single(self):
        res = brute_force_optimize([1.0], [[1.0]])
        assert res.revenue == 0.5 and res.placement == Placement(((0, 0),))

    def test_two_products_one_slot(self):
        res = brute_force_optimize([1.0, 1.0], [[0.2], [0.9]])
        assert res.placement == Placement(((1, 0),))
        assert res.revenue == pytest.approx(0.9 / 1.9, abs=1e-15)

    def test_zero_revenues(self):
        res = brute_force_optimize([0.0, 0.0], [[0.5], [0.5]])
        assert res.placement == EMPTY and res.revenue == 0.0

    def test_budget(self):
        assert enumeration_size(1, 1) == 2
        assert enumeration_size(2, 1) == 3
        with pytest.raises(EnumerationBudgetError):
            brute_force_optimize(np.ones(30), np.ones((30, 10)))


def test_badly_scaled_matrix_terminates():
    r = [0.12857020276919962, 0.49927786244011496, 0.6014983576233575,
         0.02868900837194455, 0.14792608457745593, 0.9282110229603695]
    V = np.full((6, 3), 0.01)
    V[:, 1] = 1.0
    V[1] = [1113.3376229579774, 111333.76229579773, 1113.3376229579774]
    res = dinkelbach_optimize(r, V, lambda_init=0.4992157091745849)
    b = brute_force_optimize(r, V)
    assert res.revenue == pytest.approx(b.revenue, abs=1e-12)
    assert res.iterations <= 3
