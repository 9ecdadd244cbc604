import itertools
import math

import numpy as np
import pytest

from posmnl.instances import EXPEDIA_SHAPES, HardInstanceSpec, example_instance, hard_instance, random_instance
from posmnl.model import GENERAL, MULTIPLICATIVE, InstanceError, Placement, expected_revenue
from posmnl.optimize import brute_force_optimize


class TestExamples:
    def test_example1(self):
        inst = example_instance(1)
        assert inst.theta.tolist() == [1.0, 0.5]
        assert inst.v.tolist() == [0.25, 0.4, 0.8]
        assert inst.revenues.tolist() == [0.8, 0.75, 0.5]

    def test_example2(self):
        inst = example_instance(2)
        assert (inst.N, inst.K) == (5, 3)
        assert inst.theta.tolist() == [1.0, 0.5, 1 / 3]

    def test_example3(self):
        inst = example_instance(3)
        assert (inst.N, inst.K) == (30, 10)
        assert inst.theta[9] == pytest.approx(0.1, abs=1e-15)
        assert inst.v[29] == pytest.approx(1 / 30, abs=1e-15)
        assert inst.revenues[29] == pytest.approx(39 / 40, abs=1e-15)
        assert inst.revenues[0] == pytest.approx(0.25, abs=1e-15)

    def test_example4(self):
        inst = example_instance(4)
        assert inst.V[4].tolist() == [0.1, 0.1, 0.1]
        assert inst.revenues.tolist() == [0.9, 0.8, 0.9, 0.6, 0.5]

    @pytest.mark.parametrize("id, shape, kind", [
        (1, (3, 2), MULTIPLICATIVE), (2, (5, 3), MULTIPLICATIVE), (3, (30, 10), MULTIPLICATIVE),
        (4, (5, 3), GENERAL), (5, (8, 4), GENERAL), (6, (10, 5), GENERAL),
    ])
    def test_shapes(self, id, shape, kind):
        inst = example_instance(id)
        assert inst.V.shape == shape and inst.kind == kind

    def test_unknown(self):
        with pytest.raises(ValueError):
            example_instance(7)

    def test_expedia_shapes(self):
        assert EXPEDIA_SHAPES[9] == (70, 20)
        assert all(K <= N for N, K in EXPEDIA_SHAPES.values())


class TestHardInstance:
    def test_epsilon(self):
        inst = hard_instance(8, 2, 1000)
        want = math.sqrt(16 / 243_000)
        assert abs(inst.meta["epsilon"] - want) <= 1e-9
        # six-digit sanity check; the exact value is 0.0081144083...
        assert inst.meta["epsilon"] == pytest.approx(0.0081140, abs=5e-7)

    def test_optimum_is_target(self):
        inst = hard_instance(8, 2, 1000)
        eps = inst.meta["epsilon"]
        bf = brute_force_optimize(inst.revenues, inst.V)
        assert abs(bf.revenue - (1 + eps) / (2 + eps)) <= 1e-12
        assert bf.placement == Placement.from_one_based(inst.meta["target"])

    def test_disjoint_placement_half(self):
        inst = hard_instance(8, 2, 1000)
        target = Placement.from_one_based(inst.meta["target"])
        used = set(target.products)
        free = [i for i in range(8) if i not in used]
        for S in itertools.permutations(free, 2):
            pl = Placement(tuple(zip(S, range(2))))
            assert abs(expected_revenue(inst, pl) - 0.5) <= 1e-12

    @pytest.mark.parametrize("N, K, seed", [(8, 2, None), (8, 2, 4), (6, 3, 1)])
    def test_total_attraction(self, N, K, seed):
        inst = hard_instance(N, K, 5000, seed=seed)
        eps = inst.meta["epsilon"]
        target = set(map(tuple, Placement.from_one_based(inst.meta["target"]).pairs))
        for S in itertools.permutations(range(N), K):
            pairs = tuple(zip(S, range(K)))
            mismatch = sum(p not in target for p in pairs) / K
            total = sum(inst.V[i, k] for i, k in pairs)
            assert total == pytest.approx(1 + (1 - mismatch) * eps, abs=1e-12)

    def test_random_target_deterministic(self):
        a = hard_instance(10, 3, 1000, seed=5)
        b = hard_instance(10, 3, 1000, seed=5)
        assert a.meta["target"] == b.meta["target"]
        np.testing.assert_array_equal(a.V, b.V)

    def test_horizon_bound(self):
        with pytest.raises(InstanceError, match="4KN/243"):
            hard_instance(100, 10, 10)

    def test_target_size(self):
        with pytest.raises(InstanceError):
            HardInstanceSpec(8, 2, 1000, Placement(((0, 0),)))


class TestRandom:
    def test_deterministic(self):
        a, b = random_instance(6, 3, GENERAL, 9), random_instance(6, 3, GENERAL, 9)
        np.testing.assert_array_equal(a.V, b.V)
        np.testing.assert_array_equal(a.revenues, b.revenues)

    def test_theta_normalized(self):
        for seed in range(10):
            inst = random_instance(6, 3, MULTIPLICATIVE, seed)
            assert inst.theta.max() == 1.0
            assert (inst.v > 0).all() and (inst.v <= 1).all()

    def test_k_above_n(self):
        with pytest.raises(InstanceError):
            random_instance(2, 3)
