import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from posmnl.instances import example_instance, hard_instance, random_instance
from posmnl.model import (
    EMPTY,
    GENERAL,
    MULTIPLICATIVE,
    OUTSIDE,
    Instance,
    InstanceError,
    Placement,
    attraction,
    choice_distribution,
    dump_instance,
    expected_revenue,
    instance_from_dict,
    load_instance,
    sample_choice,
)

EX1_PLACEMENT = Placement(((0, 0), (2, 1)))


def exact_distribution(V, placement):
    """Eq.-free oracle: exact rational arithmetic on the attraction entries."""
    att = {i: Fraction(V[i][k]).limit_denominator(10**6) for i, k in placement}
    den = 1 + sum(att.values())
    out = {OUTSIDE: 1 / den}
    out.update({i: a / den for i, a in att.items()})
    return out


class TestPlacement:
    def test_sorted_and_hashable(self):
        assert Placement(((2, 1), (0, 0))) == Placement(((0, 0), (2, 1)))
        assert len({Placement(((2, 1), (0, 0))), Placement(((0, 0), (2, 1)))}) == 1

    @pytest.mark.parametrize("pairs", [((0, 0), (0, 1)), ((0, 1), (1, 1)), ((-1, 0),)])
    def test_rejects_invalid(self, pairs):
        with pytest.raises(InstanceError):
            Placement(pairs)

    def test_one_based_round_trip(self):
        p = Placement.from_one_based([[1, 1], [3, 2]])
        assert p == EX1_PLACEMENT
        assert p.to_one_based() == [[1, 1], [3, 2]]

    def test_check_against_instance(self):
        inst = example_instance(1)
        with pytest.raises(InstanceError):
            choice_distribution(inst, Placement(((0, 0), (1, 1), (2, 2))))
        with pytest.raises(InstanceError):
            expected_revenue(inst, Placement(((3, 0),)))


class TestAttraction:
    def test_unit(self):
        inst = Instance.multiplicative("u", [1.0], [1.0], [1.0])
        assert attraction(inst, 0, 0) == 1.0

    def test_example1(self):
        assert attraction(example_instance(1), 2, 1) == pytest.approx(0.4, abs=1e-15)

    def test_example4(self):
        assert attraction(example_instance(4), 2, 2) == 0.6

    def test_out_of_range(self):
        with pytest.raises(InstanceError):
            attraction(example_instance(1), 0, 2)


class TestChoiceDistribution:
    def test_empty(self):
        assert choice_distribution(example_instance(1), EMPTY) == {OUTSIDE: 1.0}

    def test_example1(self):
        p = choice_distribution(example_instance(1), EX1_PLACEMENT)
        want = {OUTSIDE: Fraction(20, 33), 0: Fraction(5, 33), 2: Fraction(8, 33)}
        assert exact_distribution(example_instance(1).V, EX1_PLACEMENT) == want
        for key, value in want.items():
            assert p[key] == pytest.approx(float(value), abs=1e-15)

    def test_single_unit_product(self):
        inst = Instance.general("one", [1.0], [[1.0]])
        p = choice_distribution(inst, Placement(((0, 0),)))
        assert p[0] == p[OUTSIDE] == 0.5

    def test_multiplicative_equals_general(self):
        for seed in range(20):
            m = random_instance(5, 3, MULTIPLICATIVE, seed)
            g = Instance.general("g", m.revenues, np.outer(m.v, m.theta))
            for S in itertools.combinations(range(5), 2):
                for pos in itertools.permutations(range(3), 2):
                    pl = Placement(tuple(zip(S, pos)))
                    assert choice_distribution(m, pl) == choice_distribution(g, pl)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10**6), kind=st.sampled_from([MULTIPLICATIVE, GENERAL]))
    def test_invariants(self, seed, kind):
        inst = random_instance(6, 3, kind, seed)
        rng = np.random.default_rng(seed)
        products = rng.choice(6, size=3, replace=False)
        pairs = []
        previous_p0 = 1.0
        for k, i in enumerate(products):
            pairs.append((int(i), k))
            p = choice_distribution(inst, Placement(tuple(pairs)))
            assert abs(sum(p.values()) - 1.0) <= 1e-12
            assert all(0 < x <= 1 for x in p.values())
            assert p[OUTSIDE] < previous_p0
            previous_p0 = p[OUTSIDE]
            rev = expected_revenue(inst, Placement(tuple(pairs)))
            assert 0 <= rev <= inst.revenues.max()


class TestExpectedRevenue:
    def test_empty(self):
        assert expected_revenue(example_instance(1), EMPTY) == 0.0

    def test_example1(self):
        assert expected_revenue(example_instance(1), EX1_PLACEMENT) == pytest.approx(8 / 33, abs=1e-15)

    def test_hard_instance_target(self):
        inst = hard_instance(8, 2, 1000)
        eps = inst.meta["epsilon"]
        target = Placement.from_one_based(inst.meta["target"])
        assert expected_revenue(inst, target) == pytest.approx((1 + eps) / (2 + eps), abs=1e-12)


class TestSampleChoice:
    def test_empty_is_outside(self):
        rng = np.random.default_rng(0)
        assert all(sample_choice(example_instance(1), EMPTY, rng) == OUTSIDE for _ in range(100))

    def test_goodness_of_fit(self):
        rng = np.random.default_rng(12345)
        inst = example_instance(1)
        draws = [sample_choice(inst, EX1_PLACEMENT, rng) for _ in range(100_000)]
        counts = [draws.count(OUTSIDE), draws.count(0), draws.count(2)]
        expected = np.array([20, 5, 8]) / 33 * 100_000
        assert stats.chisquare(counts, expected).pvalue > 0.001

    def test_deterministic(self):
        inst = example_instance(1)
        a = [sample_choice(inst, EX1_PLACEMENT, np.random.default_rng(7)) for _ in range(1)]
        r1, r2 = np.random.default_rng(7), np.random.default_rng(7)
        s1 = [sample_choice(inst, EX1_PLACEMENT, r1) for _ in range(1000)]
        s2 = [sample_choice(inst, EX1_PLACEMENT, r2) for _ in range(1000)]
        assert s1 == s2 and a[0] == s1[0]


class TestInstanceValidation:
    def test_theta_must_be_normalized(self):
        with pytest.raises(InstanceError, match="max"):
            Instance.multiplicative("x", [0.5, 0.5], [0.5, 0.5], [0.5])

    @pytest.mark.parametrize(
        "revenues, V, field",
        [([1.5], [[0.5]], r"revenues\[0\]"), ([0.5], [[0.0]], r"model.V\[0\]\[0\]"), ([0.5], [[1.2]], "model.V")],
    )
    def test_field_errors(self, revenues, V, field):
        with pytest.raises(InstanceError, match=field):
            Instance.general("x", revenues, V)

    def test_k_above_n(self):
        with pytest.raises(InstanceError):
            Instance.general("x", [0.5], [[0.5, 0.5]])

    def test_theta_min(self):
        assert example_instance(1).theta_min == 0.5
        assert example_instance(4).theta_min is None


class TestInstanceFile:
    @pytest.mark.parametrize("id", range(1, 7))
    def test_round_trip(self, tmp_path, id):
        inst = example_instance(id)
        dump_instance(inst, tmp_path / "i.json")
        back = load_instance(tmp_path / "i.json")
        assert back.to_dict() == inst.to_dict()
        assert back.kind == inst.kind
        np.testing.assert_array_equal(back.V, inst.V)

    def test_field_specific_error(self, tmp_path):
        doc = example_instance(1).to_dict()
        doc["model"]["theta"][1] = 2.0
        (tmp_path / "bad.json").write_text(json.dumps(doc))
        with pytest.raises(InstanceError, match=r"model.theta\[1\]"):
            load_instance(tmp_path / "bad.json")

    def test_syntax_error_has_line(self, tmp_path):
        (tmp_path / "bad.json").write_text('{\n  "name": "x",\n  oops\n}')
        with pytest.raises(InstanceError, match="line 3"):
            load_instance(tmp_path / "bad.json")

    @pytest.mark.parametrize(
        "patch, field",
        [
            ({"N": 0}, "N"),
            ({"K": 5}, "K"),
            ({"revenues": [0.1, 0.2]}, "revenues"),
            ({"model": {"type": "nested"}}, "model.type"),
            ({"model": {"type": "general", "V": [[0.1]] * 3}}, r"model.V\[0\]"),
        ],
    )
    def test_dict_errors(self, patch, field):
        doc = example_instance(1).to_dict()
        doc.update(patch)
        with pytest.raises(InstanceError, match=field):
            instance_from_dict(doc)
