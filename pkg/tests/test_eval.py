import numpy as np
import pytest

from facq.acquire import StoppingRule
from facq.baselines import FactPolicy, RandomPolicy, StaticOrder, StaticOrderPolicy
from facq.data import Dataset
from facq.evaluate import (CostCurve, auacc, acquisition_order_matrix,
                           compare_policies, simulate, total_cost)
from test_acquire import toy_bundle


def curve(costs, accs):
    return CostCurve("x", np.asarray(costs, float), np.asarray(accs, float), 1)


def toy_test_set(b, n=20, seed=0):
    rng = np.random.default_rng(seed)
    d = b.architecture.d
    feats = rng.random((n, d)) * 0.9      # inside the 4-bit representable range
    y = rng.integers(0, b.architecture.n_classes, n)
    return Dataset("t", feats, y, [f"f{i}" for i in range(d)],
                   b.architecture.n_classes)


class TestAuacc:
    def test_constant_curve_scores_its_accuracy(self):
        assert auacc(curve([0, 1, 2], [0.8, 0.8, 0.8])) == pytest.approx(0.8)

    def test_linear_ramp_scores_half_peak(self):
        # accuracy rising linearly 0 -> 1 integrates to 1/2
        assert auacc(curve([0, 10], [0.0, 1.0])) == pytest.approx(0.5)

    def test_cost_rescaling_invariant(self):
        c1 = curve([0, 1, 3, 6], [0.2, 0.6, 0.9, 0.9])
        c2 = curve([0, 7, 21, 42], [0.2, 0.6, 0.9, 0.9])
        assert auacc(c1) == pytest.approx(auacc(c2))

    def test_area_stops_at_convergence(self):
        # flat tail after reaching the max must not dilute the area
        early = curve([0, 1, 2], [0.0, 1.0, 1.0])
        late = curve([0, 1, 2, 50], [0.0, 1.0, 1.0, 1.0])
        assert auacc(early) == pytest.approx(auacc(late))

    def test_front_loaded_beats_back_loaded(self):
        fast = curve([0, 1, 4], [0.3, 0.9, 0.95])
        slow = curve([0, 3, 4], [0.3, 0.4, 0.95])
        assert auacc(fast) > auacc(slow)

    def test_single_point_returns_it(self):
        assert auacc(curve([0.0], [0.7])) == pytest.approx(0.7)


class TestAccuracyAtCost:
    def test_interpolates_between_steps(self):
        c = curve([0, 2], [0.0, 1.0])
        assert c.accuracy_at_cost(1.0) == pytest.approx(0.5)

    def test_flat_beyond_ends(self):
        c = curve([0, 2], [0.1, 0.9])
        assert c.accuracy_at_cost(99.0) == pytest.approx(0.9)
        assert c.accuracy_at_cost(-1.0) == pytest.approx(0.1)


class TestSimulate:
    def test_exhaustion_runs_all_steps(self):
        b = toy_bundle(d=4)
        res = simulate(b, toy_test_set(b), FactPolicy())
        assert res.stop_step == 4
        assert res.curve.costs[0] == 0.0
        assert res.curve.costs[-1] == pytest.approx(total_cost(b))
        assert np.all(res.order_matrix > 0)

    def test_order_matrix_ranks_are_permutations(self):
        b = toy_bundle(d=4)
        res = simulate(b, toy_test_set(b), RandomPolicy(1))
        for row in res.order_matrix:
            assert sorted(row.tolist()) == [1, 2, 3, 4]

    def test_static_policy_gives_identical_rows(self):
        b = toy_bundle(d=3)
        order = StaticOrder(["f1", "f2", "f0"], [0.3, 0.2, 0.1], [1.0] * 3)
        res = simulate(b, toy_test_set(b), StaticOrderPolicy(order))
        assert np.all(res.order_matrix == res.order_matrix[0])
        assert res.order_matrix[0].tolist() == [3, 1, 2]

    def test_per_instance_costs_match_acquired_units(self):
        b = toy_bundle(d=3, costs=np.array([1.0, 2.0, 4.0]))
        res = simulate(b, toy_test_set(b), FactPolicy())
        assert np.all(res.step_costs[:, -1] == 7.0)

    def test_deterministic_policy_reproduces(self):
        b = toy_bundle(d=3)
        r1 = simulate(b, toy_test_set(b), FactPolicy())
        r2 = simulate(b, toy_test_set(b), FactPolicy())
        assert np.array_equal(r1.order_matrix, r2.order_matrix)
        assert np.array_equal(r1.curve.accuracies, r2.curve.accuracies)

    def test_accuracy_fraction_truncates_curve(self):
        b = toy_bundle(d=4)
        full = simulate(b, toy_test_set(b), FactPolicy())
        cut = simulate(b, toy_test_set(b), FactPolicy(),
                       StoppingRule("accuracy_fraction", 0.0))
        assert cut.stop_step == 0
        assert len(cut.curve.costs) == 1
        assert np.all(cut.order_matrix == 0)
        assert full.stop_step == 4

    def test_budget_stops_early(self):
        b = toy_bundle(d=4)
        res = simulate(b, toy_test_set(b), FactPolicy(),
                       StoppingRule("budget", 1.0))
        assert res.stop_step < 4

    def test_empty_test_split_rejected(self):
        b = toy_bundle(d=3)
        empty = Dataset("e", np.empty((0, 3)), np.empty(0, dtype=int),
                        list("abc"), 2)
        with pytest.raises(ValueError):
            simulate(b, empty, FactPolicy())


class TestComparePolicies:
    def test_deterministic_policy_zero_width_ci(self):
        b = toy_bundle(d=3)
        reports = compare_policies(b, toy_test_set(b), [FactPolicy()],
                                   seeds=[0, 1, 2])
        r = reports[0]
        np.testing.assert_allclose(r.ci_low, r.ci_high)

    def test_stochastic_policy_gets_one_run_per_seed(self):
        b = toy_bundle(d=3)
        reports = compare_policies(b, toy_test_set(b, n=40),
                                   [RandomPolicy(0)], seeds=[0, 1, 2, 3])
        r = reports[0]
        assert np.any(r.ci_high > r.ci_low)

    def test_summary_fields(self):
        b = toy_bundle(d=3)
        r = compare_policies(b, toy_test_set(b), [FactPolicy()])[0]
        d = r.to_dict()
        assert d["policy"] == "fact"
        assert set(d["accuracy_at_fraction"]) == \
            {"0%", "25%", "50%", "75%", "100%"}
        assert 0.0 <= d["auacc"] <= 1.0
        assert d["convergence_cost"] <= total_cost(b)


class TestOrderMatrix:
    def test_shape_and_sampling(self):
        b = toy_bundle(d=3)
        m = acquisition_order_matrix(b, toy_test_set(b, n=30), FactPolicy(),
                                     n_samples=10)
        assert m.shape == (10, 3)
        assert np.all((m >= 1) & (m <= 3))
