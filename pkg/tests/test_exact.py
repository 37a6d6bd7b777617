import numpy as np
import pytest

from blkp.exact import SearchLimits, collect_labels, solve_exact
from blkp.instance import BlkpInstance
from blkp.knapsack import Mode, evaluate_bilevel

from _oracles import bilevel_brute, random_instance


def test_tiny_instance_optimum():
    inst = BlkpInstance(1, 1, a1=[2], d1=[3], a2=[2], d2=[5], c=[4], b=2)
    res = solve_exact(inst)
    assert res.opt_value == 5
    assert res.opt_x.tolist() == [0]
    assert res.opt_y.tolist() == [1]
    assert res.proven_optimal


def test_everything_fits():
    rng = np.random.default_rng(0)
    inst = random_instance(rng, 4, 4)
    inst = BlkpInstance(4, 4, inst.a1, inst.d1, inst.a2, inst.d2, inst.c,
                        inst.total_weight)
    res = solve_exact(inst)
    assert res.opt_value == int(inst.d1.sum() + inst.d2.sum())
    assert res.opt_x.tolist() == [1] * 4
    assert res.opt_y.tolist() == [1] * 4


@pytest.mark.parametrize("mode", list(Mode))
def test_matches_double_enumeration(mode):
    rng = np.random.default_rng(5)
    for _ in range(40):
        inst = random_instance(rng, int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        res = solve_exact(inst, mode)
        brute = bilevel_brute(inst, mode)
        assert res.opt_value == brute[2]
        ev = evaluate_bilevel(inst, res.opt_x, res.opt_y, mode)
        assert ev.bilevel_feasible and ev.rational_and_mode_consistent


def test_pool_entries_feasible_sorted_distinct():
    rng = np.random.default_rng(6)
    inst = random_instance(rng, 6, 6)
    res = solve_exact(inst)
    values = [v for _, _, v in res.pool]
    assert values == sorted(values, reverse=True)
    assert all(v <= res.opt_value for v in values)
    keys = {tuple(x) for x, _, _ in res.pool}
    assert len(keys) == len(res.pool)
    for x, y, v in res.pool[:5]:
        ev = evaluate_bilevel(inst, x, y)
        assert ev.bilevel_feasible
        assert ev.leader_obj == v


def test_root_bound_dominates_optimum():
    # the fractional relaxation bound at the empty assignment must be >= opt
    from blkp.exact import _FractionalBound
    rng = np.random.default_rng(7)
    for _ in range(50):
        inst = random_instance(rng, 5, 5)
        bound = _FractionalBound(
            np.concatenate([inst.a1, inst.a2]),
            np.concatenate([inst.d1, inst.d2]))
        assert bound.bound(inst.b) >= solve_exact(inst).opt_value - 1e-9


def test_limits_produce_flagged_incumbent():
    rng = np.random.default_rng(8)
    inst = random_instance(rng, 10, 10)
    res = solve_exact(inst, limits=SearchLimits(max_nodes=3))
    assert not res.proven_optimal
    ev = evaluate_bilevel(inst, res.opt_x, res.opt_y)
    assert ev.bilevel_feasible


def test_collect_labels_small_pool():
    inst = BlkpInstance(1, 1, a1=[2], d1=[3], a2=[2], d2=[5], c=[4], b=2)
    res = solve_exact(inst)
    labels = collect_labels(res, k=10)
    assert len(labels) <= 3
    assert labels[0][1] == res.opt_value
    assert np.array_equal(labels[0][0], res.opt_x)


def test_collect_labels_ordering_and_k_zero():
    rng = np.random.default_rng(9)
    inst = random_instance(rng, 7, 7)
    res = solve_exact(inst)
    labels = collect_labels(res, k=5)
    values = [v for _, v in labels]
    assert values == sorted(values, reverse=True)
    assert len({tuple(x) for x, _ in labels}) == len(labels)
    only_opt = collect_labels(res, k=0)
    assert len(only_opt) == 1
    assert only_opt[0][1] == res.opt_value
