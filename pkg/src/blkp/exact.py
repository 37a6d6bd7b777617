"""Exact bilevel oracle: branch-and-bound over the leader's variables.

Every complete leader assignment is completed by the follower-response
solver, so every leaf yields a bilevel-feasible solution. Partial
assignments are pruned with a fractional-knapsack bound over the
remaining leader items plus all follower items, valued at leader profits;
the bound relaxes both integrality and the follower's rationality, so it
is always valid.

The feasible solutions found along the way form a pool that doubles as a
source of supervised training labels.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .knapsack import Mode, follower_response


@dataclass
class ExactResult:
    opt_x: np.ndarray
    opt_y: np.ndarray
    opt_value: int
    pool: list = field(default_factory=list)  # (x, y, leader_value), descending value
    node_count: int = 0
    elapsed: float = 0.0
    proven_optimal: bool = True
    mode: Mode = Mode.OPTIMISTIC


@dataclass(frozen=True)
class SearchLimits:
    max_nodes: int | None = None
    time_budget: float | None = None


class _FractionalBound:
    """Greedy fractional upper bound, reusable across capacities.

    Items (weights, leader profits) are sorted once by profit density;
    each query is a prefix-sum lookup plus one fractional item.
    """

    def __init__(self, weights, profits):
        weights = np.asarray(weights, dtype=np.float64)
        profits = np.asarray(profits, dtype=np.float64)
        order = np.argsort(-(profits / weights), kind="stable")
        self.w = weights[order]
        self.p = profits[order]
        self.cum_w = np.concatenate(([0.0], np.cumsum(self.w)))
        self.cum_p = np.concatenate(([0.0], np.cumsum(self.p)))

    def bound(self, capacity: float, active: np.ndarray | None = None) -> float:
        if active is None:
            cum_w, cum_p, w, p = self.cum_w, self.cum_p, self.w, self.p
        else:
            w = self.w[active]
            p = self.p[active]
            cum_w = np.concatenate(([0.0], np.cumsum(w)))
            cum_p = np.concatenate(([0.0], np.cumsum(p)))
        k = int(np.searchsorted(cum_w, capacity, side="right")) - 1
        val = cum_p[k]
        if k < len(w):
            val += (capacity - cum_w[k]) * p[k] / w[k]
        return float(val)


def solve_exact(inst, mode: Mode = Mode.OPTIMISTIC,
                limits: SearchLimits | None = None) -> ExactResult:
    """Depth-first branch-and-bound over leader assignments.

    Branching order is decreasing d1/a1 density, trying x_i = 1 first.
    If the node or time limit is hit the incumbent is returned with
    proven_optimal = False.
    """
    mode = Mode(mode)
    limits = limits or SearchLimits()
    start = time.perf_counter()

    order = np.argsort(-(inst.d1.astype(np.float64) / inst.a1), kind="stable")
    a1o = inst.a1[order].astype(int)
    n1 = inst.n1

    # Bound items: leader items in branch order followed by all follower items.
    bound_calc = _FractionalBound(
        np.concatenate([inst.a1[order], inst.a2]),
        np.concatenate([inst.d1[order], inst.d2]),
    )
    # position of each branch-order leader item inside the sorted bound arrays
    n_total = n1 + inst.n2
    comb_w = np.concatenate([inst.a1[order], inst.a2]).astype(np.float64)
    comb_p = np.concatenate([inst.d1[order], inst.d2]).astype(np.float64)
    comb_order = np.argsort(-(comb_p / comb_w), kind="stable")
    pos_of = np.empty(n_total, dtype=int)
    pos_of[comb_order] = np.arange(n_total)
    leader_pos = pos_of[:n1]

    d1o = inst.d1[order].astype(int)
    pool: dict[tuple, tuple] = {}
    best_value = None
    best_x = best_y = None
    node_count = 0
    truncated = False

    x_assign = np.zeros(n1, dtype=np.int64)

    def out_of_budget():
        if limits.max_nodes is not None and node_count >= limits.max_nodes:
            return True
        if limits.time_budget is not None and time.perf_counter() - start > limits.time_budget:
            return True
        return False

    def recurse(depth: int, used_weight: int, fixed_profit: int, active: np.ndarray):
        nonlocal best_value, best_x, best_y, node_count, truncated
        if truncated:
            return
        node_count += 1
        if out_of_budget():
            truncated = True
            return
        if depth == n1:
            x = np.zeros(n1, dtype=np.int64)
            x[order] = x_assign
            resp = follower_response(inst, x, mode)
            key = tuple(int(v) for v in x)
            if key not in pool:
                pool[key] = (x, resp.y, resp.leader_value)
            if best_value is None or resp.leader_value > best_value:
                best_value = resp.leader_value
                best_x, best_y = x, resp.y
            return
        # prune: fixed profit + fractional relaxation of everything undecided
        if best_value is not None:
            ub = fixed_profit + bound_calc.bound(inst.b - used_weight, active)
            if ub <= best_value:
                return
        w = a1o[depth]
        sub_active = active.copy()
        sub_active[leader_pos[depth]] = False
        if used_weight + w <= inst.b:
            x_assign[depth] = 1
            recurse(depth + 1, used_weight + w, fixed_profit + d1o[depth], sub_active)
        x_assign[depth] = 0
        recurse(depth + 1, used_weight, fixed_profit, sub_active)

    recurse(0, 0, 0, np.ones(n_total, dtype=bool))

    if best_value is None:
        # budget exhausted before any leaf: fall back to the all-zeros leader
        x = np.zeros(n1, dtype=np.int64)
        resp = follower_response(inst, x, mode)
        best_value, best_x, best_y = resp.leader_value, x, resp.y
        pool[tuple(x)] = (x, resp.y, resp.leader_value)
        truncated = True

    entries = sorted(pool.values(), key=lambda e: (-e[2], tuple(e[0])))
    return ExactResult(
        opt_x=best_x, opt_y=best_y, opt_value=int(best_value),
        pool=entries, node_count=node_count,
        elapsed=time.perf_counter() - start,
        proven_optimal=not truncated, mode=mode,
    )


def collect_labels(result: ExactResult, k: int = 10) -> list:
    """Pick the optimal leader vector plus up to k best distinct others.

    Returns (x, leader_value) pairs, best first; fewer when the pool is
    small.
    """
    if not result.pool:
        raise ValueError("result pool is empty")
    labels = [(result.opt_x, result.opt_value)]
    seen = {tuple(int(v) for v in result.opt_x)}
    for x, _y, value in result.pool:
        if len(labels) >= k + 1:
            break
        key = tuple(int(v) for v in x)
        if key in seen:
            continue
        seen.add(key)
        labels.append((x, value))
    return labels
