"""Exact 0/1 knapsack DP and the follower-response solver.

The follower's reaction to a fixed leader vector is computed in a single
knapsack call with lexicographically combined profits: the primary term
ranks by follower profit, the secondary term breaks ties by leader profit
(maximized in optimistic mode, minimized in pessimistic mode).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

INT64_MAX = np.iinfo(np.int64).max


class Mode(str, Enum):
    OPTIMISTIC = "optimistic"
    PESSIMISTIC = "pessimistic"


class OverflowRiskError(ValueError):
    """Combined profits would not fit a 64-bit accumulator."""


class InfeasibleLeader(ValueError):
    """The leader's selection alone exceeds the knapsack capacity."""


@dataclass
class FollowerResponse:
    y: np.ndarray
    z_star: int
    leader_value: int
    mode: Mode
    residual_capacity: int


def knapsack_max(profits, weights, capacity: int):
    """Exact 0/1 knapsack maximization.

    Returns (optimal value, 0/1 selection). Ties inside the DP are broken
    toward not taking an item, so the selection is deterministic.
    """
    profits = np.asarray(profits, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.int64)
    if profits.shape != weights.shape or profits.ndim != 1:
        raise ValueError("profits and weights must be 1-D arrays of equal length")
    if capacity < 0:
        raise ValueError("capacity must be >= 0")
    if (profits < 0).any():
        raise ValueError("profits must be non-negative")
    if (weights < 1).any():
        raise ValueError("weights must be positive")
    n = len(profits)
    if sum(int(p) for p in profits) > INT64_MAX:
        raise OverflowRiskError("sum of profits exceeds the 64-bit accumulator bound")

    dp = np.zeros(capacity + 1, dtype=np.int64)
    take = np.zeros((n, capacity + 1), dtype=bool)
    for i in range(n):
        w = int(weights[i])
        p = int(profits[i])
        if w > capacity:
            continue
        cand = dp[: capacity + 1 - w] + p
        better = cand > dp[w:]
        dp[w:] = np.where(better, cand, dp[w:])
        take[i, w:] = better

    selection = np.zeros(n, dtype=np.int64)
    cap = capacity
    for i in range(n - 1, -1, -1):
        if take[i, cap]:
            selection[i] = 1
            cap -= int(weights[i])
    return int(dp[capacity]), selection


def follower_response(inst, x_bar, mode: Mode = Mode.OPTIMISTIC) -> FollowerResponse:
    """Solve the follower's problem for a fixed leader vector.

    Primary objective: maximize follower profit under the residual
    capacity. Among the follower-optimal selections, the leader profit of
    follower items is maximized (optimistic) or minimized (pessimistic).
    Both stages collapse into one knapsack with combined profits
    M * c_j + secondary_j, where M exceeds any attainable secondary sum.
    """
    mode = Mode(mode)
    x_bar = np.asarray(x_bar, dtype=np.int64)
    if x_bar.shape != (inst.n1,):
        raise ValueError(f"x_bar must have length {inst.n1}")
    residual = inst.b - int(inst.a1 @ x_bar)
    if residual < 0:
        raise InfeasibleLeader(f"leader weight exceeds capacity by {-residual}")

    # Secondary term: +d2 maximizes, -d2 minimizes the leader profit among
    # follower optima. A per-item offset (e.g. max(d2) - d2) would bias the
    # tie-break toward larger selections, so the signed value is used; the
    # combined profit stays positive because c_j >= 1 and M > d2_j.
    sign = 1 if mode is Mode.OPTIMISTIC else -1
    m = 1 + sum(int(v) for v in inst.d2)
    combined = [m * int(cj) + sign * int(dj) for cj, dj in zip(inst.c, inst.d2)]
    if sum(combined) > INT64_MAX:
        raise OverflowRiskError("combined lexicographic profits exceed 64-bit range")

    _, y = knapsack_max(np.asarray(combined, dtype=np.int64), inst.a2, residual)
    z_star = int(inst.c @ y)
    leader_value = int(inst.d1 @ x_bar) + int(inst.d2 @ y)
    return FollowerResponse(y=y, z_star=z_star, leader_value=leader_value,
                            mode=mode, residual_capacity=residual)


@dataclass
class BilevelEvaluation:
    bilevel_feasible: bool
    rational_and_mode_consistent: bool
    leader_obj: int
    follower_obj: int


def evaluate_bilevel(inst, x, y, mode: Mode = Mode.OPTIMISTIC) -> BilevelEvaluation:
    """Judge a candidate (x, y) pair.

    Feasible: shared capacity holds and y attains the follower's optimal
    profit. Consistent: additionally y matches the mode's tie-break
    optimum on the leader profit of follower items.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != (inst.n1,) or y.shape != (inst.n2,):
        raise ValueError("x/y length mismatch")
    leader_obj = int(inst.d1 @ x) + int(inst.d2 @ y)
    follower_obj = int(inst.c @ y)
    weight = int(inst.a1 @ x) + int(inst.a2 @ y)
    if weight > inst.b:
        return BilevelEvaluation(False, False, leader_obj, follower_obj)
    resp = follower_response(inst, x, mode)
    feasible = follower_obj == resp.z_star
    consistent = feasible and int(inst.d2 @ y) == int(inst.d2 @ resp.y)
    return BilevelEvaluation(feasible, consistent, leader_obj, follower_obj)
