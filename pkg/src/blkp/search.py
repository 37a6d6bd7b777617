"""Sampling-based solution search over the predicted final values.

Each of N samples rounds the leader vector from the per-item
probabilities: values in [0, theta] are fixed to 0, values in
[1 - theta, 1] are fixed to 1, the rest are Bernoulli draws. Every
distinct feasible leader vector is completed by the follower-response
solver once (memoized) and the best leader objective wins. The all-zeros
leader vector is always evaluated as a feasible fallback.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .knapsack import Mode, follower_response
from .pnanet import forward


@dataclass(frozen=True)
class SearchConfig:
    theta: float = 0.2
    n_samples: int = 10
    mode: Mode = Mode.OPTIMISTIC
    seed: int = 0
    deterministic_rounding: bool = False

    def __post_init__(self):
        if not (0.0 <= self.theta <= 0.5):
            raise ValueError("theta must lie in [0, 0.5]")
        if self.n_samples < 1:
            raise ValueError("need at least one sample")

    def to_dict(self):
        return {
            "theta": self.theta,
            "n_samples": self.n_samples,
            "mode": Mode(self.mode).value,
            "seed": self.seed,
            "deterministic_rounding": self.deterministic_rounding,
        }


@dataclass
class SearchResult:
    best_x: np.ndarray
    best_y: np.ndarray
    best_value: int
    samples_evaluated: int = 0
    samples_infeasible: int = 0
    distinct_x_count: int = 0
    elapsed: float = 0.0


def _round_deterministic(values: np.ndarray, theta: float) -> np.ndarray:
    # fix-to-1 interval checked first, so a value of exactly 0.5 at
    # theta = 0.5 rounds to 1
    x = np.zeros(len(values), dtype=np.int64)
    x[values >= 1.0 - theta] = 1
    return x


def solution_search(inst, final_values, cfg: SearchConfig) -> SearchResult:
    final_values = np.asarray(final_values, dtype=np.float64).ravel()
    if final_values.shape != (inst.n1,):
        raise ValueError(f"final_values must have length {inst.n1}")
    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    mode = Mode(cfg.mode)

    fix0 = final_values <= cfg.theta
    fix1 = final_values >= 1.0 - cfg.theta
    free = ~(fix0 | fix1)
    base = np.zeros(inst.n1, dtype=np.int64)
    base[fix1] = 1

    if cfg.deterministic_rounding:
        candidates = [_round_deterministic(final_values, cfg.theta)]
    else:
        candidates = []
        probs = final_values[free]
        for _ in range(cfg.n_samples):
            x = base.copy()
            if probs.size:
                x[free] = (rng.random(probs.size) < probs).astype(np.int64)
            candidates.append(x)

    memo = {}
    best = None
    evaluated = 0
    infeasible = 0
    for x in candidates:
        evaluated += 1
        if int(inst.a1 @ x) > inst.b:
            infeasible += 1
            continue
        key = tuple(int(v) for v in x)
        if key not in memo:
            memo[key] = follower_response(inst, x, mode)
        resp = memo[key]
        if best is None or resp.leader_value > best[2]:
            best = (x, resp.y, resp.leader_value)

    # guaranteed-feasible fallback
    zeros = np.zeros(inst.n1, dtype=np.int64)
    zkey = tuple(zeros)
    if zkey not in memo:
        memo[zkey] = follower_response(inst, zeros, mode)
    resp = memo[zkey]
    if best is None or resp.leader_value > best[2]:
        best = (zeros, resp.y, resp.leader_value)

    return SearchResult(
        best_x=best[0], best_y=best[1], best_value=int(best[2]),
        samples_evaluated=evaluated, samples_infeasible=infeasible,
        distinct_x_count=len(memo), elapsed=time.perf_counter() - start,
    )


def solve_heuristic(inst, params, cfg: SearchConfig, norm=None) -> SearchResult:
    """Forward pass plus sampling search; the end-to-end entry point."""
    from .graphrep import DEFAULT_NORM
    values = forward(inst, params, norm=norm or DEFAULT_NORM)
    return solution_search(inst, values, cfg)
