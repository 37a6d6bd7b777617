"""Tripartite input graph: leader nodes, follower nodes, one capacity node.

Connectivity is implicit and never materialized: every leader node is
adjacent to every follower node, the capacity node is adjacent to all item
nodes, and there are no intra-group edges or edge features. Only the
normalized node features are stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NormalizationScheme:
    """How raw integer data maps to network inputs.

    Profits and weights are divided by value_scale; the capacity is
    divided by the total item weight, which makes the capacity feature a
    scale-free fill ratio.
    """

    value_scale: float = 1000.0
    version: int = 1

    def to_dict(self):
        return {"value_scale": self.value_scale, "version": self.version}

    @classmethod
    def from_dict(cls, doc):
        return cls(value_scale=float(doc["value_scale"]), version=int(doc["version"]))


DEFAULT_NORM = NormalizationScheme()


@dataclass
class TripartiteGraph:
    leader_feats: np.ndarray    # (n1, 2): weight, leader profit
    follower_feats: np.ndarray  # (n2, 3): weight, leader profit, follower profit
    cap_feat: float
    norm: NormalizationScheme

    @property
    def n1(self) -> int:
        return self.leader_feats.shape[0]

    @property
    def n2(self) -> int:
        return self.follower_feats.shape[0]

    @property
    def node_count(self) -> int:
        return self.n1 + self.n2 + 1


def build_graph(inst, norm: NormalizationScheme = DEFAULT_NORM) -> TripartiteGraph:
    s = norm.value_scale
    leader = np.stack([inst.a1 / s, inst.d1 / s], axis=1)
    follower = np.stack([inst.a2 / s, inst.d2 / s, inst.c / s], axis=1)
    cap = inst.b / inst.total_weight
    return TripartiteGraph(leader_feats=leader, follower_feats=follower,
                           cap_feat=float(cap), norm=norm)
