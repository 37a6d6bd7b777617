"""Supervised training of the leader-solution predictor.

Labels come from the exact oracle's solution pool (optimum plus up to k
runner-up leader vectors per instance). The train/validation split is at
the instance level so no instance contributes to both sides. Each batch
loss is the mean binary cross-entropy over every leader-variable term in
the batch; one forward pass per distinct instance is shared by all of its
labels in the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ndiff
from .graphrep import DEFAULT_NORM, NormalizationScheme, build_graph
from .ndiff import Adam
from .pnanet import ModelParams, PnaConfig, forward_tensor


class TrainingDiverged(RuntimeError):
    """Loss became non-finite."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5000
    early_stop_patience: int = 500
    batch_size: int = 550  # in samples
    lr: float = 0.002
    weight_decay: float = 1e-6
    split: float = 0.8
    seed: int = 0
    labels_per_instance: int = 10

    def __post_init__(self):
        if not (0.0 < self.split < 1.0):
            raise ValueError("split must be in (0, 1)")
        if self.early_stop_patience > self.epochs:
            raise ValueError("patience must not exceed epochs")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("invalid batch_size/epochs")


@dataclass
class LabeledSample:
    instance_id: int
    x_label: np.ndarray
    weight: float = 1.0


@dataclass
class TrainResult:
    params: ModelParams
    history: list = field(default_factory=list)  # (train_loss, val_loss) per epoch
    best_val_loss: float = float("inf")
    best_epoch: int = -1
    initial_val_loss: float = float("nan")
    stopped_early: bool = False


def build_dataset(instances, labels_per_instance, cfg: TrainConfig):
    """Split labeled instances into train/validation sample lists.

    `labels_per_instance[i]` is the list of leader label vectors for
    `instances[i]`. The split is by instance; samples are shuffled with
    the config seed.
    """
    if len(instances) != len(labels_per_instance):
        raise ValueError("instances and labels must align")
    for i, labels in enumerate(labels_per_instance):
        if not labels:
            raise ValueError(f"instance {i} has no labels")
        for lab in labels:
            if np.asarray(lab).shape != (instances[i].n1,):
                raise ValueError(f"instance {i}: label length mismatch")
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(instances))
    n_train = int(round(cfg.split * len(instances)))
    train_ids = order[:n_train]
    val_ids = order[n_train:]

    def expand(ids):
        samples = [LabeledSample(int(i), np.asarray(lab, dtype=np.float64))
                   for i in ids for lab in labels_per_instance[i]]
        rng.shuffle(samples)
        return samples

    return expand(train_ids), expand(val_ids)


def _batch_loss(samples, graphs, params, cfg):
    """Mean BCE over all leader-variable terms of the batch (as a Tensor)."""
    by_instance = {}
    for s in samples:
        by_instance.setdefault(s.instance_id, []).append(s)
    parts = []
    total_terms = 0
    for iid, group in by_instance.items():
        pred = forward_tensor(graphs[iid], params, cfg)
        for s in group:
            parts.append(ndiff.bce_sum(pred, s.x_label))
            total_terms += s.x_label.size
    acc = parts[0]
    for p in parts[1:]:
        acc = ndiff.add(acc, p)
    return ndiff.affine_const(acc, 1.0 / total_terms)


def evaluate_loss(samples, graphs, params, cfg=None) -> float:
    cfg = cfg or params.cfg
    return float(_batch_loss(samples, graphs, params, cfg).data)


def train(instances, train_set, val_set, model_cfg: PnaConfig,
          train_cfg: TrainConfig, norm: NormalizationScheme = DEFAULT_NORM,
          init_seed: int = 0) -> TrainResult:
    """Mini-batch training with early stopping on validation loss.

    Returns the parameters from the best-validation epoch together with
    the per-epoch loss history.
    """
    if not train_set:
        raise ValueError("training set is empty")
    graphs = {i: build_graph(inst, norm) for i, inst in enumerate(instances)}
    params = ModelParams(model_cfg, seed=init_seed)
    opt = Adam(params.parameters(), lr=train_cfg.lr,
               weight_decay=train_cfg.weight_decay)
    rng = np.random.default_rng(train_cfg.seed + 1)

    result = TrainResult(params=params)
    if val_set:
        result.initial_val_loss = evaluate_loss(val_set, graphs, params, model_cfg)
    best_snapshot = params.snapshot()
    best_val = result.initial_val_loss if val_set else float("inf")
    best_epoch = -1
    since_improve = 0
    train_list = list(train_set)

    for epoch in range(train_cfg.epochs):
        rng.shuffle(train_list)
        epoch_loss = 0.0
        n_batches = 0
        for lo in range(0, len(train_list), train_cfg.batch_size):
            batch = train_list[lo:lo + train_cfg.batch_size]
            loss = _batch_loss(batch, graphs, params, model_cfg)
            if not np.isfinite(loss.data):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            epoch_loss += float(loss.data)
            n_batches += 1
        train_loss = epoch_loss / n_batches
        if val_set:
            val_loss = evaluate_loss(val_set, graphs, params, model_cfg)
        else:
            val_loss = train_loss
        result.history.append((train_loss, val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_snapshot = params.snapshot()
            since_improve = 0
        else:
            since_improve += 1
            if since_improve > train_cfg.early_stop_patience:
                result.stopped_early = True
                break

    params.restore(best_snapshot)
    result.best_val_loss = best_val
    result.best_epoch = best_epoch
    return result
