"""Desk-scale federated learning substrate.

The model is multinomial logistic regression stored as one flat parameter
vector (a weight matrix plus a bias row), trained with minibatch SGD and an
optional proximal pull toward an anchor. The built-in task is a seeded
mixture of Gaussian blobs; anything tabular can be swapped in through the
CSV loader. Training quality is deliberately modest: the model exists so
that communication and scheduling effects dominate, while parameter counts
for payload sizing can be set independently of it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np

VALID_PARAM_BITS = (8, 10, 16, 32)


@dataclass(frozen=True)
class ClientDataset:
    """An immutable feature/label table, optionally tied to a client id."""

    features: np.ndarray
    labels: np.ndarray
    client_id: int = -1

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must be 1-d and match the feature row count")

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass
class ModelParams:
    """Flat parameter vector with the bookkeeping the protocols need.

    Attributes:
        values: Flat float64 vector: row-major (classes x dims) weights
            followed by the per-class biases.
        sample_count: Number of samples behind these values; aggregation
            weight.
        round_tag: Global round the values are based on; used for staleness.
        epochs_trained: Cumulative local epochs accounted to these values.
    """

    values: np.ndarray
    sample_count: int = 0
    round_tag: int = 0
    epochs_trained: int = 0

    def copy(self) -> "ModelParams":
        return replace(self, values=self.values.copy())


@dataclass(frozen=True)
class TrainConfig:
    """Local training hyperparameters and the on-board compute model.

    throughput_samples_per_s converts dataset size into epoch wall time;
    max_gap_epochs caps how many epochs are actually executed when a
    strategy trains for a whole contact gap (the convex desk model converges
    long before any realistic gap runs out).
    """

    batch_size: int = 32
    local_epochs: int = 1
    learning_rate: float = 0.05
    prox_mu: float = 0.0
    min_epochs: int = 1
    throughput_samples_per_s: float = 2000.0
    max_gap_epochs: int = 100

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.local_epochs < 1:
            raise ValueError(f"local_epochs must be >= 1, got {self.local_epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.prox_mu < 0:
            raise ValueError(f"prox_mu must be >= 0, got {self.prox_mu}")
        if self.min_epochs < 1:
            raise ValueError(f"min_epochs must be >= 1, got {self.min_epochs}")
        if self.throughput_samples_per_s <= 0:
            raise ValueError("throughput_samples_per_s must be positive")
        if self.max_gap_epochs < 1:
            raise ValueError(f"max_gap_epochs must be >= 1, got {self.max_gap_epochs}")


def synthetic_blobs(
    seed: int,
    num_classes: int = 10,
    dim: int = 16,
    train_per_class: int = 200,
    test_per_class: int = 50,
) -> tuple[ClientDataset, ClientDataset]:
    """Seeded Gaussian-blob classification task, (train, held-out test).

    Class centers are drawn once from a scaled normal so the task is well
    separated (near-perfect Bayes accuracy); unit-variance samples are drawn
    around them. Identical seeds give identical datasets.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    centers = rng.normal(0.0, 1.0, size=(num_classes, dim)) * 3.0

    def draw(per_class: int) -> tuple[np.ndarray, np.ndarray]:
        feats = np.concatenate(
            [centers[c] + rng.normal(0.0, 1.0, size=(per_class, dim)) for c in range(num_classes)]
        )
        labels = np.repeat(np.arange(num_classes), per_class)
        return feats, labels

    train_x, train_y = draw(train_per_class)
    test_x, test_y = draw(test_per_class)
    return ClientDataset(train_x, train_y), ClientDataset(test_x, test_y)


def load_csv_dataset(path) -> ClientDataset:
    """Load a dense CSV with feature columns followed by a final 'label' column."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[-1] != "label":
            raise ValueError(f"dataset {path} must end with a 'label' column")
        rows = [[float(v) for v in row] for row in reader]
    if not rows:
        raise ValueError(f"dataset {path} has no rows")
    data = np.asarray(rows, dtype=float)
    return ClientDataset(data[:, :-1], data[:, -1].astype(np.int64))


def partition(
    dataset: ClientDataset,
    num_clients: int,
    shards_per_client: int = 2,
    seed: int = 0,
) -> list[ClientDataset]:
    """Label-shard split: sort by label, deal equal shards to clients.

    Samples are sorted by label, cut into num_clients*shards_per_client
    contiguous equal shards (a tail remainder is dropped), and the shards
    are dealt out in a seed-shuffled order, shards_per_client each. With
    exact sharding every client sees at most shards_per_client distinct
    labels, which is the non-IID regime of interest.

    Raises:
        ValueError: If more shards are requested than there are samples.
    """
    if num_clients < 1 or shards_per_client < 1:
        raise ValueError("num_clients and shards_per_client must be >= 1")
    total_shards = num_clients * shards_per_client
    shard_size = len(dataset) // total_shards
    if shard_size < 1:
        raise ValueError(
            f"{total_shards} shards requested but only {len(dataset)} samples available"
        )
    order = np.argsort(dataset.labels, kind="stable")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    shard_order = rng.permutation(total_shards)
    clients = []
    for k in range(num_clients):
        mine = shard_order[k * shards_per_client : (k + 1) * shards_per_client]
        idx = np.sort(np.concatenate([order[s * shard_size : (s + 1) * shard_size] for s in mine]))
        clients.append(ClientDataset(dataset.features[idx], dataset.labels[idx], client_id=k))
    return clients


def init_params(num_classes: int, dim: int) -> ModelParams:
    """Zero-initialized model; predicts class 0 everywhere."""
    return ModelParams(values=np.zeros(num_classes * (dim + 1), dtype=float))


def _unpack(values: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    num_classes = values.shape[0] // (dim + 1)
    if num_classes * (dim + 1) != values.shape[0]:
        raise ValueError(f"parameter length {values.shape[0]} does not fit feature dim {dim}")
    w = values[: num_classes * dim].reshape(num_classes, dim)
    b = values[num_classes * dim :]
    return w, b


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def loss_and_gradient(
    values: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    prox_mu: float = 0.0,
    anchor: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient over one batch.

    With prox_mu > 0 the objective gains (mu/2)*||values - anchor||^2, the
    standard proximal pull toward the last global model.
    """
    n, dim = features.shape
    w, b = _unpack(values, dim)
    probs = _softmax(features @ w.T + b)
    picked = np.clip(probs[np.arange(n), labels], 1e-12, None)
    loss = float(-np.mean(np.log(picked)))
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    grad_w = delta.T @ features / n
    grad_b = delta.mean(axis=0)
    grad = np.concatenate([grad_w.ravel(), grad_b])
    if prox_mu > 0.0:
        if anchor is None:
            raise ValueError("prox_mu > 0 requires an anchor")
        loss += 0.5 * prox_mu * float(np.sum((values - anchor) ** 2))
        grad = grad + prox_mu * (values - anchor)
    return loss, grad


def local_train(
    params: ModelParams,
    data: ClientDataset,
    cfg: TrainConfig,
    rng: np.random.Generator,
    epochs: int | None = None,
    anchor: np.ndarray | None = None,
) -> ModelParams:
    """Run minibatch SGD locally and return the updated parameters.

    Args:
        params: Starting parameters; not modified.
        data: This client's samples; must be non-empty.
        cfg: Hyperparameters; cfg.prox_mu > 0 adds the proximal term.
        rng: Generator driving the per-epoch shuffles; pass a stream derived
            from (seed, round, client) for reproducibility.
        epochs: Override for cfg.local_epochs; zero is allowed and returns
            the inputs unchanged (an accepted no-op for gap-driven callers).
        anchor: Proximal anchor; defaults to the starting values.

    Returns:
        New ModelParams carrying this client's sample count and an epoch
        counter increased by the epochs actually run.
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    run_epochs = cfg.local_epochs if epochs is None else epochs
    if run_epochs < 0:
        raise ValueError(f"epochs must be >= 0, got {run_epochs}")
    values = params.values.copy()
    anchor_vec = params.values.copy() if (cfg.prox_mu > 0 and anchor is None) else anchor
    n = len(data)
    for _ in range(run_epochs):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            _, grad = loss_and_gradient(
                values, data.features[idx], data.labels[idx], cfg.prox_mu, anchor_vec
            )
            values -= cfg.learning_rate * grad
    return ModelParams(
        values=values,
        sample_count=n,
        round_tag=params.round_tag,
        epochs_trained=params.epochs_trained + run_epochs,
    )


def train_rng(seed: int, round_idx: int, client_id: int) -> np.random.Generator:
    """Deterministic per-(round, client) shuffle stream."""
    return np.random.default_rng(np.random.SeedSequence([seed, 2, round_idx, client_id]))


def aggregate(updates: Iterable[ModelParams]) -> ModelParams:
    """Sample-count-weighted mean of client updates.

    Raises:
        ValueError: On an empty list, mismatched shapes, or zero total
            weight.
    """
    ups = list(updates)
    if not ups:
        raise ValueError("nothing to aggregate")
    shape = ups[0].values.shape
    if any(u.values.shape != shape for u in ups):
        raise ValueError("updates have mismatched parameter shapes")
    total = sum(u.sample_count for u in ups)
    if total <= 0:
        raise ValueError("total sample count must be positive")
    stacked = np.stack([u.values for u in ups])
    weights = np.asarray([u.sample_count for u in ups], dtype=float)
    return ModelParams(
        values=np.average(stacked, axis=0, weights=weights),
        sample_count=total,
        round_tag=max(u.round_tag for u in ups),
        epochs_trained=max(u.epochs_trained for u in ups),
    )


def aggregate_in_place(updates: Iterator[ModelParams]) -> ModelParams:
    """Streaming weighted mean: one accumulator, no stacking.

    Consumes the iterator once and keeps a single weighted-sum vector, so
    peak auxiliary memory is one parameter vector regardless of how many
    updates stream through. Matches aggregate() to floating-point noise.
    """
    acc: np.ndarray | None = None
    total = 0
    tag = 0
    epochs = 0
    for u in updates:
        if acc is None:
            acc = u.values * float(u.sample_count)
        else:
            if u.values.shape != acc.shape:
                raise ValueError("updates have mismatched parameter shapes")
            acc += u.values * float(u.sample_count)
        total += u.sample_count
        tag = max(tag, u.round_tag)
        epochs = max(epochs, u.epochs_trained)
    if acc is None:
        raise ValueError("nothing to aggregate")
    if total <= 0:
        raise ValueError("total sample count must be positive")
    return ModelParams(values=acc / total, sample_count=total, round_tag=tag, epochs_trained=epochs)


def evaluate(params: ModelParams, data: ClientDataset) -> float:
    """Argmax accuracy on a dataset; prediction ties go to the lowest class."""
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    w, b = _unpack(params.values, data.features.shape[1])
    preds = np.argmax(data.features @ w.T + b, axis=1)
    return float(np.mean(preds == data.labels))


def payload_bytes(param_count: int, bits_per_param: int = 32) -> int:
    """Serialized model size: ceil(param_count * bits / 8).

    Raises:
        ValueError: If bits_per_param is not one of 8, 10, 16, 32, or the
            count is negative.
    """
    if bits_per_param not in VALID_PARAM_BITS:
        raise ValueError(f"bits_per_param must be one of {VALID_PARAM_BITS}, got {bits_per_param}")
    if param_count < 0:
        raise ValueError(f"param_count must be >= 0, got {param_count}")
    return (param_count * bits_per_param + 7) // 8


def quantize_roundtrip(values: np.ndarray, bits_per_param: int) -> np.ndarray:
    """Uniform-quantization round trip as experienced by a transmitted model.

    Values are snapped to 2^bits evenly spaced levels spanning their own
    range; 32 bits is treated as lossless passthrough. A constant vector is
    returned unchanged.
    """
    if bits_per_param not in VALID_PARAM_BITS:
        raise ValueError(f"bits_per_param must be one of {VALID_PARAM_BITS}, got {bits_per_param}")
    if bits_per_param == 32:
        return values.copy()
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return values.copy()
    step = (hi - lo) / (2**bits_per_param - 1)
    return lo + np.round((values - lo) / step) * step


def epoch_time_s(sample_count: int, throughput_samples_per_s: float) -> float:
    """Wall time of one local epoch under the on-board compute model."""
    if throughput_samples_per_s <= 0:
        raise ValueError("throughput must be positive")
    if sample_count < 0:
        raise ValueError("sample_count must be >= 0")
    return sample_count / throughput_samples_per_s
