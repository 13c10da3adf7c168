"""K-fold contrastive training of the two-tower embedding model.

The training corpus is a list of (sketch feature, object view-feature
stack) pairs, each tagged with a group label: embeddings sharing a label
are pulled together, everything else is pushed apart.  Groups — not
individual pairs — are split across folds, so no group ever straddles a
train/validation boundary.  Each fold trains its own model from a
fold-specific seeded init; at query time the fold models vote by keeping,
per object, the maximum similarity any model assigns (max voting).
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DataError, TrainingError
from ..seeding import rng_for
from .encoder import (
    EmbeddingModel,
    MlpParams,
    ObjectEncoderParams,
    TransformerEncoderParams,
    flatten_object_grads,
    flatten_sketch_grads,
    init_embedding_model,
    mlp_backward,
    mlp_forward,
    model_param_dict,
    model_param_items,
    object_embed_backward,
    object_embed_forward,
)
from .loss import nt_xent_loss, paired_batch
from .optim import AdamWState, adamw_step, step_lr

CHECKPOINT_MAGIC = b"RSCK"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainingPair:
    """One supervision example: a sketch descriptor and its target object.

    ``ring_features`` is the object's (rings, views, feature) descriptor
    stack; ``group_id`` links the pair to every other pair it should be
    embedded close to (at minimum, pairs of the same object).
    """

    sketch_feature: np.ndarray
    ring_features: np.ndarray
    object_id: str
    group_id: str

    def __post_init__(self) -> None:
        sketch = np.asarray(self.sketch_feature, dtype=np.float64)
        rings = np.asarray(self.ring_features, dtype=np.float64)
        if sketch.ndim != 1 or sketch.size == 0:
            raise TrainingError("sketch_feature must be a non-empty vector")
        if rings.ndim != 3:
            raise TrainingError("ring_features must be (rings, views, features)")
        if not (np.all(np.isfinite(sketch)) and np.all(np.isfinite(rings))):
            raise TrainingError("training pair contains non-finite values")
        object.__setattr__(self, "sketch_feature", sketch)
        object.__setattr__(self, "ring_features", rings)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for k-fold contrastive training."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 1e-2
    step_size: int = 10
    gamma: float = 0.5
    epochs: int = 20
    batch_size: int = 8
    folds: int = 5
    seed: int = 0
    temperature: float = 0.5
    include_positive_in_denominator: bool = False
    model_dim: int = 64
    hidden_dim: int = 128
    embed_dim: int = 64
    dropout_rate: float = 0.1

    def __post_init__(self) -> None:
        if not self.lr > 0.0:
            raise TrainingError("lr must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise TrainingError("betas must lie in [0, 1)")
        if not self.eps > 0.0:
            raise TrainingError("eps must be positive")
        if self.weight_decay < 0.0:
            raise TrainingError("weight_decay must be non-negative")
        if self.step_size < 1:
            raise TrainingError("step_size must be at least 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise TrainingError("gamma must lie in [0, 1]")
        if self.epochs < 1:
            raise TrainingError("epochs must be at least 1")
        if self.batch_size < 2:
            raise TrainingError("batch_size must be at least 2")
        if self.folds < 2:
            raise TrainingError("folds must be at least 2")
        if not self.temperature > 0.0:
            raise TrainingError("temperature must be positive")
        if min(self.model_dim, self.hidden_dim, self.embed_dim) < 1:
            raise TrainingError("model dimensions must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise TrainingError("dropout_rate must lie in [0, 1)")


@dataclass(frozen=True)
class LogRow:
    """One line of the training log.  Epoch 0 is the pre-training baseline."""

    epoch: int
    fold: int
    lr: float
    train_loss: float
    val_loss: float


@dataclass(frozen=True)
class TrainResult:
    models: tuple[EmbeddingModel, ...]
    log: tuple[LogRow, ...]
    fold_val_indices: tuple[tuple[int, ...], ...]
    config: TrainConfig


def _check_pairs(pairs: list[TrainingPair]) -> None:
    if not pairs:
        raise TrainingError("no training pairs given")
    sketch_dim = pairs[0].sketch_feature.shape[0]
    ring_shape = pairs[0].ring_features.shape
    for pair in pairs:
        if pair.sketch_feature.shape[0] != sketch_dim:
            raise TrainingError("sketch feature lengths differ across pairs")
        if pair.ring_features.shape != ring_shape:
            raise TrainingError("ring feature shapes differ across pairs")


def split_groups_into_folds(group_ids, folds: int, seed: int):
    """Assign group labels round-robin to ``folds`` folds, shuffled by seed.

    Returns a list of ``folds`` sorted tuples of group labels.  Every group
    lands in exactly one fold.
    """
    unique = sorted(set(group_ids))
    if len(unique) < folds:
        raise TrainingError(
            f"need at least {folds} distinct groups for {folds}-fold training, got {len(unique)}"
        )
    order = rng_for(seed, "fold_split").permutation(len(unique))
    assignment: list[list[str]] = [[] for _ in range(folds)]
    for position, group_index in enumerate(order):
        assignment[position % folds].append(unique[group_index])
    return [tuple(sorted(groups)) for groups in assignment]


def _batch_loss(model: EmbeddingModel, batch_pairs, config: TrainConfig,
                train_mode: bool = False, rng: np.random.Generator | None = None):
    """Embed one batch and evaluate the contrastive loss.

    Returns ``(loss, d_objects, d_sketches, object_caches, sketch_caches)``;
    the gradient pieces are ``None`` when the batch has no valid loss (all
    pairs share one group, so no denominator survives).
    """
    groups = [pair.group_id for pair in batch_pairs]
    if len(set(groups)) < 2 and not config.include_positive_in_denominator:
        return None
    object_embs = []
    sketch_embs = []
    object_caches = []
    sketch_caches = []
    for pair in batch_pairs:
        obj_emb, obj_cache = object_embed_forward(
            model.object_tower, pair.ring_features, train_mode, rng
        )
        sk_emb, sk_cache = mlp_forward(
            model.sketch_tower, pair.sketch_feature, train_mode, rng
        )
        object_embs.append(obj_emb)
        sketch_embs.append(sk_emb)
        object_caches.append(obj_cache)
        sketch_caches.append(sk_cache)
    batch = paired_batch(
        np.vstack(object_embs), np.vstack(sketch_embs), groups, config.temperature
    )
    loss, d_z = nt_xent_loss(batch, config.include_positive_in_denominator)
    n = len(batch_pairs)
    return loss, d_z[:n], d_z[n:], object_caches, sketch_caches


def _dataset_loss(model: EmbeddingModel, pairs, order, config: TrainConfig) -> float:
    """Mean batch loss over a dataset in a fixed order, dropout off."""
    total = 0.0
    weight = 0
    for start in range(0, len(order), config.batch_size):
        chunk = [pairs[i] for i in order[start : start + config.batch_size]]
        if len(chunk) < 2:
            continue
        result = _batch_loss(model, chunk, config, train_mode=False)
        if result is None:
            continue
        total += result[0] * len(chunk)
        weight += len(chunk)
    if weight == 0:
        raise TrainingError("no scoreable batches; too few distinct groups")
    return total / weight


def _train_one_fold(pairs, train_idx, val_idx, fold: int, config: TrainConfig):
    feature_dim = pairs[0].ring_features.shape[2]
    sketch_dim = pairs[0].sketch_feature.shape[0]
    model = init_embedding_model(
        rng_for(config.seed, f"fold{fold}/init"),
        object_feature_dim=feature_dim,
        sketch_feature_dim=sketch_dim,
        model_dim=config.model_dim,
        hidden_dim=config.hidden_dim,
        embed_dim=config.embed_dim,
        dropout_rate=config.dropout_rate,
    )
    params = model_param_dict(model)
    state = AdamWState()
    shuffle_rng = rng_for(config.seed, f"fold{fold}/order")
    dropout_rng = rng_for(config.seed, f"fold{fold}/dropout")
    val_order = rng_for(config.seed, f"fold{fold}/val_order").permutation(len(val_idx))
    val_sequence = [val_idx[i] for i in val_order]

    log: list[LogRow] = []

    def evaluate(epoch: int, lr: float, train_loss: float | None) -> None:
        measured_train = (
            train_loss
            if train_loss is not None
            else _dataset_loss(model, pairs, list(train_idx), config)
        )
        val_loss = _dataset_loss(model, pairs, val_sequence, config)
        log.append(LogRow(epoch=epoch, fold=fold, lr=lr,
                          train_loss=measured_train, val_loss=val_loss))

    evaluate(0, step_lr(config.lr, config.step_size, config.gamma, 0), None)

    for epoch in range(config.epochs):
        lr = step_lr(config.lr, config.step_size, config.gamma, epoch)
        order = shuffle_rng.permutation(len(train_idx))
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            chunk_idx = order[start : start + config.batch_size]
            if len(chunk_idx) < 2:
                continue
            chunk = [pairs[train_idx[i]] for i in chunk_idx]
            result = _batch_loss(model, chunk, config, train_mode=True, rng=dropout_rng)
            if result is None:
                continue
            loss, d_objects, d_sketches, object_caches, sketch_caches = result
            grads = {path: np.zeros_like(arr) for path, arr in params.items()}
            for i in range(len(chunk)):
                obj_grads = flatten_object_grads(
                    object_embed_backward(model.object_tower, d_objects[i], object_caches[i])
                )
                _, sk_raw = mlp_backward(model.sketch_tower, d_sketches[i], sketch_caches[i])
                sk_grads = flatten_sketch_grads(sk_raw)
                for path, value in obj_grads.items():
                    grads[path] += value
                for path, value in sk_grads.items():
                    grads[path] += value
            adamw_step(
                params, grads, state, lr,
                beta1=config.beta1, beta2=config.beta2,
                eps=config.eps, weight_decay=config.weight_decay,
            )
            epoch_losses.append(loss)
        if not epoch_losses:
            raise TrainingError(
                f"fold {fold} epoch {epoch + 1}: every batch was skipped; "
                "too few distinct groups for contrastive updates"
            )
        evaluate(epoch + 1, lr, float(np.mean(epoch_losses)))

    return model, log


def train_kfold(pairs: list[TrainingPair], config: TrainConfig | None = None) -> TrainResult:
    """Train ``config.folds`` models on group-disjoint folds of ``pairs``.

    Fold f's model validates on fold f's groups and trains on all others.
    The result carries every model, the full training log (epoch 0 rows are
    the untrained baseline), and the validation pair indices per fold.
    Training is deterministic given ``config.seed``.
    """
    config = config or TrainConfig()
    pairs = list(pairs)
    _check_pairs(pairs)
    fold_groups = split_groups_into_folds(
        [pair.group_id for pair in pairs], config.folds, config.seed
    )
    group_to_fold = {g: f for f, groups in enumerate(fold_groups) for g in groups}
    n_groups = len(group_to_fold)
    largest_fold = max(len(groups) for groups in fold_groups)
    if n_groups - largest_fold < 2 and not config.include_positive_in_denominator:
        raise TrainingError(
            "each training side needs at least 2 distinct groups; add groups or folds"
        )

    fold_val_indices = tuple(
        tuple(i for i, pair in enumerate(pairs) if group_to_fold[pair.group_id] == f)
        for f in range(config.folds)
    )
    for f, idx in enumerate(fold_val_indices):
        if not idx:
            raise TrainingError(f"fold {f} received no validation pairs")

    models = []
    log: list[LogRow] = []
    for f in range(config.folds):
        val_idx = list(fold_val_indices[f])
        train_idx = [i for i in range(len(pairs)) if i not in set(val_idx)]
        model, fold_log = _train_one_fold(pairs, train_idx, val_idx, f, config)
        models.append(model)
        log.extend(fold_log)
    return TrainResult(
        models=tuple(models),
        log=tuple(log),
        fold_val_indices=fold_val_indices,
        config=config,
    )


def training_log_csv(log) -> str:
    """Render log rows as CSV: epoch,fold,lr,train_loss,val_loss."""
    lines = ["epoch,fold,lr,train_loss,val_loss"]
    for row in log:
        lines.append(
            f"{row.epoch},{row.fold},{row.lr:.9g},{row.train_loss:.9g},{row.val_loss:.9g}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Ensemble scoring (max voting).
# ---------------------------------------------------------------------------


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise TrainingError("zero-norm embedding in similarity")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def ensemble_similarity(models, ring_features: np.ndarray, sketch_feature: np.ndarray) -> float:
    """Max over fold models of cosine(object embedding, sketch embedding)."""
    models = list(models)
    if not models:
        raise TrainingError("ensemble_similarity needs at least one model")
    best = -np.inf
    for model in models:
        obj_emb, _ = object_embed_forward(model.object_tower, ring_features)
        sk_emb, _ = mlp_forward(model.sketch_tower, np.asarray(sketch_feature, dtype=np.float64))
        best = max(best, _cosine(obj_emb, sk_emb))
    return float(best)


def embed_objects(models, ring_feature_stacks) -> np.ndarray:
    """Embed many objects under every model: (models, objects, embed_dim)."""
    models = list(models)
    if not models:
        raise TrainingError("need at least one model")
    stacks = list(ring_feature_stacks)
    out = np.empty((len(models), len(stacks), models[0].embed_dim))
    for m, model in enumerate(models):
        for o, stack in enumerate(stacks):
            emb, _ = object_embed_forward(model.object_tower, stack)
            out[m, o] = emb
    return out


def embed_sketch(models, sketch_feature: np.ndarray) -> np.ndarray:
    """Embed one sketch under every model: (models, embed_dim)."""
    models = list(models)
    if not models:
        raise TrainingError("need at least one model")
    out = np.empty((len(models), models[0].embed_dim))
    feature = np.asarray(sketch_feature, dtype=np.float64)
    for m, model in enumerate(models):
        emb, _ = mlp_forward(model.sketch_tower, feature)
        out[m] = emb
    return out


# ---------------------------------------------------------------------------
# Checkpoints: binary container with a JSON manifest and float32 weights.
# ---------------------------------------------------------------------------


def _model_arrays(model: EmbeddingModel):
    return list(model_param_items(model))


def save_checkpoint(path, models, config: TrainConfig) -> None:
    """Write an ensemble checkpoint.

    Layout: magic, version byte, u32 JSON-manifest length, the manifest
    (model count, per-array paths and shapes, config), then every weight
    array as little-endian float32 in manifest order.
    """
    models = list(models)
    if not models:
        raise TrainingError("cannot checkpoint an empty ensemble")
    manifest_models = []
    blobs = []
    for model in models:
        entries = []
        for name, arr in _model_arrays(model):
            entries.append([name, list(arr.shape)])
            blobs.append(np.asarray(arr, dtype="<f4").tobytes())
        manifest_models.append(entries)
    manifest = {
        "config": asdict(config),
        "models": manifest_models,
    }
    payload = json.dumps(manifest, sort_keys=True).encode("utf-8")
    buf = io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    buf.write(struct.pack("<B", CHECKPOINT_VERSION))
    buf.write(struct.pack("<I", len(payload)))
    buf.write(payload)
    for blob in blobs:
        buf.write(blob)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def _rebuild_model(arrays: dict, dropout_rate: float) -> EmbeddingModel:
    def encoder(prefix: str) -> TransformerEncoderParams:
        return TransformerEncoderParams(
            wq=arrays[f"{prefix}.wq"], wk=arrays[f"{prefix}.wk"],
            wv=arrays[f"{prefix}.wv"], wo=arrays[f"{prefix}.wo"],
            w1=arrays[f"{prefix}.w1"], b1=arrays[f"{prefix}.b1"],
            w2=arrays[f"{prefix}.w2"], b2=arrays[f"{prefix}.b2"],
            ln1_gain=arrays[f"{prefix}.ln1_gain"], ln1_bias=arrays[f"{prefix}.ln1_bias"],
            ln2_gain=arrays[f"{prefix}.ln2_gain"], ln2_bias=arrays[f"{prefix}.ln2_bias"],
        )

    def mlp(prefix: str) -> MlpParams:
        return MlpParams(
            w1=arrays[f"{prefix}.w1"], b1=arrays[f"{prefix}.b1"],
            w2=arrays[f"{prefix}.w2"], b2=arrays[f"{prefix}.b2"],
            dropout_rate=dropout_rate,
        )

    tower = ObjectEncoderParams(
        w_in=arrays["object.w_in"],
        b_in=arrays["object.b_in"],
        ring_encoder=encoder("object.ring_encoder"),
        object_encoders=(encoder("object.encoder0"), encoder("object.encoder1")),
        projection=mlp("object.projection"),
    )
    return EmbeddingModel(object_tower=tower, sketch_tower=mlp("sketch"))


def load_checkpoint(path):
    """Read an ensemble checkpoint; returns ``(models, config)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 9 or raw[:4] != CHECKPOINT_MAGIC:
        raise DataError("not an embedding checkpoint")
    version = raw[4]
    if version != CHECKPOINT_VERSION:
        raise DataError(f"unsupported checkpoint version {version}")
    (json_len,) = struct.unpack_from("<I", raw, 5)
    header_end = 9 + json_len
    if len(raw) < header_end:
        raise DataError("truncated checkpoint manifest")
    manifest = json.loads(raw[9:header_end].decode("utf-8"))
    config = TrainConfig(**manifest["config"])
    offset = header_end
    models = []
    for entries in manifest["models"]:
        arrays = {}
        for name, shape in entries:
            count = int(np.prod(shape)) if shape else 1
            nbytes = 4 * count
            if len(raw) < offset + nbytes:
                raise DataError("truncated checkpoint weights")
            flat = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
            arrays[name] = flat.reshape(shape).astype(np.float64)
            offset += nbytes
        models.append(_rebuild_model(arrays, config.dropout_rate))
    if offset != len(raw):
        raise DataError("checkpoint has trailing bytes")
    return models, config
