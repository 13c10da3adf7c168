"""Two-tower embedding model.

The object tower turns a stack of per-view descriptor vectors (one row per
rendered view, grouped into rings) into a single embedding:

    per-view linear lift -> shared ring encoder over each ring's views ->
    mean-pool views -> two stacked encoders over the ring vectors ->
    mean-pool rings -> projection MLP.

The sketch tower is just an MLP over the sketch descriptor.  Both towers
emit vectors of the same length so they can be compared with cosine
similarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .layers import (
    MlpParams,
    TransformerEncoderParams,
    init_mlp,
    init_transformer_encoder,
    mlp_backward,
    mlp_forward,
    transformer_encoder_backward,
    transformer_encoder_forward,
    xavier_uniform,
)

DEFAULT_MODEL_DIM = 64
DEFAULT_HIDDEN_DIM = 128
DEFAULT_EMBED_DIM = 64


@dataclass
class ObjectEncoderParams:
    """Parameters of the object tower.

    ``w_in``/``b_in`` lift each view descriptor to the model width.  One
    ``ring_encoder`` is shared across all rings; ``object_encoders`` are the
    two stacked blocks applied to the pooled ring vectors; ``projection``
    maps the pooled object vector to the embedding.
    """

    w_in: np.ndarray
    b_in: np.ndarray
    ring_encoder: TransformerEncoderParams
    object_encoders: tuple[TransformerEncoderParams, TransformerEncoderParams]
    projection: MlpParams

    def __post_init__(self) -> None:
        self.w_in = np.asarray(self.w_in, dtype=np.float64)
        self.b_in = np.asarray(self.b_in, dtype=np.float64)
        if self.w_in.ndim != 2:
            raise TrainingError("w_in must be a 2-D matrix")
        dim = self.w_in.shape[1]
        if self.b_in.shape != (dim,):
            raise TrainingError("b_in length must match w_in columns")
        self.object_encoders = tuple(self.object_encoders)
        if len(self.object_encoders) != 2:
            raise TrainingError("object_encoders must hold exactly 2 blocks")
        for enc in (self.ring_encoder, *self.object_encoders):
            if enc.dim != dim:
                raise TrainingError("all encoder blocks must share the model width")
        if self.projection.in_dim != dim:
            raise TrainingError("projection input must match the model width")

    @property
    def feature_dim(self) -> int:
        return self.w_in.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.projection.out_dim


@dataclass
class EmbeddingModel:
    """One trained two-tower model: object tower plus sketch tower."""

    object_tower: ObjectEncoderParams
    sketch_tower: MlpParams

    def __post_init__(self) -> None:
        if self.sketch_tower.out_dim != self.object_tower.embed_dim:
            raise TrainingError("towers must emit embeddings of equal length")

    @property
    def embed_dim(self) -> int:
        return self.object_tower.embed_dim


def init_object_encoder(
    rng: np.random.Generator,
    feature_dim: int,
    model_dim: int = DEFAULT_MODEL_DIM,
    hidden_dim: int = DEFAULT_HIDDEN_DIM,
    embed_dim: int = DEFAULT_EMBED_DIM,
    dropout_rate: float = 0.0,
) -> ObjectEncoderParams:
    return ObjectEncoderParams(
        w_in=xavier_uniform(rng, feature_dim, model_dim),
        b_in=np.zeros(model_dim),
        ring_encoder=init_transformer_encoder(rng, model_dim),
        object_encoders=(init_transformer_encoder(rng, model_dim), init_transformer_encoder(rng, model_dim)),
        projection=init_mlp(rng, model_dim, hidden_dim, embed_dim, dropout_rate),
    )


def init_embedding_model(
    rng: np.random.Generator,
    object_feature_dim: int,
    sketch_feature_dim: int,
    model_dim: int = DEFAULT_MODEL_DIM,
    hidden_dim: int = DEFAULT_HIDDEN_DIM,
    embed_dim: int = DEFAULT_EMBED_DIM,
    dropout_rate: float = 0.0,
) -> EmbeddingModel:
    return EmbeddingModel(
        object_tower=init_object_encoder(
            rng, object_feature_dim, model_dim, hidden_dim, embed_dim, dropout_rate
        ),
        sketch_tower=init_mlp(rng, sketch_feature_dim, hidden_dim, embed_dim, dropout_rate),
    )


def _check_ring_features(params: ObjectEncoderParams, ring_features: np.ndarray) -> np.ndarray:
    feats = np.asarray(ring_features, dtype=np.float64)
    if feats.ndim != 3:
        raise TrainingError(
            f"ring features must be (rings, views, features), got shape {feats.shape}"
        )
    if feats.shape[0] < 1 or feats.shape[1] < 1:
        raise TrainingError("ring features need at least one ring and one view")
    if feats.shape[2] != params.feature_dim:
        raise TrainingError(
            f"view feature length {feats.shape[2]} does not match tower input {params.feature_dim}"
        )
    if not np.all(np.isfinite(feats)):
        raise TrainingError("ring features contain non-finite values")
    return feats


def object_embed_forward(
    params: ObjectEncoderParams,
    ring_features: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
):
    """Embed one object from its (rings, views, features) descriptor stack."""
    feats = _check_ring_features(params, ring_features)
    n_rings, n_views, _ = feats.shape
    ring_caches = []
    ring_vectors = np.empty((n_rings, params.w_in.shape[1]))
    for r in range(n_rings):
        lifted = feats[r] @ params.w_in + params.b_in
        encoded, cache = transformer_encoder_forward(params.ring_encoder, lifted)
        ring_caches.append(cache)
        ring_vectors[r] = encoded.mean(axis=0)
    s1, obj_cache1 = transformer_encoder_forward(params.object_encoders[0], ring_vectors)
    s2, obj_cache2 = transformer_encoder_forward(params.object_encoders[1], s1)
    pooled = s2.mean(axis=0)
    embedding, proj_cache = mlp_forward(params.projection, pooled, train_mode, rng)
    cache = (feats, ring_caches, obj_cache1, obj_cache2, proj_cache, n_views)
    return embedding, cache


def object_embed(
    params: ObjectEncoderParams,
    ring_features: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Forward-only convenience wrapper around :func:`object_embed_forward`."""
    embedding, _ = object_embed_forward(params, ring_features, train_mode, rng)
    return embedding


def object_embed_backward(params: ObjectEncoderParams, d_embedding: np.ndarray, cache):
    """Gradients of a scalar loss w.r.t. every object-tower parameter."""
    feats, ring_caches, obj_cache1, obj_cache2, proj_cache, n_views = cache
    n_rings = feats.shape[0]
    d_pooled, proj_grads = mlp_backward(params.projection, d_embedding, proj_cache)
    d_s2 = np.repeat(d_pooled[None, :] / n_rings, n_rings, axis=0)
    d_s1, obj_grads2 = transformer_encoder_backward(params.object_encoders[1], d_s2, obj_cache2)
    d_ring_vectors, obj_grads1 = transformer_encoder_backward(params.object_encoders[0], d_s1, obj_cache1)

    ring_grads = None
    d_w_in = np.zeros_like(params.w_in)
    d_b_in = np.zeros_like(params.b_in)
    for r in range(n_rings):
        d_encoded = np.repeat(d_ring_vectors[r][None, :] / n_views, n_views, axis=0)
        d_lifted, grads_r = transformer_encoder_backward(params.ring_encoder, d_encoded, ring_caches[r])
        if ring_grads is None:
            ring_grads = grads_r
        else:
            for key in ring_grads:
                ring_grads[key] += grads_r[key]
        d_w_in += feats[r].T @ d_lifted
        d_b_in += d_lifted.sum(axis=0)

    return {
        "w_in": d_w_in,
        "b_in": d_b_in,
        "ring_encoder": ring_grads,
        "object_encoders": (obj_grads1, obj_grads2),
        "projection": proj_grads,
    }


def sketch_embed(
    params: MlpParams,
    sketch_feature: np.ndarray,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    embedding, _ = mlp_forward(params, np.asarray(sketch_feature, dtype=np.float64), train_mode, rng)
    return embedding


# ---------------------------------------------------------------------------
# Flat parameter access (used by the optimizer and the checkpoint format).
# ---------------------------------------------------------------------------

_MLP_FIELDS = ("w1", "b1", "w2", "b2")
_ENCODER_FIELDS = (
    "wq", "wk", "wv", "wo",
    "w1", "b1", "w2", "b2",
    "ln1_gain", "ln1_bias", "ln2_gain", "ln2_bias",
)


def _mlp_items(prefix: str, params: MlpParams):
    for name in _MLP_FIELDS:
        yield f"{prefix}.{name}", getattr(params, name)


def _encoder_items(prefix: str, params: TransformerEncoderParams):
    for name in _ENCODER_FIELDS:
        yield f"{prefix}.{name}", getattr(params, name)


def model_param_items(model: EmbeddingModel):
    """Yield ``(path, array)`` for every trainable array, in a fixed order."""
    tower = model.object_tower
    yield "object.w_in", tower.w_in
    yield "object.b_in", tower.b_in
    yield from _encoder_items("object.ring_encoder", tower.ring_encoder)
    yield from _encoder_items("object.encoder0", tower.object_encoders[0])
    yield from _encoder_items("object.encoder1", tower.object_encoders[1])
    yield from _mlp_items("object.projection", tower.projection)
    yield from _mlp_items("sketch", model.sketch_tower)


def model_param_dict(model: EmbeddingModel) -> dict[str, np.ndarray]:
    return dict(model_param_items(model))


def flatten_object_grads(grads: dict) -> dict[str, np.ndarray]:
    """Flatten the nested dict from :func:`object_embed_backward`."""
    flat = {"object.w_in": grads["w_in"], "object.b_in": grads["b_in"]}
    for key, value in grads["ring_encoder"].items():
        flat[f"object.ring_encoder.{key}"] = value
    for idx, enc_grads in enumerate(grads["object_encoders"]):
        for key, value in enc_grads.items():
            flat[f"object.encoder{idx}.{key}"] = value
    for key, value in grads["projection"].items():
        flat[f"object.projection.{key}"] = value
    return flat


def flatten_sketch_grads(grads: dict) -> dict[str, np.ndarray]:
    return {f"sketch.{key}": value for key, value in grads.items()}
