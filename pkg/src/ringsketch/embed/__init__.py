"""Learned sketch/object embedding: model, loss, optimizer, training."""

from .encoder import (
    DEFAULT_EMBED_DIM,
    DEFAULT_HIDDEN_DIM,
    DEFAULT_MODEL_DIM,
    EmbeddingModel,
    ObjectEncoderParams,
    flatten_object_grads,
    flatten_sketch_grads,
    init_embedding_model,
    init_object_encoder,
    model_param_dict,
    model_param_items,
    object_embed,
    object_embed_backward,
    object_embed_forward,
    sketch_embed,
)
from .layers import (
    MlpParams,
    TransformerEncoderParams,
    init_mlp,
    init_transformer_encoder,
    layer_norm_backward,
    layer_norm_forward,
    mlp_backward,
    mlp_forward,
    transformer_encoder_backward,
    transformer_encoder_forward,
    xavier_uniform,
)
from .loss import ContrastiveBatch, nt_xent_loss, paired_batch
from .optim import AdamWState, adamw_step, step_lr
from .training import (
    CHECKPOINT_MAGIC,
    LogRow,
    TrainConfig,
    TrainResult,
    TrainingPair,
    embed_objects,
    embed_sketch,
    ensemble_similarity,
    load_checkpoint,
    save_checkpoint,
    split_groups_into_folds,
    train_kfold,
    training_log_csv,
)

__all__ = [
    "CHECKPOINT_MAGIC",
    "DEFAULT_EMBED_DIM",
    "DEFAULT_HIDDEN_DIM",
    "DEFAULT_MODEL_DIM",
    "AdamWState",
    "ContrastiveBatch",
    "EmbeddingModel",
    "LogRow",
    "MlpParams",
    "ObjectEncoderParams",
    "TransformerEncoderParams",
    "TrainConfig",
    "TrainResult",
    "TrainingPair",
    "adamw_step",
    "embed_objects",
    "embed_sketch",
    "ensemble_similarity",
    "flatten_object_grads",
    "flatten_sketch_grads",
    "init_embedding_model",
    "init_mlp",
    "init_object_encoder",
    "init_transformer_encoder",
    "layer_norm_backward",
    "layer_norm_forward",
    "load_checkpoint",
    "mlp_backward",
    "mlp_forward",
    "model_param_dict",
    "model_param_items",
    "nt_xent_loss",
    "object_embed",
    "object_embed_backward",
    "object_embed_forward",
    "paired_batch",
    "save_checkpoint",
    "sketch_embed",
    "split_groups_into_folds",
    "step_lr",
    "transformer_encoder_backward",
    "transformer_encoder_forward",
    "train_kfold",
    "training_log_csv",
    "xavier_uniform",
]
