"""Scikit-learn style facades over the descriptor, embedding, and retrieval
cores.

These wrappers follow the estimator protocol (``get_params``/``set_params``
via ``BaseEstimator``, ``fit`` returning ``self``, ``transform`` on 2-D
arrays) so they compose with sklearn pipelines and model-selection tools.
The underlying functional modules stay the source of truth; the facades
only adapt shapes and state.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .descriptors import grid_feature, hog
from .embed import (
    TrainConfig,
    TrainingPair,
    embed_sketch,
    ensemble_similarity,
    train_kfold,
)
from .retrieval import GalleryIndex, rank


def _image_rows(X):
    """Accept (n, h, w) arrays or lists of 2-D images."""
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [X[i] for i in range(X.shape[0])]
    return list(X)


class GridDescriptor(BaseEstimator, TransformerMixin):
    """Per-cell mass descriptor as a stateless transformer.

    transform maps a batch of grayscale images to (n, grid*grid) rows.
    """

    def __init__(self, grid: int = 4):
        self.grid = grid

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return np.vstack([
            grid_feature(img, grid=self.grid).values for img in _image_rows(X)
        ])


class HogDescriptor(BaseEstimator, TransformerMixin):
    """Histogram-of-oriented-gradients descriptor as a stateless transformer."""

    def __init__(self, cell: int = 8, block: int = 2, bins: int = 9):
        self.cell = cell
        self.block = block
        self.bins = bins

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return np.vstack([
            hog(img, cell=self.cell, block=self.block, bins=self.bins).values
            for img in _image_rows(X)
        ])


class ContrastiveEmbedder(BaseEstimator):
    """K-fold contrastive trainer with an sklearn-flavored surface.

    ``fit(pairs)`` takes a list of :class:`TrainingPair`; afterwards
    ``transform(X)`` embeds sketch-feature rows under every fold model and
    returns the concatenation (n, folds * embed_dim), and
    ``similarity(ring_features, sketch_feature)`` gives the max-voting
    ensemble score.
    """

    def __init__(self, lr: float = 1e-3, weight_decay: float = 1e-2,
                 epochs: int = 20, batch_size: int = 8, folds: int = 5,
                 seed: int = 0, temperature: float = 0.5,
                 model_dim: int = 64, hidden_dim: int = 128,
                 embed_dim: int = 64, dropout_rate: float = 0.1,
                 step_size: int = 10, gamma: float = 0.5):
        self.lr = lr
        self.weight_decay = weight_decay
        self.epochs = epochs
        self.batch_size = batch_size
        self.folds = folds
        self.seed = seed
        self.temperature = temperature
        self.model_dim = model_dim
        self.hidden_dim = hidden_dim
        self.embed_dim = embed_dim
        self.dropout_rate = dropout_rate
        self.step_size = step_size
        self.gamma = gamma

    def _config(self) -> TrainConfig:
        return TrainConfig(
            lr=self.lr, weight_decay=self.weight_decay, epochs=self.epochs,
            batch_size=self.batch_size, folds=self.folds, seed=self.seed,
            temperature=self.temperature, model_dim=self.model_dim,
            hidden_dim=self.hidden_dim, embed_dim=self.embed_dim,
            dropout_rate=self.dropout_rate, step_size=self.step_size,
            gamma=self.gamma,
        )

    def fit(self, X, y=None):
        pairs = list(X)
        if pairs and not isinstance(pairs[0], TrainingPair):
            raise TypeError("fit expects a list of TrainingPair")
        self.result_ = train_kfold(pairs, self._config())
        self.models_ = list(self.result_.models)
        return self

    def _check_fitted(self):
        if not hasattr(self, "models_"):
            raise NotFittedError("ContrastiveEmbedder is not fitted yet")

    def transform(self, X):
        self._check_fitted()
        rows = np.asarray(X, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[None, :]
        out = [
            embed_sketch(self.models_, rows[i]).reshape(-1)
            for i in range(rows.shape[0])
        ]
        return np.vstack(out)

    def similarity(self, ring_features, sketch_feature) -> float:
        self._check_fitted()
        return ensemble_similarity(self.models_, ring_features, sketch_feature)


class SketchRetriever(BaseEstimator):
    """Nearest-gallery-object search over a prebuilt view-feature matrix.

    ``fit(features, rows)`` ingests one descriptor row per gallery view
    (``rows`` carrying object_id/group/view dicts, as in
    :class:`GalleryIndex`); ``query(image_or_vector, top_k)`` returns the
    (object_id, score) list for the configured scorer.
    """

    def __init__(self, descriptor_tag: str = "grid", scorer: str | None = None,
                 tta_flip: bool = False):
        self.descriptor_tag = descriptor_tag
        self.scorer = scorer
        self.tta_flip = tta_flip

    def fit(self, X, y=None, rows=None):
        if rows is None:
            raise ValueError("fit needs rows=[{'object_id': ..., ...}] per feature row")
        self.index_ = GalleryIndex(tag=self.descriptor_tag,
                                   features=np.asarray(X), rows=list(rows))
        return self

    def _check_fitted(self):
        if not hasattr(self, "index_"):
            raise NotFittedError("SketchRetriever is not fitted yet")

    def query(self, query, top_k: int | None = None, query_id: str = "query"):
        self._check_fitted()
        ranked = rank(query, self.index_, scorer=self.scorer,
                      tta_flip=self.tta_flip, query_id=query_id)
        pairs = list(ranked.ranking)
        return pairs if top_k is None else pairs[:top_k]
