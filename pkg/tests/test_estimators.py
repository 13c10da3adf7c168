"""Tests for the sklearn-style estimator facades."""

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from ringsketch.descriptors import grid_feature, hog
from ringsketch.embed import TrainingPair
from ringsketch.estimators import (
    ContrastiveEmbedder,
    GridDescriptor,
    HogDescriptor,
    SketchRetriever,
)


def toy_image(rng, size=32):
    return (rng.random((size, size)) > 0.7).astype(np.uint8) * 255


def toy_pairs(rng, n_groups=6, per_group=2, feat=10, rings=1, views=2):
    pairs = []
    for g in range(n_groups):
        center = rng.standard_normal(feat)
        for i in range(per_group):
            stack = center + 0.05 * rng.standard_normal((rings, views, feat))
            sketch = center + 0.05 * rng.standard_normal(feat)
            pairs.append(TrainingPair(
                sketch_feature=sketch, ring_features=stack,
                object_id=f"g{g}o{i}", group_id=f"g{g}",
            ))
    return pairs


class TestDescriptorTransformers:
    def test_grid_matches_function(self):
        rng = np.random.default_rng(0)
        imgs = [toy_image(rng) for _ in range(3)]
        out = GridDescriptor(grid=4).fit().transform(imgs)
        assert out.shape == (3, 16)
        for i, img in enumerate(imgs):
            assert np.allclose(out[i], grid_feature(img, grid=4).values)

    def test_hog_matches_function(self):
        rng = np.random.default_rng(1)
        imgs = np.stack([toy_image(rng) for _ in range(2)])
        out = HogDescriptor().transform(imgs)
        for i in range(2):
            assert np.allclose(out[i], hog(imgs[i]).values)

    def test_get_params_round_trip(self):
        est = GridDescriptor(grid=8)
        assert est.get_params() == {"grid": 8}
        est.set_params(grid=2)
        rng = np.random.default_rng(2)
        assert est.transform([toy_image(rng)]).shape == (1, 4)


class TestContrastiveEmbedder:
    def make_fitted(self, seed=0):
        rng = np.random.default_rng(seed)
        pairs = toy_pairs(rng)
        est = ContrastiveEmbedder(epochs=1, folds=2, batch_size=4,
                                  model_dim=8, hidden_dim=8, embed_dim=6,
                                  dropout_rate=0.0, seed=seed)
        return est.fit(pairs), pairs

    def test_fit_produces_fold_models(self):
        est, _ = self.make_fitted()
        assert len(est.models_) == 2
        assert est.result_.config.epochs == 1

    def test_transform_concatenates_fold_embeddings(self):
        est, pairs = self.make_fitted()
        rows = np.stack([p.sketch_feature for p in pairs[:3]])
        out = est.transform(rows)
        assert out.shape == (3, 2 * 6)
        single = est.transform(pairs[0].sketch_feature)
        assert single.shape == (1, 2 * 6)
        assert np.allclose(single[0], out[0])

    def test_similarity_is_finite(self):
        est, pairs = self.make_fitted()
        s = est.similarity(pairs[0].ring_features, pairs[0].sketch_feature)
        assert np.isfinite(s)
        assert -1.0 - 1e-9 <= s <= 1.0 + 1e-9

    def test_unfitted_raises(self):
        est = ContrastiveEmbedder()
        with pytest.raises(NotFittedError):
            est.transform(np.zeros(4))

    def test_non_pair_input_rejected(self):
        with pytest.raises(TypeError, match="TrainingPair"):
            ContrastiveEmbedder().fit([np.zeros(4)])

    def test_params_survive_clone_style_round_trip(self):
        est = ContrastiveEmbedder(lr=5e-4, folds=3)
        params = est.get_params()
        rebuilt = ContrastiveEmbedder(**params)
        assert rebuilt.lr == 5e-4
        assert rebuilt.folds == 3


class TestSketchRetriever:
    def make_fitted(self):
        rng = np.random.default_rng(4)
        imgs = {f"obj{i}": toy_image(rng) for i in range(4)}
        feats, rows = [], []
        for oid, img in imgs.items():
            feats.append(grid_feature(img).values)
            rows.append({"object_id": oid, "group": "ring3", "view": 0})
        est = SketchRetriever(descriptor_tag="grid")
        est.fit(np.vstack(feats), rows=rows)
        return est, imgs

    def test_query_returns_source_first(self):
        est, imgs = self.make_fitted()
        ranked = est.query(imgs["obj2"])
        assert ranked[0][0] == "obj2"
        assert len(ranked) == 4

    def test_top_k_truncates(self):
        est, imgs = self.make_fitted()
        assert len(est.query(imgs["obj0"], top_k=2)) == 2

    def test_fit_requires_rows(self):
        with pytest.raises(ValueError, match="rows"):
            SketchRetriever().fit(np.zeros((2, 4)))

    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            SketchRetriever().query(np.zeros((8, 8), dtype=np.uint8))
