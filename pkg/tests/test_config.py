"""Tests for pipeline configuration loading and overrides."""

import pytest

from ringsketch.config import (
    PipelineConfig,
    apply_overrides,
    config_from_dict,
    load_config,
)
from ringsketch.errors import DataError


class TestPipelineConfig:
    def test_defaults(self):
        cfg = PipelineConfig()
        assert cfg.rings == (2, 3, 4)
        assert cfg.descriptor == "grid"
        assert cfg.scorer == "min_l2"
        assert cfg.alpha == 0.7
        assert cfg.train.folds == 5

    def test_render_config_mirrors_fields(self):
        cfg = PipelineConfig(resolution=64, distance=2.5, rings=(3,))
        rc = cfg.render_config()
        assert rc.resolution == 64
        assert rc.distance == 2.5
        assert rc.rings == (3,)

    def test_bad_descriptor_rejected(self):
        with pytest.raises(DataError, match="descriptor"):
            PipelineConfig(descriptor="sift")

    def test_bad_scorer_rejected(self):
        with pytest.raises(DataError, match="scorer"):
            PipelineConfig(scorer="cosine")

    def test_alpha_range(self):
        with pytest.raises(DataError, match="alpha"):
            PipelineConfig(alpha=1.5)

    def test_bad_reorientation_shape(self):
        with pytest.raises(DataError, match="reorientation"):
            PipelineConfig(reorientations={"m": [["W", 90.0]]})


class TestConfigFromDict:
    def test_nested_sections(self):
        cfg = config_from_dict({
            "descriptor": "hog",
            "sketch": {"method": "laplacian"},
            "augment": {"queries_per_object": 5},
            "train": {"epochs": 3, "folds": 2},
        })
        assert cfg.descriptor == "hog"
        assert cfg.sketch.method == "laplacian"
        assert cfg.augment.queries_per_object == 5
        assert cfg.train.epochs == 3

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(DataError, match="unknown config keys"):
            config_from_dict({"mesh_dirr": "x"})

    def test_unknown_section_key_rejected(self):
        with pytest.raises(DataError, match="unknown train config keys"):
            config_from_dict({"train": {"epochz": 3}})

    def test_list_values_become_tuples(self):
        cfg = config_from_dict({"rings": [3], "augment": {"ring_probs": [0.0, 1.0, 0.0]}})
        assert cfg.rings == (3,)
        assert cfg.augment.ring_probs == (0.0, 1.0, 0.0)

    def test_reorientations_normalized(self):
        cfg = config_from_dict({"reorientations": {"m1": [["x", 90], ["Y", -90]]}})
        assert cfg.reorientations == {"m1": [["X", 90.0], ["Y", -90.0]]}

    def test_invalid_section_value_wrapped(self):
        with pytest.raises(DataError, match="bad sketch config"):
            config_from_dict({"sketch": {"method": "sobel"}})


class TestLoadConfig:
    def test_toml_round_trip(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text(
            'descriptor = "hog"\nscorer = "top6"\nmaster_seed = 9\n'
            "[train]\nepochs = 4\n"
        )
        cfg = load_config(path)
        assert (cfg.descriptor, cfg.scorer, cfg.master_seed) == ("hog", "top6", 9)
        assert cfg.train.epochs == 4

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"scorer": "fused", "alpha": 0.6}')
        cfg = load_config(path)
        assert cfg.scorer == "fused"
        assert cfg.alpha == 0.6

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_config(tmp_path / "nope.toml")

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text("descriptor = ")
        with pytest.raises(DataError, match="invalid TOML"):
            load_config(path)

    def test_unknown_extension(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("a: 1")
        with pytest.raises(DataError, match=".toml or .json"):
            load_config(path)


class TestApplyOverrides:
    def test_top_level_override(self):
        cfg = apply_overrides(PipelineConfig(), ["scorer=top6", "master_seed=3"])
        assert cfg.scorer == "top6"
        assert cfg.master_seed == 3

    def test_nested_override(self):
        cfg = apply_overrides(PipelineConfig(), ["train.epochs=7", "sketch.method=laplacian"])
        assert cfg.train.epochs == 7
        assert cfg.sketch.method == "laplacian"

    def test_bool_and_tuple_coercion(self):
        cfg = apply_overrides(PipelineConfig(), ["tta_flip=true", "rings=3,4"])
        assert cfg.tta_flip is True
        assert cfg.rings == (3, 4)

    def test_unknown_key_rejected(self):
        with pytest.raises(DataError, match="unknown override key"):
            apply_overrides(PipelineConfig(), ["scorrer=top6"])
        with pytest.raises(DataError, match="unknown override key"):
            apply_overrides(PipelineConfig(), ["train.epochz=1"])

    def test_missing_equals_rejected(self):
        with pytest.raises(DataError, match="key=value"):
            apply_overrides(PipelineConfig(), ["scorer"])

    def test_bad_value_rejected(self):
        with pytest.raises(DataError, match="bad value"):
            apply_overrides(PipelineConfig(), ["master_seed=abc"])

    def test_override_still_validated(self):
        with pytest.raises(DataError, match="scorer"):
            apply_overrides(PipelineConfig(), ["scorer=bogus"])
