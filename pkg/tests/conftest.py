"""Shared fixtures: a small fully-built pipeline workspace.

Building renders and training models is the slow part of the pipeline
tests, so one session-scoped workspace is built once and shared by the
pipeline, CLI, and service tests (all of which treat it read-only;
tests that mutate state get their own copies).
"""

import pytest

from ringsketch.config import PipelineConfig
from ringsketch.embed import TrainConfig
from ringsketch.mesh_io import save_obj
from ringsketch.sketchify import AugmentParams
from ringsketch.synth import synthetic_corpus
from ringsketch import pipeline


def small_config(mesh_dir, output_dir, **kwargs) -> PipelineConfig:
    defaults = dict(
        mesh_dir=str(mesh_dir), output_dir=str(output_dir),
        master_seed=7, cutoff=3,
        augment=AugmentParams(queries_per_object=2),
        train=TrainConfig(epochs=2, folds=2, model_dim=8, hidden_dim=8,
                          embed_dim=8, dropout_rate=0.0),
    )
    defaults.update(kwargs)
    return PipelineConfig(**defaults)


def write_demo_meshes(mesh_dir, count=4, master_seed=0):
    mesh_dir.mkdir(parents=True, exist_ok=True)
    for mesh in synthetic_corpus(count=count, master_seed=master_seed):
        save_obj(mesh, mesh_dir / f"{mesh.id}.obj")


@pytest.fixture(scope="session")
def built_workspace(tmp_path_factory):
    """Meshes ingested, rendered, sketchified, indexed, trained, retrieved."""
    root = tmp_path_factory.mktemp("workspace")
    mesh_dir = root / "meshes_in"
    write_demo_meshes(mesh_dir)
    config = small_config(mesh_dir, root / "out")
    pipeline.cmd_ingest(config)
    pipeline.cmd_render(config)
    pipeline.cmd_sketchify(config)
    pipeline.cmd_build_index(config)
    pipeline.cmd_train(config)
    pipeline.cmd_retrieve(config)
    pipeline.cmd_evaluate(config)
    return config
