"""End-to-end pipeline stages over a directory of artifacts.

Each stage reads the previous stage's files and writes its own, all under
``config.output_dir``:

    manifest.json                     ingest: object table + per-file errors
    meshes/<id>.obj                   ingest: normalized (and reoriented) meshes
    renders/<id>/ring<k>/view<j>.png  render: shaded ring views
    queries/<query_id>.png            sketchify: synthetic queries (dark on light)
    queries/manifest.jsonl            sketchify: per-query provenance
    ground_truth.csv                  sketchify: query -> source object
    index_<tag>.rsix                  index: descriptor gallery index(es)
    models.rsck / training_log.csv    train: fold checkpoints + loss log
    index_embed.rsix                  train: learned-embedding gallery index
    rankings_<scorer>.csv             retrieve: ranked lists, one header
    leaderboard.csv                   evaluate: metric row per rankings file

Every write is deterministic for a fixed config and master seed: no
timestamps, sorted iteration orders, and per-item seeds derived from the
master seed.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .descriptors import grid_feature, hog
from .embed import (
    TrainingPair,
    embed_objects,
    embed_sketch,
    load_checkpoint,
    save_checkpoint,
    train_kfold,
    training_log_csv,
)
from .errors import DataError, EmptySketchError, RingSketchError
from .evaluation import evaluate_all, leaderboard_csv, load_ground_truth_csv
from .grouping import cluster_groups
from .imgio import load_image, save_image
from .mesh_io import apply_reorientation, load_obj, normalize_to_box, save_obj
from .render import RingSet, ViewImage, render_rings, ring_camera_poses, write_ring_set
from .retrieval import (
    GalleryIndex,
    RankedList,
    load_index,
    rank,
    ranking_to_csv,
    save_index,
)
from .seeding import rng_for
from .sketchify import (
    crop_to_content,
    generate_training_queries,
    invert,
    sketchify_view,
)

_DESCRIPTOR_FNS = {"grid": grid_feature, "hog": hog}


def _other_descriptor(tag: str) -> str:
    return "hog" if tag == "grid" else "grid"


# ---------------------------------------------------------------------------
# artifact paths

def manifest_path(config: PipelineConfig) -> Path:
    return config.out_path("manifest.json")


def mesh_path(config: PipelineConfig, object_id: str) -> Path:
    return config.out_path("meshes", f"{object_id}.obj")


def renders_root(config: PipelineConfig) -> Path:
    return config.out_path("renders")


def query_png_path(config: PipelineConfig, query_id: str) -> Path:
    return config.out_path("queries", f"{query_id}.png")


def query_manifest_path(config: PipelineConfig) -> Path:
    return config.out_path("queries", "manifest.jsonl")


def ground_truth_path(config: PipelineConfig) -> Path:
    return config.out_path("ground_truth.csv")


def index_path(config: PipelineConfig, tag: str) -> Path:
    return config.out_path(f"index_{tag}.rsix")


def checkpoint_path(config: PipelineConfig) -> Path:
    return config.out_path("models.rsck")


def training_log_path(config: PipelineConfig) -> Path:
    return config.out_path("training_log.csv")


def rankings_path(config: PipelineConfig, scorer: str) -> Path:
    return config.out_path(f"rankings_{scorer}.csv")


def leaderboard_path(config: PipelineConfig) -> Path:
    return config.out_path("leaderboard.csv")


# ---------------------------------------------------------------------------
# ingest

def cmd_ingest(config: PipelineConfig) -> dict:
    """Normalize every ``*.obj`` under ``mesh_dir`` into the output tree.

    Unreadable or invalid files become error entries in the manifest and
    the run continues. Rerunning over unchanged inputs rewrites the same
    manifest bytes.
    """
    src = Path(config.mesh_dir)
    if not src.is_dir():
        raise DataError(f"mesh directory not found: {src}")
    files = sorted(src.glob("*.obj"))
    if not files:
        raise DataError(f"no .obj files in {src}")

    config.out_path("meshes").mkdir(parents=True, exist_ok=True)
    objects, errors = [], []
    for f in files:
        try:
            mesh = load_obj(f)
            rotations = config.reorientations.get(mesh.id, [])
            if rotations:
                mesh = apply_reorientation(mesh, rotations)
            mesh = normalize_to_box(mesh)
            save_obj(mesh, mesh_path(config, mesh.id))
            objects.append({
                "id": mesh.id,
                "source": f.name,
                "vertices": int(mesh.vertex_count),
                "triangles": int(mesh.triangle_count),
            })
        except RingSketchError as exc:
            errors.append({"file": f.name, "error": str(exc)})

    objects.sort(key=lambda o: o["id"])
    manifest = {"objects": objects, "errors": errors}
    path = manifest_path(config)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return {"objects": len(objects), "errors": len(errors),
            "manifest": str(path)}


def load_manifest(config: PipelineConfig) -> dict:
    path = manifest_path(config)
    if not path.exists():
        raise DataError(f"manifest not found at {path}; run ingest first")
    return json.loads(path.read_text())


def _object_ids(manifest: dict) -> list:
    ids = [o["id"] for o in manifest["objects"]]
    if not ids:
        raise DataError("manifest lists no objects")
    return ids


# ---------------------------------------------------------------------------
# render

def cmd_render(config: PipelineConfig) -> dict:
    """Render the camera-ring views of every ingested mesh to PNG files."""
    manifest = load_manifest(config)
    render_cfg = config.render_config()
    total = 0
    for oid in _object_ids(manifest):
        mesh = load_obj(mesh_path(config, oid), mesh_id=oid)
        ring_set = render_rings(mesh, render_cfg)
        write_ring_set(ring_set, renders_root(config))
        total += ring_set.view_count()
    return {"objects": len(manifest["objects"]), "views": total}


def load_ring_set(config: PipelineConfig, object_id: str) -> RingSet:
    """Rebuild a RingSet from rendered PNGs (poses recomputed, not stored)."""
    rings: dict = {}
    for k in config.rings:
        poses = ring_camera_poses(config.distance, rings=[k])
        entries = []
        for pose in poses:
            path = (renders_root(config) / object_id / f"ring{k}"
                    / f"view{pose.azimuth_index}.png")
            if not path.exists():
                raise DataError(f"missing render {path}; run render first")
            entries.append((pose, ViewImage(load_image(path), kind="shaded")))
        rings[int(k)] = entries
    return RingSet(object_id=object_id, rings=rings)


# ---------------------------------------------------------------------------
# sketchify (synthetic queries + ground truth)

def cmd_sketchify(config: PipelineConfig) -> dict:
    """Generate augmented sketch queries for every object.

    Queries are saved dark-on-light (stroke 0 on background 255), with a
    JSONL provenance manifest and a query -> source-object truth table.
    """
    manifest = load_manifest(config)
    lines, gt_rows = [], []
    count = 0
    for oid in _object_ids(manifest):
        ring_set = load_ring_set(config, oid)
        rng = rng_for(config.master_seed, f"queries/{oid}")
        triples = generate_training_queries(
            ring_set, config.augment, rng, config.sketch, with_plans=True)
        for q, (img, obj_id, plan) in enumerate(triples):
            query_id = f"{oid}_q{q}"
            save_image(invert(img).pixels, query_png_path(config, query_id))
            lines.append(json.dumps({
                "query_id": query_id,
                "object_id": obj_id,
                "ring": plan.ring,
                "view_index": plan.view_index,
                "method": plan.method,
                "flip": plan.flip,
                "rotation_degrees": plan.rotation_degrees,
            }, sort_keys=True))
            gt_rows.append(f"{query_id},{obj_id}")
            count += 1
    query_manifest_path(config).write_text("\n".join(lines) + "\n")
    gt_path = ground_truth_path(config)
    gt_path.parent.mkdir(parents=True, exist_ok=True)
    gt_path.write_text("query_id,object_id\n" + "\n".join(gt_rows) + "\n")
    return {"queries": count, "objects": len(manifest["objects"])}


def load_query_manifest(config: PipelineConfig) -> list:
    path = query_manifest_path(config)
    if not path.exists():
        raise DataError(f"query manifest not found at {path}; run sketchify first")
    return [json.loads(line) for line in path.read_text().splitlines() if line]


def load_query_image(config: PipelineConfig, query_id: str) -> ViewImage:
    """A query PNG cropped onto the standard canvas, ready for ranking."""
    path = query_png_path(config, query_id)
    if not path.exists():
        raise DataError(f"query image not found: {path}")
    return crop_to_content(load_image(path), out_size=config.resolution)


# ---------------------------------------------------------------------------
# descriptor indexes

def view_feature(pixels, descriptor: str, config: PipelineConfig) -> np.ndarray:
    """Featurize one shaded gallery view.

    Chain: edge extraction -> dark-on-light -> content crop -> descriptor,
    which matches how incoming query sketches are processed.
    """
    edges = sketchify_view(pixels, config.sketch)
    cropped = crop_to_content(invert(edges), out_size=config.resolution)
    return _DESCRIPTOR_FNS[descriptor](cropped).values


def _gallery_features(config: PipelineConfig, object_ids, tags) -> dict:
    """{tag: (features, rows)} over all views of all objects."""
    per_tag: dict = {tag: ([], []) for tag in tags}
    for oid in object_ids:
        ring_set = load_ring_set(config, oid)
        for k in sorted(ring_set.rings):
            for j, (_, view) in enumerate(ring_set.rings[k]):
                edges = sketchify_view(view.pixels, config.sketch)
                try:
                    cropped = crop_to_content(invert(edges), out_size=config.resolution)
                except EmptySketchError as exc:
                    raise DataError(
                        f"object {oid!r} ring {k} view {j} has no edges: {exc}") from exc
                for tag in tags:
                    feats, rows = per_tag[tag]
                    feats.append(_DESCRIPTOR_FNS[tag](cropped).values)
                    rows.append({"object_id": oid, "group": f"ring{k}", "view": j})
    return {tag: (np.vstack(feats), rows) for tag, (feats, rows) in per_tag.items()}


def cmd_build_index(config: PipelineConfig) -> dict:
    """Build the descriptor gallery index (plus the fusion partner's)."""
    manifest = load_manifest(config)
    ids = _object_ids(manifest)
    tags = [config.descriptor]
    if config.scorer == "fused":
        tags.append(_other_descriptor(config.descriptor))
    built = _gallery_features(config, ids, tags)
    paths = []
    for tag in tags:
        features, rows = built[tag]
        save_index(GalleryIndex(tag=tag, features=features, rows=rows),
                   index_path(config, tag))
        paths.append(str(index_path(config, tag)))
    return {"objects": len(ids), "rows": built[tags[0]][0].shape[0],
            "paths": paths}


def load_primary_index(config: PipelineConfig) -> GalleryIndex:
    path = index_path(config, config.descriptor)
    if not path.exists():
        raise DataError(f"index not found at {path}; run index first")
    return load_index(path)


def feature_stacks_from_index(index: GalleryIndex, rings) -> dict:
    """Rebuild per-object (rings, views, feature) stacks from index rows."""
    ring_names = [f"ring{k}" for k in rings]
    stacks = {}
    for oid in index.object_ids:
        groups = index.group_rows(oid)
        missing = [name for name in ring_names if name not in groups]
        if missing:
            raise DataError(f"index lacks {missing} rows for object {oid!r}")
        per_ring = [groups[name] for name in ring_names]
        counts = {m.shape[0] for m in per_ring}
        if len(counts) != 1:
            raise DataError(f"object {oid!r} has unequal views per ring: {sorted(counts)}")
        stacks[oid] = np.stack([m.astype(np.float64) for m in per_ring])
    return stacks


# ---------------------------------------------------------------------------
# training

def _training_groups(config: PipelineConfig, manifest: dict, stacks: dict) -> dict:
    """object id -> group id for contrastive positives."""
    ids = sorted(stacks)
    if config.train_groups <= 0:
        return {oid: oid for oid in ids}
    counts = {o["id"]: o["vertices"] for o in manifest["objects"]}
    labels, _ = cluster_groups(ids, [stacks[oid] for oid in ids],
                               config.train_groups, counts,
                               master_seed=config.master_seed)
    return labels


def build_training_pairs(config: PipelineConfig) -> list:
    """One TrainingPair per generated query, in query-id order."""
    manifest = load_manifest(config)
    index = load_primary_index(config)
    stacks = feature_stacks_from_index(index, config.rings)
    groups = _training_groups(config, manifest, stacks)
    descriptor_fn = _DESCRIPTOR_FNS[config.descriptor]
    pairs = []
    for entry in load_query_manifest(config):
        qid, oid = entry["query_id"], entry["object_id"]
        if oid not in stacks:
            raise DataError(f"query {qid!r} references unknown object {oid!r}")
        sketch = descriptor_fn(load_query_image(config, qid)).values
        pairs.append(TrainingPair(
            sketch_feature=sketch, ring_features=stacks[oid],
            object_id=oid, group_id=groups[oid],
        ))
    return pairs


def cmd_train(config: PipelineConfig) -> dict:
    """Train the k-fold contrastive ensemble and index the gallery embeddings."""
    pairs = build_training_pairs(config)
    result = train_kfold(pairs, config.train)
    save_checkpoint(checkpoint_path(config), result.models, result.config)
    training_log_path(config).write_text(training_log_csv(result.log))

    index = load_primary_index(config)
    stacks = feature_stacks_from_index(index, config.rings)
    ids = sorted(stacks)
    embeddings = embed_objects(result.models, [stacks[oid] for oid in ids])
    rows, feats = [], []
    for o, oid in enumerate(ids):
        for m in range(embeddings.shape[0]):
            rows.append({"object_id": oid, "group": m, "view": 0})
            feats.append(embeddings[m, o])
    save_index(GalleryIndex(tag="embed", features=np.vstack(feats), rows=rows),
               index_path(config, "embed"))
    final_val = [r.val_loss for r in result.log if r.epoch == config.train.epochs]
    return {"pairs": len(pairs), "folds": len(result.models),
            "checkpoint": str(checkpoint_path(config)),
            "mean_final_val_loss": float(np.mean(final_val)) if final_val else None}


def load_models(config: PipelineConfig):
    path = checkpoint_path(config)
    if not path.exists():
        raise DataError(f"checkpoint not found at {path}; run train first")
    models, _ = load_checkpoint(path)
    return models


# ---------------------------------------------------------------------------
# retrieve

class QueryEngine:
    """Everything needed to rank one sketch image, loaded once.

    Used by both the batch retrieve stage and the HTTP service; the
    loaded indexes and models are immutable.
    """

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.scorer = config.scorer
        self.descriptor_fn = _DESCRIPTOR_FNS[config.descriptor]
        self.secondary_index = None
        self.models = None
        if self.scorer == "embed":
            path = index_path(config, "embed")
            if not path.exists():
                raise DataError(f"embed index not found at {path}; run train first")
            self.index = load_index(path)
            self.models = load_models(config)
        else:
            self.index = load_primary_index(config)
            if self.scorer == "fused":
                other = index_path(config, _other_descriptor(config.descriptor))
                if not other.exists():
                    raise DataError(
                        f"fused scorer needs {other}; run index with scorer=fused")
                self.secondary_index = load_index(other)

    @property
    def object_ids(self) -> list:
        return self.index.object_ids

    def embed_fn(self, img):
        return embed_sketch(self.models, self.descriptor_fn(img).values)

    def rank_image(self, cropped: ViewImage, query_id: str = "query") -> RankedList:
        return rank(
            cropped, self.index, scorer=self.scorer,
            tta_flip=self.config.tta_flip, query_id=query_id,
            secondary_index=self.secondary_index, alpha=self.config.alpha,
            embed_fn=self.embed_fn if self.models is not None else None,
        )


def rankings_to_csv(ranked_lists) -> str:
    """All per-query rankings as one CSV with a single header row."""
    ranked_lists = list(ranked_lists)
    if not ranked_lists:
        raise DataError("no rankings to serialize")
    out = [ranking_to_csv(ranked_lists[0])]
    for ranked in ranked_lists[1:]:
        body = ranking_to_csv(ranked).split("\n", 1)[1]
        out.append(body)
    return "".join(out)


def parse_rankings_csv(text: str) -> list:
    """Inverse of :func:`rankings_to_csv` (row order defines rank order)."""
    per_query: dict = {}
    order: list = []
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        if not row or row[0].strip() == "query_id":
            continue
        if len(row) != 4:
            raise DataError(f"rankings row needs 4 columns: {row!r}")
        qid = row[0].strip()
        if qid not in per_query:
            per_query[qid] = []
            order.append(qid)
        per_query[qid].append((row[2].strip(), float(row[3])))
    if not per_query:
        raise DataError("rankings csv has no data rows")
    return [RankedList(qid, tuple(per_query[qid])) for qid in order]


def cmd_retrieve(config: PipelineConfig) -> dict:
    """Rank every generated query and write one rankings CSV."""
    engine = QueryEngine(config)
    entries = load_query_manifest(config)
    ranked = []
    for entry in entries:
        qid = entry["query_id"]
        cropped = load_query_image(config, qid)
        ranked.append(engine.rank_image(cropped, query_id=qid))
    path = rankings_path(config, config.scorer)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rankings_to_csv(ranked))
    return {"queries": len(ranked), "scorer": config.scorer, "path": str(path)}


# ---------------------------------------------------------------------------
# evaluate

def cmd_evaluate(config: PipelineConfig) -> dict:
    """Score every rankings file against the ground truth; write the leaderboard."""
    manifest = load_manifest(config)
    gt_path = ground_truth_path(config)
    if not gt_path.exists():
        raise DataError(f"ground truth not found at {gt_path}; run sketchify first")
    gt = load_ground_truth_csv(gt_path.read_text(),
                               gallery_size=len(_object_ids(manifest)))
    files = sorted(Path(config.output_dir).glob("rankings_*.csv"))
    if not files:
        raise DataError(f"no rankings_*.csv under {config.output_dir}; run retrieve first")
    reports = {}
    for f in files:
        scorer = f.stem[len("rankings_"):]
        rankings = parse_rankings_csv(f.read_text())
        reports[scorer] = evaluate_all(rankings, gt, cutoff=config.cutoff)
    leaderboard_path(config).write_text(leaderboard_csv(reports))
    summary = {name: {"NN": rep.nn, "P@10": rep.p_at_10, "NDCG": rep.ndcg,
                      "mAP": rep.map, "FT": rep.ft, "ST": rep.st, "FR": rep.fr}
               for name, rep in reports.items()}
    return {"leaderboard": str(leaderboard_path(config)), "metrics": summary}
