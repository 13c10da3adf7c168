"""Gallery indexing and ranked retrieval.

Three scoring strategies turn per-view features into one score per
gallery object:

* ``min_l2`` — smallest L2 distance between the query vector and any of
  the object's view vectors (a distance; ranking sorts ascending).
* ``top6`` — for each view group (camera setup or ring), sum the six
  highest cosine similarities, then take the best group.
* ``embed`` — max over an ensemble of learned models of the cosine
  similarity between query and object embeddings.

``fused`` combines a primary strategy with a secondary index's scores:
both score lists are min-max normalized to [0, 1] per query (distances
first became similarities via 1 - minmax), then blended as
alpha * primary + (1 - alpha) * secondary.

Rankings are always total orders: scores descending, ties broken by
object id so results are reproducible to the byte.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptors import DESCRIPTOR_TAGS, FeatureVector, grid_feature, hog
from .errors import IndexError_
from .render import ViewImage
from .sketchify import flip_horizontal

INDEX_MAGIC = b"RSIX"
INDEX_VERSION = 1
DEFAULT_ALPHA = 0.7
TOP_VIEWS_PER_GROUP = 6


@dataclass(frozen=True)
class RankedList:
    """Query result: (object_id, score) pairs, scores non-increasing."""

    query_id: str
    ranking: tuple

    def __post_init__(self):
        pairs = tuple((str(o), float(s)) for o, s in self.ranking)
        ids = [o for o, _ in pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("ranking repeats an object id")
        scores = [s for _, s in pairs]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("ranking scores must be non-increasing")
        object.__setattr__(self, "ranking", pairs)

    def object_ids(self) -> list:
        return [o for o, _ in self.ranking]

    def __len__(self):
        return len(self.ranking)


@dataclass
class GalleryIndex:
    """Immutable searchable gallery: one feature row per view.

    rows[i] describes features[i]: {"object_id": ..., "group": ring /
    setup / model number, "view": index within the group}.
    """

    tag: str
    features: np.ndarray
    rows: list

    def __post_init__(self):
        if self.tag not in DESCRIPTOR_TAGS:
            raise IndexError_(f"unknown descriptor tag {self.tag!r}")
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float32))
        if feats.ndim != 2:
            raise IndexError_(f"features must be 2-D, got {feats.shape}")
        if len(self.rows) != feats.shape[0]:
            raise IndexError_(f"{len(self.rows)} rows for {feats.shape[0]} feature rows")
        self.features = feats
        self._by_object: dict = {}
        self._groups: dict = {}
        for i, row in enumerate(self.rows):
            oid = row["object_id"]
            self._by_object.setdefault(oid, []).append(i)
            self._groups.setdefault(oid, {}).setdefault(row.get("group", 0), []).append(i)

    @property
    def object_ids(self) -> list:
        return sorted(self._by_object)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def view_rows(self, object_id: str) -> np.ndarray:
        return self.features[self._by_object[object_id]]

    def group_rows(self, object_id: str) -> dict:
        return {g: self.features[idx] for g, idx in sorted(self._groups[object_id].items())}


def save_index(index: GalleryIndex, path) -> None:
    """Versioned single-file binary: header, JSON row table, float32 data."""
    meta = json.dumps({"tag": index.tag, "rows": index.rows},
                      sort_keys=True).encode("utf-8")
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "wb") as f:
        f.write(INDEX_MAGIC)
        f.write(struct.pack("<BI", INDEX_VERSION, len(meta)))
        f.write(meta)
        f.write(struct.pack("<II", index.features.shape[1], index.features.shape[0]))
        f.write(index.features.tobytes())


def load_index(path) -> GalleryIndex:
    p = Path(path)
    raw = p.read_bytes()
    if raw[:4] != INDEX_MAGIC:
        raise IndexError_(f"{p} is not a gallery index (bad magic)")
    version, meta_len = struct.unpack_from("<BI", raw, 4)
    if version != INDEX_VERSION:
        raise IndexError_(f"unsupported index version {version}")
    off = 9
    meta = json.loads(raw[off:off + meta_len].decode("utf-8"))
    off += meta_len
    dim, count = struct.unpack_from("<II", raw, off)
    off += 8
    body = raw[off:off + count * dim * 4]
    if len(body) != count * dim * 4:
        raise IndexError_(f"{p} truncated")
    feats = np.frombuffer(body, dtype="<f4").reshape(count, dim).copy()
    return GalleryIndex(tag=meta["tag"], features=feats, rows=meta["rows"])


# ---------------------------------------------------------------------------
# scorers

def score_min_l2(query, views: np.ndarray) -> float:
    """Minimum Euclidean distance from the query to any view vector."""
    q = query.values if isinstance(query, FeatureVector) else np.asarray(query, dtype=np.float64)
    mat = np.asarray(views, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise ValueError("need a nonempty 2-D view matrix")
    return float(np.sqrt(((mat - q) ** 2).sum(axis=1)).min())


def score_top6_sum_max(query, groups, top_k: int = TOP_VIEWS_PER_GROUP) -> float:
    """Best group score, where a group scores the sum of its `top_k`
    highest cosine similarities (all of them when fewer are available)."""
    q = query.values if isinstance(query, FeatureVector) else np.asarray(query, dtype=np.float64)
    qn = np.linalg.norm(q)
    if qn == 0.0:
        raise ValueError("zero query vector has no cosine similarity")
    group_list = list(groups.values()) if isinstance(groups, dict) else list(groups)
    if not group_list or any(np.asarray(g).shape[0] == 0 for g in group_list):
        raise ValueError("every group needs at least one view")
    best = -np.inf
    for g in group_list:
        mat = np.asarray(g, dtype=np.float64)
        norms = np.linalg.norm(mat, axis=1)
        norms[norms == 0.0] = np.inf  # zero views contribute similarity 0
        sims = (mat @ q) / (norms * qn)
        take = min(top_k, sims.shape[0])
        top = np.sort(sims)[-take:]
        best = max(best, float(top.sum()))
    return best


def fuse_scores(score_a: float, score_b: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Convex blend alpha*a + (1-alpha)*b of two [0,1] scores."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return alpha * score_a + (1.0 - alpha) * score_b


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    """Scale to [0, 1]; a constant array maps to all 0.5."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full_like(v, 0.5)
    return (v - lo) / (hi - lo)


# ---------------------------------------------------------------------------
# ranking

_FEATURIZERS = {"grid": grid_feature, "hog": hog}


def _query_vector(query, tag: str):
    """Descriptor vector for a query image (or pass a vector through)."""
    if isinstance(query, FeatureVector):
        if query.tag != tag:
            raise IndexError_(f"query descriptor {query.tag!r} does not match index {tag!r}")
        return query.values
    if tag not in _FEATURIZERS:
        raise IndexError_(f"index tag {tag!r} needs an embedding function, not a raw image")
    img = query if isinstance(query, ViewImage) else ViewImage(np.asarray(query, dtype=np.uint8), kind="sketch")
    return _FEATURIZERS[tag](img).values


def _raw_similarities(query, index: GalleryIndex, scorer: str, embed_fn=None):
    """Higher-is-better raw score per object id (sorted id order)."""
    ids = index.object_ids
    if scorer == "embed":
        if index.tag != "embed":
            raise IndexError_(f"embed scorer needs an embed index, got {index.tag!r}")
        if embed_fn is None:
            raise IndexError_("embed scorer needs embed_fn(query_image) -> per-model vectors")
        q_embs = np.asarray(embed_fn(query), dtype=np.float64)
        if q_embs.ndim == 1:
            q_embs = q_embs[None, :]
        out = []
        for oid in ids:
            groups = index.group_rows(oid)
            best = -np.inf
            for model_idx, rows in groups.items():
                emb = np.asarray(rows[0], dtype=np.float64)
                q = q_embs[model_idx % q_embs.shape[0]]
                denom = np.linalg.norm(q) * np.linalg.norm(emb)
                sim = float(q @ emb / denom) if denom > 0 else 0.0
                best = max(best, sim)
            out.append(best)
        return ids, np.array(out)
    qv = _query_vector(query, index.tag)
    if scorer == "min_l2":
        return ids, np.array([-score_min_l2(qv, index.view_rows(oid)) for oid in ids])
    if scorer == "top6":
        if np.linalg.norm(qv) == 0.0:
            # zero query vector: no direction to compare against
            return ids, np.full(len(ids), -np.inf)
        return ids, np.array([score_top6_sum_max(qv, index.group_rows(oid)) for oid in ids])
    raise IndexError_(f"unknown scorer {scorer!r}")


def _default_scorer(tag: str) -> str:
    return "embed" if tag == "embed" else "min_l2"


def rank(query, index: GalleryIndex, scorer: str | None = None,
         tta_flip: bool = False, query_id: str = "query",
         secondary_index: GalleryIndex | None = None,
         secondary_scorer: str | None = None,
         alpha: float = DEFAULT_ALPHA, embed_fn=None) -> RankedList:
    """Rank every gallery object against one query.

    scorer: min_l2 | top6 | embed | fused (default picked by index tag).
    With tta_flip, the horizontally flipped query is scored as well and
    each object keeps its better score. ``fused`` blends this index's
    scores with a secondary index's (both minmax-normalized per query).
    """
    if scorer is None:
        scorer = _default_scorer(index.tag)
    variants = [query]
    if tta_flip:
        variants.append(_flip_query(query))

    def scores_for(q):
        if scorer == "fused":
            if secondary_index is None:
                raise IndexError_("fused scorer needs a secondary_index")
            ids_a, raw_a = _raw_similarities(q, index, _default_scorer(index.tag), embed_fn)
            ids_b, raw_b = _raw_similarities(q, secondary_index,
                                             secondary_scorer or _default_scorer(secondary_index.tag),
                                             embed_fn)
            if ids_a != ids_b:
                raise IndexError_("fused indexes must cover identical object ids")
            return ids_a, fuse_scores(minmax_normalize(raw_a), minmax_normalize(raw_b), alpha)
        return _raw_similarities(q, index, scorer, embed_fn)

    ids, best = scores_for(variants[0])
    for q in variants[1:]:
        _, other = scores_for(q)
        best = np.maximum(best, other)
    order = sorted(range(len(ids)), key=lambda i: (-best[i], ids[i]))
    return RankedList(query_id, tuple((ids[i], float(best[i])) for i in order))


def _flip_query(query):
    if isinstance(query, FeatureVector):
        raise IndexError_("tta_flip needs the query image, not a precomputed vector")
    img = query if isinstance(query, ViewImage) else ViewImage(np.asarray(query, dtype=np.uint8), kind="sketch")
    return ViewImage(flip_horizontal(img).pixels, kind=img.kind)


# ---------------------------------------------------------------------------
# result serialization

def ranking_to_csv(ranked: RankedList) -> str:
    lines = ["query_id,rank,object_id,score"]
    for pos, (oid, score) in enumerate(ranked.ranking, start=1):
        lines.append(f"{ranked.query_id},{pos},{oid},{score:.9g}")
    return "\n".join(lines) + "\n"


def ranking_to_json(ranked: RankedList) -> str:
    return json.dumps({"query_id": ranked.query_id,
                       "ranking": [{"object_id": o, "score": s} for o, s in ranked.ranking]},
                      sort_keys=True)
