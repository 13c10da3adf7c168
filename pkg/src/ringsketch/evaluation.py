"""Retrieval quality metrics and leaderboard artifacts.

Seven metrics over ranked lists with binary relevance: nearest-neighbor
accuracy, precision@10, normalized discounted cumulative gain, average
precision, first/second tier recall, and fallout rate. All per-query
values are macro-averaged over the query set.

Conventions (documented because several are commonly defined loosely):

* NDCG divides the cumulative gain sum(rel_i / log2(i + 1)) by the ideal
  ordering's value, so a perfect ranking scores exactly 1.
* Average precision is the standard sum over relevant hits of
  precision-at-hit times 1/m. `literal_map=True` additionally divides by
  m, reproducing a formula variant with a redundant 1/r prefactor.
* Fallout counts non-relevant items inside a fixed top-`cutoff` window
  (default 10) against all non-relevant items in the gallery.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .retrieval import RankedList

METRIC_NAMES = ("nn", "p_at_10", "ndcg", "map", "ft", "st", "fr")
DEFAULT_FALLOUT_CUTOFF = 10


@dataclass(frozen=True)
class GroundTruth:
    """Relevant object sets per query over a fixed-size gallery."""

    relevant: dict
    gallery_size: int

    def __post_init__(self):
        if self.gallery_size < 1:
            raise DataError("gallery_size must be >= 1")
        rel = {str(q): frozenset(str(o) for o in objs) for q, objs in self.relevant.items()}
        for q, objs in rel.items():
            if not objs:
                raise DataError(f"query {q!r} has an empty relevant set")
            if len(objs) > self.gallery_size:
                raise DataError(f"query {q!r} has more relevant items than the gallery holds")
        object.__setattr__(self, "relevant", rel)

    def for_query(self, query_id: str) -> frozenset:
        try:
            return self.relevant[query_id]
        except KeyError:
            raise DataError(f"no ground truth for query {query_id!r}") from None


@dataclass(frozen=True)
class MetricsReport:
    nn: float
    p_at_10: float
    ndcg: float
    map: float
    ft: float
    st: float
    fr: float
    per_query: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for name in METRIC_NAMES:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataError(f"metric {name} = {v} outside [0, 1]")

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def _ids(ranking) -> list:
    if isinstance(ranking, RankedList):
        return ranking.object_ids()
    return [str(x) for x in ranking]


def nn_accuracy(ranking, relevant) -> float:
    """1 if the rank-1 item is relevant, else 0."""
    ids = _ids(ranking)
    if not ids:
        raise DataError("empty ranking")
    return 1.0 if ids[0] in relevant else 0.0


def p_at_k(ranking, relevant, k: int = 10) -> float:
    """Fraction of the top k that is relevant (short lists still divide by k)."""
    if k < 1:
        raise DataError("k must be >= 1")
    ids = _ids(ranking)[:k]
    return sum(1 for o in ids if o in relevant) / k


def ndcg(ranking, relevant) -> float:
    """Cumulative gain with log2(i+1) discounts, normalized by the ideal."""
    ids = _ids(ranking)
    m = len(relevant)
    if m == 0:
        raise DataError("need at least one relevant item")
    positions = np.arange(1, len(ids) + 1)
    rel = np.array([1.0 if o in relevant else 0.0 for o in ids])
    dcg = float((rel / np.log2(positions + 1)).sum())
    ideal_count = min(m, len(ids)) if ids else m
    idcg = float((1.0 / np.log2(np.arange(1, ideal_count + 1) + 1)).sum())
    if idcg == 0.0:
        raise DataError("empty ranking")
    return dcg / idcg


def average_precision(ranking, relevant, literal_map: bool = False) -> float:
    """Mean of precision at each relevant hit (recall steps of 1/m).

    literal_map divides the sum by m a second time, matching a formula
    that writes an extra 1/r in front of the recall increments.
    """
    ids = _ids(ranking)
    m = len(relevant)
    if m == 0:
        raise DataError("need at least one relevant item")
    hits = 0
    total = 0.0
    for i, oid in enumerate(ids, start=1):
        if oid in relevant:
            hits += 1
            total += hits / i
    ap = total / m
    return ap / m if literal_map else ap


def first_tier(ranking, relevant) -> float:
    """Recall within the top m, m = number of relevant items."""
    m = len(relevant)
    if m == 0:
        raise DataError("need at least one relevant item")
    top = _ids(ranking)[:m]
    return sum(1 for o in top if o in relevant) / m


def second_tier(ranking, relevant) -> float:
    """Recall within the top 2m."""
    m = len(relevant)
    if m == 0:
        raise DataError("need at least one relevant item")
    top = _ids(ranking)[:2 * m]
    return sum(1 for o in top if o in relevant) / m


def fallout_rate(ranking, relevant, gallery_size: int,
                 cutoff: int = DEFAULT_FALLOUT_CUTOFF) -> float:
    """Non-relevant items in the top cutoff / all non-relevant in gallery."""
    m = len(relevant)
    if cutoff > gallery_size:
        raise DataError(f"cutoff {cutoff} exceeds gallery size {gallery_size}")
    nonrel_total = gallery_size - m
    if nonrel_total <= 0:
        return 0.0
    top = _ids(ranking)[:cutoff]
    nonrel_hits = sum(1 for o in top if o not in relevant)
    return nonrel_hits / nonrel_total


def query_metrics(ranking, relevant, gallery_size: int,
                  cutoff: int = DEFAULT_FALLOUT_CUTOFF,
                  literal_map: bool = False) -> dict:
    """All seven metrics for a single query."""
    return {
        "nn": nn_accuracy(ranking, relevant),
        "p_at_10": p_at_k(ranking, relevant, 10),
        "ndcg": ndcg(ranking, relevant),
        "map": average_precision(ranking, relevant, literal_map),
        "ft": first_tier(ranking, relevant),
        "st": second_tier(ranking, relevant),
        "fr": fallout_rate(ranking, relevant, gallery_size, cutoff),
    }


def evaluate_all(rankings, gt: GroundTruth, cutoff: int = DEFAULT_FALLOUT_CUTOFF,
                 literal_map: bool = False) -> MetricsReport:
    """Macro-averaged metrics over a set of per-query rankings.

    rankings: iterable of RankedList (or mapping query_id -> ranking).
    Every query must have ground truth; an empty query set is an error.
    """
    if isinstance(rankings, dict):
        items = [(qid, r) for qid, r in rankings.items()]
    else:
        items = [(r.query_id, r) for r in rankings]
    if not items:
        raise DataError("no queries to evaluate")
    per_query = []
    for qid, ranking in items:
        rel = gt.for_query(qid)
        row = {"query_id": qid}
        row.update(query_metrics(ranking, rel, gt.gallery_size, cutoff, literal_map))
        per_query.append(row)
    means = {name: float(np.mean([row[name] for row in per_query])) for name in METRIC_NAMES}
    return MetricsReport(per_query=tuple(per_query), **means)


# ---------------------------------------------------------------------------
# artifacts

def load_ground_truth_csv(text: str, gallery_size: int) -> GroundTruth:
    """Parse `query_id,object_id` lines (header optional)."""
    rel: dict = {}
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        if not row or row[0].strip().lower() == "query_id":
            continue
        if len(row) < 2:
            raise DataError(f"ground truth row needs 2 columns: {row!r}")
        rel.setdefault(row[0].strip(), set()).add(row[1].strip())
    if not rel:
        raise DataError("ground truth is empty")
    return GroundTruth(relevant=rel, gallery_size=gallery_size)


def leaderboard_csv(reports: dict) -> str:
    """Rows of {team/run name -> MetricsReport} in leaderboard layout."""
    lines = ["Team/Run,NN,P@10,NDCG,mAP,FT,ST,FR"]
    for name, rep in reports.items():
        vals = [rep.nn, rep.p_at_10, rep.ndcg, rep.map, rep.ft, rep.st, rep.fr]
        lines.append(name + "," + ",".join(f"{v:.4f}" for v in vals))
    return "\n".join(lines) + "\n"


def precision_recall_points(ranking, relevant) -> list:
    """(recall, precision) at each relevant hit, for curve plotting."""
    ids = _ids(ranking)
    m = len(relevant)
    if m == 0:
        raise DataError("need at least one relevant item")
    pts = []
    hits = 0
    for i, oid in enumerate(ids, start=1):
        if oid in relevant:
            hits += 1
            pts.append((hits / m, hits / i))
    return pts


def precision_recall_csv(rankings, gt: GroundTruth) -> str:
    lines = ["query_id,recall,precision"]
    items = rankings.items() if isinstance(rankings, dict) else [(r.query_id, r) for r in rankings]
    for qid, ranking in items:
        for rec, prec in precision_recall_points(ranking, gt.for_query(qid)):
            lines.append(f"{qid},{rec:.6f},{prec:.6f}")
    return "\n".join(lines) + "\n"
