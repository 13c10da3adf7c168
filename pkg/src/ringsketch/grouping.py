"""Training-group assignment over gallery objects.

Objects whose rendered views have similar pooled descriptors are placed in
the same group; during contrastive training, all members of a group count
as positives for each other's sketches.  Each group also nominates a
representative: the member with the highest vertex count (richest
geometry), ties broken by object id.
"""

from __future__ import annotations

import numpy as np
from sklearn.cluster import KMeans

from .errors import DataError
from .seeding import seed_for


def pooled_object_features(feature_stacks) -> np.ndarray:
    """Mean descriptor over all of an object's views: (objects, features)."""
    pooled = []
    for stack in feature_stacks:
        arr = np.asarray(stack, dtype=np.float64)
        if arr.ndim == 3:
            arr = arr.reshape(-1, arr.shape[-1])
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise DataError("each feature stack must be (views, features)")
        pooled.append(arr.mean(axis=0))
    if not pooled:
        raise DataError("no objects to pool")
    return np.vstack(pooled)


def cluster_groups(object_ids, feature_stacks, n_groups: int,
                   vertex_counts: dict, master_seed: int = 0):
    """Group objects by nearest descriptor centroid.

    Returns ``(labels, representatives)``: ``labels`` maps every object id
    to a stable group name, ``representatives`` maps each group name to its
    highest-vertex-count member.  Group names are renumbered by each
    cluster's lexicographically smallest member so the naming never depends
    on the clusterer's internal label order.
    """
    ids = [str(i) for i in object_ids]
    if len(set(ids)) != len(ids):
        raise DataError("object ids must be unique")
    if not 1 <= n_groups <= len(ids):
        raise DataError(f"n_groups must be in [1, {len(ids)}], got {n_groups}")
    for oid in ids:
        if oid not in vertex_counts:
            raise DataError(f"missing vertex count for {oid!r}")
    pooled = pooled_object_features(feature_stacks)
    if pooled.shape[0] != len(ids):
        raise DataError("one feature stack per object id required")

    if n_groups == len(ids):
        raw = np.arange(len(ids))
    else:
        km = KMeans(
            n_clusters=n_groups,
            n_init=10,
            random_state=seed_for(master_seed, "grouping") % (2**32),
        )
        raw = km.fit_predict(pooled)

    members: dict = {}
    for oid, label in zip(ids, raw):
        members.setdefault(int(label), []).append(oid)
    ordered = sorted(members.values(), key=lambda group: min(group))
    labels = {}
    representatives = {}
    for number, group in enumerate(ordered):
        name = f"group{number:03d}"
        for oid in group:
            labels[oid] = name
        representatives[name] = max(
            sorted(group), key=lambda oid: vertex_counts[oid]
        )
    return labels, representatives
