"""Multi-positive contrastive loss over a batch of paired embeddings.

A batch holds 2N embeddings (N objects followed by their N sketches) plus,
for each index i, the set P_i of indices counted as positives for i.  For
every ordered positive pair (i, j) the loss term is

    l(i, j) = -sim(i, j)/t + log( sum_k exp(sim(i, k)/t) )

with cosine similarities, temperature t, and the sum running over
"allowed" k.  By default the allowed set excludes i itself *and* all of
i's positives, so a term can go negative when the positive similarity
beats every allowed competitor.  Setting
``include_positive_in_denominator`` widens the sum to every k != i, which
recovers the more common formulation whose terms are bounded below by 0.
The batch loss is the mean over all ordered positive pairs.

``nt_xent_loss`` also returns the analytic gradient with respect to the
raw (un-normalized) embeddings; the cosine normalization is part of the
differentiated graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError


@dataclass
class ContrastiveBatch:
    """Embeddings plus symmetric positive-pair structure.

    ``positive_sets[i]`` lists the indices whose embeddings should be pulled
    toward embedding ``i``.  Membership must be symmetric and never contain
    ``i`` itself.  Indices with an empty set contribute no loss terms of
    their own but still appear in other rows' denominators.
    """

    embeddings: np.ndarray
    positive_sets: tuple[frozenset[int], ...]
    temperature: float = 0.5

    def __post_init__(self) -> None:
        self.embeddings = np.asarray(self.embeddings, dtype=np.float64)
        if self.embeddings.ndim != 2:
            raise TrainingError("embeddings must be a 2-D array (count, dim)")
        n = self.embeddings.shape[0]
        if n < 2:
            raise TrainingError("a contrastive batch needs at least 2 embeddings")
        if not np.all(np.isfinite(self.embeddings)):
            raise TrainingError("embeddings contain non-finite values")
        if len(self.positive_sets) != n:
            raise TrainingError("need one positive set per embedding")
        sets = tuple(frozenset(int(j) for j in s) for s in self.positive_sets)
        for i, s in enumerate(sets):
            for j in s:
                if not 0 <= j < n:
                    raise TrainingError(f"positive index {j} out of range")
                if j == i:
                    raise TrainingError("an embedding cannot be its own positive")
                if i not in sets[j]:
                    raise TrainingError("positive sets must be symmetric")
        self.positive_sets = sets
        if not self.temperature > 0.0:
            raise TrainingError("temperature must be positive")

    @property
    def count(self) -> int:
        return self.embeddings.shape[0]


def paired_batch(
    object_embeddings: np.ndarray,
    sketch_embeddings: np.ndarray,
    group_labels,
    temperature: float = 0.5,
) -> ContrastiveBatch:
    """Build a batch from N (object, sketch) pairs and per-pair group labels.

    Embedding i (object) and embedding N+i (its sketch) share
    ``group_labels[i]``; every same-group embedding of either kind is a
    positive.
    """
    objects = np.asarray(object_embeddings, dtype=np.float64)
    sketches = np.asarray(sketch_embeddings, dtype=np.float64)
    if objects.shape != sketches.shape:
        raise TrainingError("object and sketch embedding blocks must match in shape")
    n = objects.shape[0]
    labels = list(group_labels)
    if len(labels) != n:
        raise TrainingError("need one group label per pair")
    all_labels = labels + labels
    positives = tuple(
        frozenset(j for j in range(2 * n) if j != i and all_labels[j] == all_labels[i])
        for i in range(2 * n)
    )
    return ContrastiveBatch(
        embeddings=np.vstack([objects, sketches]),
        positive_sets=positives,
        temperature=temperature,
    )


def nt_xent_loss(
    batch: ContrastiveBatch,
    include_positive_in_denominator: bool = False,
):
    """Return ``(loss, gradient)`` with gradient w.r.t. ``batch.embeddings``."""
    z = batch.embeddings
    n = batch.count
    tau = batch.temperature

    norms = np.linalg.norm(z, axis=1)
    if np.any(norms == 0.0):
        raise TrainingError("zero-norm embedding in contrastive batch")
    unit = z / norms[:, None]
    sims = unit @ unit.T

    # allowed[i, k]: does exp(sims[i, k]/tau) appear in row i's denominator?
    allowed = np.ones((n, n), dtype=bool)
    np.fill_diagonal(allowed, False)
    if not include_positive_in_denominator:
        for i, pos in enumerate(batch.positive_sets):
            for j in pos:
                allowed[i, j] = False

    pair_counts = np.array([len(pos) for pos in batch.positive_sets])
    total_pairs = int(pair_counts.sum())
    if total_pairs == 0:
        raise TrainingError("batch has no positive pairs")
    rows_with_pairs = pair_counts > 0
    if np.any(rows_with_pairs & ~allowed.any(axis=1)):
        raise TrainingError("a loss row has an empty denominator")

    scaled = sims / tau
    # Stable log-sum-exp over each row's allowed entries.
    masked = np.where(allowed, scaled, -np.inf)
    row_max = masked.max(axis=1)
    safe_max = np.where(np.isfinite(row_max), row_max, 0.0)
    exp_terms = np.where(allowed, np.exp(scaled - safe_max[:, None]), 0.0)
    denom = exp_terms.sum(axis=1)
    log_denom = safe_max + np.log(np.where(denom > 0.0, denom, 1.0))

    loss = 0.0
    for i, pos in enumerate(batch.positive_sets):
        for j in pos:
            loss += -scaled[i, j] + log_denom[i]
    loss /= total_pairs

    # d loss / d sims, treating sims[i, k] as independent entries.
    d_sims = np.zeros((n, n))
    softmax = np.where(allowed, exp_terms / np.where(denom > 0.0, denom, 1.0)[:, None], 0.0)
    for i, pos in enumerate(batch.positive_sets):
        if not pos:
            continue
        for j in pos:
            d_sims[i, j] -= 1.0
        d_sims[i] += len(pos) * softmax[i]
    d_sims /= total_pairs * tau

    # sims = unit @ unit.T  =>  d/d unit = (d_sims + d_sims.T) @ unit.
    d_unit = (d_sims + d_sims.T) @ unit
    # unit_i = z_i / |z_i|  =>  pull back through the normalization.
    inner = (d_unit * unit).sum(axis=1, keepdims=True)
    d_z = (d_unit - unit * inner) / norms[:, None]
    return float(loss), d_z


__all__ = ["ContrastiveBatch", "paired_batch", "nt_xent_loss"]
