"""Brute-force reference implementations used only by tests.

Written independently of the package code (pure Python, explicit loops,
math module only) so agreement is meaningful evidence of correctness.
"""

import math


def oracle_nn(ranked_ids, relevant):
    return 1.0 if ranked_ids and ranked_ids[0] in set(relevant) else 0.0


def oracle_p_at_k(ranked_ids, relevant, k=10):
    rel = set(relevant)
    hits = 0
    for oid in list(ranked_ids)[:k]:
        if oid in rel:
            hits += 1
    return hits / k


def oracle_dcg(flags):
    total = 0.0
    for idx, flag in enumerate(flags):
        i = idx + 1
        if flag:
            total += 1.0 / math.log2(i + 1)
    return total


def oracle_ndcg(ranked_ids, relevant):
    rel = set(relevant)
    flags = [oid in rel for oid in ranked_ids]
    ideal_hits = min(len(rel), len(flags))
    ideal = [True] * ideal_hits
    denom = oracle_dcg(ideal)
    return oracle_dcg(flags) / denom


def oracle_average_precision(ranked_ids, relevant, literal=False):
    rel = set(relevant)
    m = len(rel)
    seen = 0
    acc = 0.0
    for idx, oid in enumerate(ranked_ids):
        if oid in rel:
            seen += 1
            precision_here = seen / (idx + 1)
            acc += precision_here * (1.0 / m)
    if literal:
        return acc / m
    return acc


def oracle_first_tier(ranked_ids, relevant):
    rel = set(relevant)
    m = len(rel)
    hits = 0
    for oid in list(ranked_ids)[:m]:
        if oid in rel:
            hits += 1
    return hits / m


def oracle_second_tier(ranked_ids, relevant):
    rel = set(relevant)
    m = len(rel)
    hits = 0
    for oid in list(ranked_ids)[:2 * m]:
        if oid in rel:
            hits += 1
    return hits / m


def oracle_fallout(ranked_ids, relevant, gallery_size, cutoff=10):
    rel = set(relevant)
    nonrel_total = gallery_size - len(rel)
    if nonrel_total <= 0:
        return 0.0
    bad = 0
    for oid in list(ranked_ids)[:cutoff]:
        if oid not in rel:
            bad += 1
    return bad / nonrel_total


ORACLES = {
    "nn": oracle_nn,
    "p_at_10": oracle_p_at_k,
    "ndcg": oracle_ndcg,
    "map": oracle_average_precision,
    "ft": oracle_first_tier,
    "st": oracle_second_tier,
}


def oracle_min_l2(query, views):
    best = None
    for view in views:
        acc = 0.0
        for a, b in zip(query, view):
            acc += (a - b) ** 2
        dist = math.sqrt(acc)
        if best is None or dist < best:
            best = dist
    return best


def oracle_cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    return dot / (nu * nv)


def oracle_top6_sum_max(query, groups, top_k=6):
    best = None
    for group in groups:
        sims = sorted((oracle_cosine(query, v) for v in group), reverse=True)
        score = sum(sims[:top_k])
        if best is None or score > best:
            best = score
    return best
