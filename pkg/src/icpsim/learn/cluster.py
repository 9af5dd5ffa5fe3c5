"""Information-set discovery: group hidden contexts by pre-trained Q-vectors.

The fully observable pre-trainer tags every visited state key with the
hidden context an informed partner could report about the actor.  Averaging
the Q-rows of all keys that share a context gives one vector per context;
contexts whose vectors land in the same cluster are treated as the same
information set and mapped to the same message.  Everything here is
deterministic for a fixed seed: rows are ordered by their canonical
encoding, ties always resolve to the lowest index, and final labels are
renumbered by first occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import canonical, make_rng
from .tables import MessageStrategy
from .train import FullObsResult


def collect_context_vectors(full: FullObsResult,
                            default_q: float = 0.0) -> tuple[tuple, np.ndarray]:
    """Mean Q-vector per hidden context, rows ordered canonically."""
    sums: dict = {}
    counts: dict = {}
    for key, (_agent, ctx) in full.key_context.items():
        row = np.array([full.table.get((key, a), default_q)
                        for a in range(full.n_actions)], dtype=float)
        if ctx in sums:
            sums[ctx] += row
            counts[ctx] += 1
        else:
            sums[ctx] = row.copy()
            counts[ctx] = 1
    if not sums:
        raise ValueError("no visited keys to cluster")
    contexts = tuple(sorted(sums, key=canonical))
    matrix = np.stack([sums[c] / counts[c] for c in contexts])
    return contexts, matrix


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / np.where(norms > 0.0, norms, 1.0)


def _assign(rows: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # argmin breaks ties toward the lowest center index
    dists = np.linalg.norm(rows[:, None, :] - centers[None, :, :], axis=2)
    return np.argmin(dists, axis=1)


def kmeans_labels(matrix: np.ndarray, k: int, seed: int,
                  max_iters: int = 100) -> np.ndarray:
    """Lloyd's algorithm on L2-normalized rows with farthest-point init."""
    if k < 1:
        raise ValueError("need at least one cluster")
    rows = _normalize_rows(np.asarray(matrix, dtype=float))
    n = rows.shape[0]
    rng = make_rng(seed, 0xC1)
    chosen = [int(rng.integers(n))]
    while len(chosen) < min(k, n):
        dist = np.min(np.stack([np.linalg.norm(rows - rows[i], axis=1)
                                for i in chosen]), axis=0)
        best = int(np.argmax(dist))
        if best in chosen:  # every leftover row duplicates a center
            best = next(i for i in range(n) if i not in chosen)
        chosen.append(best)
    centers = rows[chosen].copy()
    labels = _assign(rows, centers)
    for _ in range(max_iters):
        for j in range(centers.shape[0]):
            members = rows[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
        new_labels = _assign(rows, centers)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    # renumber by first occurrence so the labeling is order-canonical
    mapping: dict[int, int] = {}
    out = np.empty(n, dtype=int)
    for i, lab in enumerate(labels):
        if int(lab) not in mapping:
            mapping[int(lab)] = len(mapping)
        out[i] = mapping[int(lab)]
    return out


@dataclass
class ClusterResult:
    contexts: tuple
    vectors: np.ndarray
    labels: np.ndarray
    strategy: MessageStrategy

    @property
    def n_clusters(self) -> int:
        return len(set(int(x) for x in self.labels))

    @property
    def injective(self) -> bool:
        return self.n_clusters == len(self.contexts)


def cluster_information_sets(full: FullObsResult, k: int, seed: int,
                             default_q: float = 0.0) -> ClusterResult:
    """Cluster contexts into at most k information sets and freeze the map."""
    contexts, matrix = collect_context_vectors(full, default_q)
    labels = kmeans_labels(matrix, k, seed)
    table = {ctx: int(lab) for ctx, lab in zip(contexts, labels)}
    strategy = MessageStrategy(table=table, k=k, frozen=True)
    return ClusterResult(contexts=contexts, vectors=matrix,
                         labels=labels, strategy=strategy)
