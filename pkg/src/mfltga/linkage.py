"""Gene-linkage learning: entropy-based proximity and per-task linkage trees.

The dependency model is an agglomerative hierarchy over gene positions.  Gene
distance is the normalized joint-entropy distance

    d(x, y) = 2 - (H(x) + H(y)) / H(x, y)

computed from empirical frequencies in bits, with d = 0 when the joint entropy
vanishes.  Clusters are merged bottom-up under average linkage (UPGMA), the
running distances maintained with the Lance-Williams update.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidStateError
from .mfo import Population, TaskDefinition


@dataclass
class TaskPopulation:
    """Rows of task-space gene vectors used to fit one task's tree."""

    task_id: int
    rows: list


@dataclass
class LinkageTree:
    """Merge history of gene clusters for one task.

    clusters are recorded in creation order: the first L entries are the
    singleton leaves {0}..{L-1}, each later entry is the union produced by one
    merge, the last entry is the root.  children[i] holds the two merged
    cluster indexes for internal nodes (None for leaves), merge_distance[i]
    the linkage distance of that merge.
    """

    task_id: int
    clusters: list
    children: list
    merge_distance: list

    @property
    def num_genes(self) -> int:
        return (len(self.clusters) + 1) // 2

    @property
    def root(self) -> int:
        return len(self.clusters) - 1

    def crossover_masks(self):
        """All clusters except the root, largest first, recent merges first on ties."""
        order = sorted(
            range(len(self.clusters) - 1),
            key=lambda i: (-len(self.clusters[i]), -i),
        )
        return [self.clusters[i] for i in order]

    def dump(self) -> str:
        """Indented text rendering of the merge hierarchy (for debugging/goldens)."""
        lines = []

        def walk(node, depth):
            label = "{" + ",".join(str(g) for g in self.clusters[node]) + "}"
            dist = self.merge_distance[node]
            if dist is not None:
                label += f" d={dist:.6f}"
            lines.append("  " * depth + label)
            if self.children[node] is not None:
                lo, hi = self.children[node]
                walk(lo, depth + 1)
                walk(hi, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines)


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _compact(column: np.ndarray):
    """Map a column to dense codes 0..card-1 (counts preserved)."""
    _, codes = np.unique(column, return_inverse=True)
    card = int(codes.max()) + 1 if codes.size else 0
    return codes, card


def _pair_distance(cx, card_x, hx, cy, card_y, hy) -> float:
    joint = np.bincount(cx * card_y + cy, minlength=card_x * card_y)
    hxy = _entropy_bits(joint)
    if hxy == 0.0:
        return 0.0
    return 2.0 - (hx + hy) / hxy


def pairwise_distance(col_x, col_y) -> float:
    """Entropy distance between two gene columns of equal length >= 1."""
    x = np.asarray(col_x)
    y = np.asarray(col_y)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise InvalidStateError("gene columns must be 1-d and of equal length")
    if x.size == 0:
        raise InvalidStateError("gene columns must hold at least one sample")
    cx, card_x = _compact(x)
    cy, card_y = _compact(y)
    hx = _entropy_bits(np.bincount(cx, minlength=card_x))
    hy = _entropy_bits(np.bincount(cy, minlength=card_y))
    return _pair_distance(cx, card_x, hx, cy, card_y, hy)


def proximity_matrix(rows) -> np.ndarray:
    """Symmetric L x L gene-distance matrix with a zero diagonal."""
    data = np.asarray(rows)
    if data.ndim != 2 or data.shape[0] == 0:
        raise InvalidStateError("need a non-empty 2-d sample of gene rows")
    n_rows, n_genes = data.shape
    codes = []
    cards = []
    ents = []
    for g in range(n_genes):
        c, card = _compact(data[:, g])
        codes.append(c)
        cards.append(card)
        ents.append(_entropy_bits(np.bincount(c, minlength=card)))
    dist = np.zeros((n_genes, n_genes))
    for i in range(n_genes):
        for j in range(i + 1, n_genes):
            d = _pair_distance(codes[i], cards[i], ents[i], codes[j], cards[j], ents[j])
            dist[i, j] = d
            dist[j, i] = d
    return dist


def build_tree(task_pop: TaskPopulation) -> LinkageTree:
    """Agglomerate gene clusters for one task into a linkage tree.

    Merge order: repeatedly join the pair of active clusters at minimum
    average-linkage distance; among equal minima the pair with the
    lexicographically smallest (min cluster id, max cluster id) wins.  A tree
    over L genes always holds exactly 2L-1 nodes.
    """
    if not task_pop.rows:
        raise InvalidStateError("cannot build a linkage tree from an empty population")
    base = proximity_matrix(task_pop.rows)
    n_genes = base.shape[0]
    total = 2 * n_genes - 1
    clusters = [(g,) for g in range(n_genes)]
    children = [None] * n_genes
    merge_distance = [None] * n_genes
    if n_genes == 1:
        return LinkageTree(task_pop.task_id, clusters, children, merge_distance)

    dist = np.full((total, total), np.inf)
    dist[:n_genes, :n_genes] = base
    np.fill_diagonal(dist, np.inf)
    active = list(range(n_genes))
    sizes = {g: 1 for g in range(n_genes)}

    while len(active) > 1:
        act = np.asarray(active)
        sub = dist[np.ix_(act, act)]
        flat = int(np.argmin(sub))
        ai, aj = divmod(flat, len(act))
        # active ids are kept ascending, so the first row-major minimum is the
        # lexicographically smallest (min id, max id) pair among the ties
        id_i, id_j = int(act[ai]), int(act[aj])
        if id_i > id_j:
            id_i, id_j = id_j, id_i
        new_id = len(clusters)
        merged = tuple(sorted(clusters[id_i] + clusters[id_j]))
        clusters.append(merged)
        children.append((id_i, id_j))
        merge_distance.append(float(dist[id_i, id_j]))
        si, sj = sizes[id_i], sizes[id_j]
        sizes[new_id] = si + sj
        rest = [o for o in active if o != id_i and o != id_j]
        if rest:
            r = np.asarray(rest)
            updated = (si * dist[id_i, r] + sj * dist[id_j, r]) / (si + sj)
            dist[new_id, r] = updated
            dist[r, new_id] = updated
        active = rest + [new_id]

    return LinkageTree(task_pop.task_id, clusters, children, merge_distance)


def build_all_trees(pop: Population, tasks: Sequence[TaskDefinition]):
    """One linkage tree per task, fitted on that task's skill group.

    Rows are genotypes truncated to the task dimension.  A task whose skill
    group is empty falls back to the whole population so a tree always exists.
    """
    trees = []
    for task in tasks:
        rows = [
            ind.genotype[: task.dimension]
            for ind in pop.members
            if ind.skill_factor == task.task_id
        ]
        if not rows:
            rows = [ind.genotype[: task.dimension] for ind in pop.members]
        trees.append(build_tree(TaskPopulation(task.task_id, rows)))
    return trees
