"""Exact subtree optimisation on recursive trees and on weighted complete trees.

An r-ary subtree is a connected, downward-closed set of vertices in which
every vertex keeps at most ``r`` of its children.  A buono subtree (of a
3-ary tree) is one in which every vertex has at most eight grand-offspring
inside the subtree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import buono_kernel
from .dary_tree import TreeArena
from .stochastics import ParameterError, sample_dirichlet, upsilon_dary

NEG = np.int64(-(2**40))
MAX_GRAND_OFFSPRING = 8


class ConstraintViolation(ValueError):
    """A vertex set does not satisfy the claimed subtree constraint."""


@dataclass(frozen=True)
class SubtreeWitness:
    size: int
    nodes: Optional[list] = None

    def __post_init__(self):
        if self.nodes is not None and self.size != len(self.nodes):
            raise ValueError("witness size disagrees with its node list")


def _top_r_order(values: np.ndarray, r: int) -> np.ndarray:
    # stable sort on -value: ties resolved toward the smaller child position
    return np.argsort(-values, axis=-1, kind="stable")[..., :r]


# ---------------------------------------------------------------------------
# largest r-ary subtree


def r_ary_sizes(tree: TreeArena, r: int) -> np.ndarray:
    """f(v) = 1 + sum of the r largest f over the children of v."""
    if not 1 <= r < tree.d:
        raise ParameterError(f"need 1 <= r < d = {tree.d}, got r={r}")
    f = np.ones(tree.n_nodes, dtype=np.int64)
    for level in reversed(tree.levels):
        internal = level[tree.children[level, 0] >= 0]
        if internal.size == 0:
            continue
        fc = f[tree.children[internal]]
        fc.sort(axis=1)
        f[internal] = 1 + fc[:, -r:].sum(axis=1)
    return f


def largest_r_ary_subtree(tree: TreeArena, r: int, witness: bool = True) -> SubtreeWitness:
    f = r_ary_sizes(tree, r)
    if not witness:
        return SubtreeWitness(int(f[0]))
    nodes = []
    stack = [0]
    while stack:
        v = stack.pop()
        nodes.append(v)
        if tree.children[v, 0] >= 0:
            kids = tree.children[v]
            stack.extend(kids[_top_r_order(f[kids], r)].tolist())
    return SubtreeWitness(int(f[0]), sorted(nodes))


def is_r_ary_subtree(tree: TreeArena, nodes, r: int) -> bool:
    s = set(int(v) for v in nodes)
    if not s:
        return False
    tops = [v for v in s if tree.parent[v] < 0 or int(tree.parent[v]) not in s]
    if len(tops) != 1:
        return False
    return all(sum(int(c) in s for c in tree.children[v] if c >= 0) <= r for v in s)


# ---------------------------------------------------------------------------
# largest buono subtree
#
# F[v, k] is the largest buono subtree rooted at v in which v keeps exactly k
# children.  Grand-offspring of v are then counted by the children's k values,
# so the constraint at v reads sum(k_c) <= 8 over the kept children c.

def _buono_combos():
    # option per child position: 0..3 = kept with that many children, 4 = dropped
    combos = [c for c in itertools.product(range(5), repeat=3)
              if sum(o for o in c if o < 4) <= MAX_GRAND_OFFSPRING]
    kept = np.array([sum(o < 4 for o in c) for c in combos])
    return np.array(combos), kept


_COMBOS, _COMBO_KEPT = _buono_combos()


def buono_table(tree: TreeArena):
    """Return ``(F, choice)``: the (n, 4) DP table and the argmax combo per entry."""
    if tree.d != 3:
        raise ParameterError(f"buono subtrees need a 3-ary tree, got d={tree.d}")
    return buono_kernel(tree.children, _COMBOS, _COMBO_KEPT, NEG)


def buono_sizes(tree: TreeArena) -> np.ndarray:
    """Largest buono subtree rooted at each vertex."""
    F, _ = buono_table(tree)
    return F.max(axis=1)


def largest_buono_subtree(tree: TreeArena, witness: bool = True) -> SubtreeWitness:
    F, choice = buono_table(tree)
    k0 = int(F[0].argmax())
    size = int(F[0, k0])
    if not witness:
        return SubtreeWitness(size)
    nodes = []
    stack = [(0, k0)]
    while stack:
        v, k = stack.pop()
        nodes.append(v)
        if k == 0:
            continue
        combo = _COMBOS[choice[v, k]]
        for pos, opt in enumerate(combo.tolist()):
            if opt < 4:
                stack.append((int(tree.children[v, pos]), opt))
    return SubtreeWitness(size, sorted(nodes))


def grand_offspring_counts(tree: TreeArena, nodes) -> dict:
    """Number of grand-offspring inside ``nodes`` for each vertex of ``nodes``."""
    s = set(int(v) for v in nodes)
    out = {}
    for v in s:
        cnt = 0
        if tree.children[v, 0] >= 0:
            for c in tree.children[v]:
                if int(c) in s and tree.children[c, 0] >= 0:
                    cnt += sum(int(g) in s for g in tree.children[c])
        out[v] = cnt
    return out


def is_buono(tree: TreeArena, nodes) -> bool:
    s = set(int(v) for v in nodes)
    if not s:
        return True
    tops = [v for v in s if tree.parent[v] < 0 or int(tree.parent[v]) not in s]
    if len(tops) != 1:
        return False
    return max(grand_offspring_counts(tree, s).values()) <= MAX_GRAND_OFFSPRING


# ---------------------------------------------------------------------------
# weighted complete trees


@dataclass
class WeightedTreeSample:
    """Complete d-ary tree truncated at ``depth``, stored level by level.

    Node ``i`` of level ``k`` has children ``d*i .. d*i + d - 1`` on level
    ``k + 1``.  ``x[k]`` are the offspring fractions (``x[0] == [1]``),
    ``upsilon[k]`` is defined for levels ``0 .. depth - 1``.
    """

    d: int
    r: int
    depth: int
    x: list
    upsilon: list
    mass: list
    adjusted: list

    def parent_index(self, i: int) -> int:
        return i // self.d


def sample_weighted_tree(d: int, r: int, depth: int, rng: np.random.Generator) -> WeightedTreeSample:
    if not 1 <= r < d:
        raise ParameterError(f"need 1 <= r < d, got d={d}, r={r}")
    if depth < 0:
        raise ParameterError("depth must be nonnegative")
    x = [np.ones(1)]
    ups = []
    mass = [np.ones(1)]
    adjusted = [np.ones(1)]
    scale = np.ones(1)
    for k in range(depth):
        vecs = sample_dirichlet(d, rng, d**k)
        u = upsilon_dary(vecs, r)
        ups.append(np.atleast_1d(u))
        # scale carries prod over [root, node] of X / (1 - Upsilon), level k
        if k:
            scale = np.repeat(scale, d)
        scale = scale * x[k] / (1.0 - ups[k])
        x.append(vecs.reshape(-1))
        mass.append(np.repeat(mass[k], d) * x[k + 1])
        # the vertex's own fraction enters too: adjusted = Ma(v) / prod (1 - Upsilon)
        adjusted.append(np.repeat(scale, d) * x[k + 1])
    return WeightedTreeSample(d, r, depth, x, ups, mass, adjusted)


def max_mass_r_ary(sample: WeightedTreeSample, r: int, n: int) -> float:
    """max over C in G_{n,r} of Ma(C).

    ``r == d`` is accepted as a diagnostic (it returns the full level mass).
    """
    if n > sample.depth or n < 0:
        raise ParameterError(f"level {n} outside sample depth {sample.depth}")
    if not 1 <= r <= sample.d:
        raise ParameterError(f"need 1 <= r <= d, got r={r}")
    best = sample.mass[n]
    for _ in range(n):
        blocks = np.sort(best.reshape(-1, sample.d), axis=1)
        best = blocks[:, -r:].sum(axis=1)
    return float(best[0])


def covering_subtree_arity(d: int, n: int, level_nodes) -> int:
    """Largest child count in the union of root paths to ``level_nodes``."""
    cur = np.unique(np.asarray(level_nodes, dtype=np.int64))
    worst = 0
    for _ in range(n):
        par, counts = np.unique(cur // d, return_counts=True)
        worst = max(worst, int(counts.max()))
        cur = par
    return worst


def adjusted_mass(sample: WeightedTreeSample, level_nodes, n: int) -> float:
    """Sum of adjusted masses over a level-n set lying in one r-ary subtree."""
    if n > sample.depth or n < 0:
        raise ParameterError(f"level {n} outside sample depth {sample.depth}")
    idx = np.unique(np.asarray(level_nodes, dtype=np.int64))
    if idx.size == 0:
        return 0.0
    if idx.min() < 0 or idx.max() >= sample.d**n:
        raise ParameterError("node index outside level")
    if covering_subtree_arity(sample.d, n, idx) > sample.r:
        raise ConstraintViolation(f"set is not contained in any {sample.r}-ary subtree")
    return float(sample.adjusted[n][idx].sum())


def random_r_ary_level_set(sample: WeightedTreeSample, n: int, rng: np.random.Generator,
                           thin: bool = True) -> np.ndarray:
    """Level-n leaves of a random r-ary subtree, optionally randomly thinned."""
    d, r = sample.d, sample.r
    cur = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        nxt = []
        for v in cur.tolist():
            k = int(rng.integers(1, r + 1))
            picks = rng.choice(d, size=k, replace=False)
            nxt.extend((d * v + picks).tolist())
        cur = np.array(sorted(nxt), dtype=np.int64)
    if thin and cur.size > 1:
        keep = rng.random(cur.size) < 0.5
        keep[rng.integers(cur.size)] = True
        cur = cur[keep]
    return cur
