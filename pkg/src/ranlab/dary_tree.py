"""Random d-ary recursive trees: growth, branch sizes and weights, level sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ._kernels import aleph_kernel, grow_dary_kernel
from .stochastics import ParameterError

#: Largest arena (in nodes) the generators will allocate.
MAX_NODES = 2**31 - 1


class CapacityError(RuntimeError):
    """Requested instance would overflow the index space."""


@dataclass
class TreeArena:
    """Flat, append-only rooted tree.

    ``children[v]`` holds ``d`` child indices (all ``-1`` for a leaf);
    ``leaves`` is the live-leaf registry in slot order.
    """

    d: int
    t: int
    parent: np.ndarray
    children: np.ndarray
    birth: np.ndarray
    depth: np.ndarray
    leaves: np.ndarray
    seed: Optional[int] = None
    _aleph: Optional[np.ndarray] = field(default=None, repr=False)
    _levels: Optional[list] = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def is_leaf(self, v: int) -> bool:
        return self.children[v, 0] < 0

    def check_node(self, v: int) -> int:
        if not 0 <= v < self.n_nodes:
            raise IndexError(f"node {v} not in tree of {self.n_nodes} nodes")
        return int(v)

    def random_leaf(self, rng: np.random.Generator) -> int:
        return int(self.leaves[rng.integers(self.n_leaves)])

    @property
    def aleph(self) -> np.ndarray:
        if self._aleph is None:
            self._aleph = aleph_kernel(self.children)
        return self._aleph

    @property
    def weights(self) -> np.ndarray:
        return (self.aleph - 1) // self.d

    @property
    def levels(self) -> list:
        """Node indices grouped by depth, each group in index order."""
        if self._levels is None:
            order = np.argsort(self.depth, kind="stable")
            counts = np.bincount(self.depth)
            self._levels = np.split(order, np.cumsum(counts)[:-1])
        return self._levels

    def subtree(self, v: int) -> np.ndarray:
        v = self.check_node(v)
        out = [v]
        stack = [v]
        while stack:
            u = stack.pop()
            if self.children[u, 0] >= 0:
                kids = self.children[u].tolist()
                out.extend(kids)
                stack.extend(kids)
        return np.sort(np.array(out, dtype=np.int64))

    def to_edge_list(self) -> str:
        lines = [f"{self.d} {self.t} {'' if self.seed is None else self.seed}".rstrip()]
        lines += [f"{c} {p}" for c, p in enumerate(self.parent.tolist()) if p >= 0]
        return "\n".join(lines) + "\n"

    def write_edge_list(self, path) -> None:
        Path(path).write_text(self.to_edge_list())


@dataclass(frozen=True)
class BranchStats:
    aleph: int
    weight: int


def leaf_picks(t: int, n_start: int, step: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform slot indices for registries of size ``n_start + step * s``."""
    if t == 0:
        return np.zeros(0, dtype=np.int64)
    sizes = n_start + step * np.arange(t, dtype=np.int64)
    return rng.integers(0, sizes).astype(np.int64)


def grow_tree(d: int, t: int, rng: np.random.Generator, seed: Optional[int] = None) -> TreeArena:
    """Grow T_t: ``t`` times, give ``d`` offspring to a uniformly random leaf."""
    if int(d) != d or d < 2:
        raise ParameterError(f"d must be an integer >= 2, got {d}")
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    if 1 + d * t > MAX_NODES:
        raise CapacityError(f"1 + d*t = {1 + d * t} exceeds capacity {MAX_NODES}")
    picks = leaf_picks(t, 1, d - 1, rng)
    parent, children, birth, depth, leaves = grow_dary_kernel(d, t, picks)
    return TreeArena(d, t, parent, children, birth, depth, leaves, seed=seed)


def branch_stats(tree: TreeArena, v: int) -> BranchStats:
    """Branch size aleph(v, t) and weight W(v, t) = (aleph - 1) / d."""
    v = tree.check_node(v)
    a = int(tree.aleph[v])
    return BranchStats(a, (a - 1) // tree.d)


def level_set(tree: TreeArena, n: int) -> np.ndarray:
    if n < 0:
        raise ParameterError("level must be nonnegative")
    levels = tree.levels
    return levels[n] if n < len(levels) else np.zeros(0, dtype=np.int64)


def path_to_root(tree: TreeArena, v: int) -> list[int]:
    """Nodes on [root, v], root first."""
    v = tree.check_node(v)
    out = [v]
    while tree.parent[out[-1]] >= 0:
        out.append(int(tree.parent[out[-1]]))
    return out[::-1]


def node_at_position(tree: TreeArena, positions) -> int:
    """Follow child positions from the root; -1 if the vertex is not in the tree."""
    v = 0
    for i in positions:
        if tree.children[v, 0] < 0:
            return -1
        v = int(tree.children[v, i])
    return v
