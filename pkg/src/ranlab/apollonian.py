"""Random Apollonian networks grown in lockstep with their triangle (Delta) tree.

No coordinates are kept: a face is a vertex triple, and the triangle of every
Delta-tree node is stored as ``node_tri[node]``.  The vertex inserted when a
node's triangle is subdivided is ``node_center[node]``, and the node that
created vertex ``u`` is ``vertex_node[u]`` (``-1`` for the outer three).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ._kernels import grow_ran_kernel
from .dary_tree import MAX_NODES, CapacityError, TreeArena, leaf_picks
from .stochastics import ParameterError


@dataclass
class DeltaTree(TreeArena):
    node_tri: np.ndarray = None
    node_center: np.ndarray = None


@dataclass
class RanGraph:
    t: int
    edges: np.ndarray
    faces: np.ndarray
    face_node: np.ndarray
    vertex_node: np.ndarray
    seed: Optional[int] = None
    _adj: Optional[list] = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return self.t + 3

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def adjacency(self) -> list[list[int]]:
        """Sorted neighbour lists."""
        if self._adj is None:
            adj = [[] for _ in range(self.n_vertices)]
            for u, v in self.edges.tolist():
                adj[u].append(v)
                adj[v].append(u)
            self._adj = [sorted(a) for a in adj]
        return self._adj

    def edge_set(self) -> set:
        return {(min(u, v), max(u, v)) for u, v in self.edges.tolist()}

    def to_edge_list(self) -> str:
        head = f"{self.t} {'' if self.seed is None else self.seed}".rstrip()
        return head + "\n" + "".join(f"{u} {v}\n" for u, v in self.edges.tolist())

    def to_face_list(self) -> str:
        head = f"{self.t} {'' if self.seed is None else self.seed}".rstrip()
        return head + "\n" + "".join(f"{a} {b} {c}\n" for a, b, c in self.faces.tolist())

    def write_edge_list(self, path) -> None:
        Path(path).write_text(self.to_edge_list())

    def write_face_list(self, path) -> None:
        Path(path).write_text(self.to_face_list())


def grow_ran(t: int, rng: np.random.Generator, seed: Optional[int] = None) -> tuple[RanGraph, DeltaTree]:
    """Subdivide a uniformly random bounded face ``t`` times."""
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    if 1 + 3 * t > MAX_NODES:
        raise CapacityError(f"Delta-tree of {1 + 3 * t} nodes exceeds capacity {MAX_NODES}")
    picks = leaf_picks(t, 1, 2, rng)
    (parent, children, birth, depth, node_tri, node_center,
     vertex_node, faces, face_node, edges) = grow_ran_kernel(t, picks)
    delta = DeltaTree(3, t, parent, children, birth, depth, face_node.copy(), seed=seed,
                      node_tri=node_tri, node_center=node_center)
    ran = RanGraph(t, edges, faces, face_node, vertex_node, seed=seed)
    return ran, delta


def strictly_inside_count(ran: RanGraph, delta: DeltaTree, node: int) -> int:
    """|I(Delta)|: internal Delta-tree nodes in the subtree of ``node``.

    Each internal node created exactly one vertex inside its triangle, so this
    is the branch weight W(node, t).
    """
    node = delta.check_node(node)
    return int(delta.weights[node])


def inside_vertices(ran: RanGraph, delta: DeltaTree, node: int) -> list[int]:
    node = delta.check_node(node)
    sub = delta.subtree(node)
    centres = delta.node_center[sub]
    return sorted(centres[centres >= 0].tolist())
