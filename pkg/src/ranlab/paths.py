"""Longest paths in random Apollonian networks.

Path length is always a vertex count.  The exact search is exponential and
capped to small networks; the heuristic is a linear-time lower bound built by
descending the Delta-tree.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .apollonian import DeltaTree, RanGraph
from .subtree_dp import is_buono, largest_buono_subtree

DEFAULT_EXACT_CAP = 12


class InstanceTooLarge(ValueError):
    """Exact search refused: the network exceeds the configured cap."""


class SearchTimeout(RuntimeError):
    pass


class InvalidPath(ValueError):
    pass


@dataclass(frozen=True)
class PathResult:
    length: int
    path: list
    method: str


def validate_path(ran: RanGraph, path) -> list[int]:
    path = [int(v) for v in path]
    if not path:
        raise InvalidPath("empty path")
    if len(set(path)) != len(path):
        raise InvalidPath("path repeats a vertex")
    if min(path) < 0 or max(path) >= ran.n_vertices:
        raise InvalidPath("vertex index out of range")
    adj = ran.adjacency()
    for u, v in zip(path, path[1:]):
        if v not in adj[u]:
            raise InvalidPath(f"{u} and {v} are not adjacent")
    return path


# ---------------------------------------------------------------------------
# exact search


def _masks(ran: RanGraph) -> list[int]:
    return [sum(1 << v for v in nbrs) for nbrs in ran.adjacency()]


def _reach_count(masks: list[int], start: int, free: int) -> int:
    """Vertices of ``free`` reachable from ``start`` through ``free``."""
    seen = 0
    frontier = masks[start] & free
    while frontier:
        seen |= frontier
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= masks[low.bit_length() - 1]
            f ^= low
        frontier = nxt & free & ~seen
    return seen.bit_count()


def longest_path_exact(ran: RanGraph, delta: Optional[DeltaTree] = None,
                       cap: int = DEFAULT_EXACT_CAP,
                       time_budget: Optional[float] = None) -> PathResult:
    """Branch-and-bound DFS for a longest simple path.

    Start vertices and neighbours are explored in increasing order and only a
    strictly longer path replaces the incumbent, so the reported path is the
    lexicographically smallest among the longest ones.
    """
    if ran.t > cap:
        raise InstanceTooLarge(f"t={ran.t} exceeds exact-search cap {cap}")
    n = ran.n_vertices
    ceiling = n
    if delta is not None:
        ceiling = min(ceiling, buono_upper_bound(delta))
    masks = _masks(ran)
    adj = ran.adjacency()
    full = (1 << n) - 1
    deadline = None if time_budget is None else time.monotonic() + time_budget
    best: list = []

    def dfs(path: list, visited: int) -> bool:
        nonlocal best
        if len(path) > len(best):
            best = list(path)
            if len(best) >= ceiling:
                return True
        if deadline is not None and time.monotonic() > deadline:
            raise SearchTimeout("exact longest-path search exceeded its time budget")
        cur = path[-1]
        free = full & ~visited
        if len(path) + _reach_count(masks, cur, free) <= len(best):
            return False
        for nb in adj[cur]:
            if not visited >> nb & 1:
                path.append(nb)
                if dfs(path, visited | (1 << nb)):
                    return True
                path.pop()
        return False

    for s in range(n):
        if dfs([s], 1 << s):
            break
    return PathResult(len(best), best, "exact")


# ---------------------------------------------------------------------------
# heuristic: best two-leg routing through child triangles
#
# H[node, e] is the longest path found between the two corners of the node's
# triangle other than corner e, using only those corners and vertices strictly
# inside the triangle.  Children of (a, b, c) with centre v are
# (a, b, v), (b, c, v), (a, c, v) in that order, the centre always last.

_CHILD_TRI = ((0, 1, 3), (1, 2, 3), (0, 2, 3))  # parent corner slots, 3 = centre


def _leg(x: int, y: int, avoid: int):
    """(child position, excluded slot in child) for a leg from x to y avoiding ``avoid``."""
    for pos, tri in enumerate(_CHILD_TRI):
        if x in tri and y in tri and avoid in tri:
            return pos, tri.index(avoid)
    raise AssertionError("no child triangle holds these corners")


def _routes():
    table = []
    for e in range(3):
        x, y = [i for i in range(3) if i != e]
        z, v = e, 3
        options = [
            [(x, y, _leg(x, y, v))],
            [(x, v, _leg(x, v, z)), (v, y, _leg(v, y, z))],
            [(x, v, _leg(x, v, z)), (v, y, _leg(v, y, x))],
            [(x, v, _leg(x, v, y)), (v, y, _leg(v, y, z))],
        ]
        table.append(options)
    return table


_ROUTES = _routes()


def heuristic_table(delta: DeltaTree):
    n = delta.n_nodes
    H = np.full((n, 3), 2, dtype=np.int64)
    pick = np.zeros((n, 3), dtype=np.int8)
    for level in reversed(delta.levels):
        internal = level[delta.children[level, 0] >= 0]
        if internal.size == 0:
            continue
        kids = delta.children[internal]
        for e, options in enumerate(_ROUTES):
            vals = []
            for legs in options:
                # the shared centre vertex is counted once
                total = sum(H[kids[:, pos], ex] for _, _, (pos, ex) in legs) - (len(legs) - 1)
                vals.append(total)
            vals = np.stack(vals, axis=1)
            best = vals.argmax(axis=1)
            H[internal, e] = vals[np.arange(internal.size), best]
            pick[internal, e] = best
    return H, pick


def _unfold(delta: DeltaTree, pick: np.ndarray, node: int, e: int, forward: bool) -> list[int]:
    """Vertex sequence of H[node, e], from the lower to the higher corner slot."""
    tri = delta.node_tri[node].tolist()
    x, y = [i for i in range(3) if i != e]
    if delta.children[node, 0] < 0:
        seq = [tri[x], tri[y]]
        return seq if forward else seq[::-1]
    corners = tri + [int(delta.node_center[node])]
    legs = _ROUTES[e][int(pick[node, e])]
    out: list[int] = []
    for a, b, (pos, ex) in legs:
        child = int(delta.children[node, pos])
        ctri = delta.node_tri[child].tolist()
        ca, cb = ctri.index(corners[a]), ctri.index(corners[b])
        part = _unfold(delta, pick, child, ex, ca < cb)
        out.extend(part if not out else part[1:])
    return out if forward else out[::-1]


def longest_path_heuristic(ran: RanGraph, delta: DeltaTree) -> PathResult:
    """Valid simple path: corner-to-corner route through the Delta-tree plus the third corner."""
    H, pick = heuristic_table(delta)
    e = int(H[0].argmax())
    path = _unfold(delta, pick, 0, e, True) + [int(delta.node_tri[0, e])]
    return PathResult(len(path), path, "heuristic")


# ---------------------------------------------------------------------------
# path -> triangle trace and the buono bound


def trace_triangles(ran: RanGraph, delta: DeltaTree, path) -> list[int]:
    """R(P): Delta-tree nodes whose triangle strictly contains a vertex of the path."""
    if isinstance(path, PathResult):
        path = path.path
    path = validate_path(ran, path)
    out: set = set()
    for u in path:
        node = int(ran.vertex_node[u])
        while node >= 0 and node not in out:
            out.add(node)
            node = int(delta.parent[node])
    return sorted(out)


def trace_is_buono(ran: RanGraph, delta: DeltaTree, path) -> bool:
    return is_buono(delta, trace_triangles(ran, delta, path))


def buono_upper_bound(delta: DeltaTree) -> int:
    """3 + largest buono subtree: every path has at most this many vertices."""
    return 3 + largest_buono_subtree(delta, witness=False).size


def lower_bound_line(t: int) -> float:
    """Deterministic lower bound (2t+1)**(log 2 / log 3) on the longest path."""
    return (2 * t + 1) ** (np.log(2) / np.log(3))
