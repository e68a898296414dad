"""Compiled inner loops for growing the random structures.

Both kernels consume pre-drawn slot indices (``picks[s]`` is uniform on the
live leaf/face registry at step ``s``), so the random stream is consumed in
one vectorized draw and the loops are deterministic.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def grow_dary_kernel(d, t, picks):
    n = 1 + d * t
    parent = np.full(n, -1, np.int64)
    children = np.full((n, d), -1, np.int64)
    birth = np.zeros(n, np.int64)
    depth = np.zeros(n, np.int64)
    leaves = np.empty((d - 1) * t + 1, np.int64)
    leaves[0] = 0
    n_leaves = 1
    for s in range(t):
        k = picks[s]
        v = leaves[k]
        base = 1 + d * s
        for i in range(d):
            c = base + i
            parent[c] = v
            children[v, i] = c
            birth[c] = s + 1
            depth[c] = depth[v] + 1
        # the first child takes over the expanded leaf's slot
        leaves[k] = base
        for i in range(1, d):
            leaves[n_leaves] = base + i
            n_leaves += 1
    return parent, children, birth, depth, leaves


@njit(cache=True)
def grow_ran_kernel(t, picks):
    n_nodes = 1 + 3 * t
    parent = np.full(n_nodes, -1, np.int64)
    children = np.full((n_nodes, 3), -1, np.int64)
    birth = np.zeros(n_nodes, np.int64)
    depth = np.zeros(n_nodes, np.int64)
    node_tri = np.empty((n_nodes, 3), np.int64)
    node_center = np.full(n_nodes, -1, np.int64)
    vertex_node = np.full(t + 3, -1, np.int64)
    faces = np.empty((2 * t + 1, 3), np.int64)
    face_node = np.empty(2 * t + 1, np.int64)
    edges = np.empty((3 * t + 3, 2), np.int64)

    edges[0, 0], edges[0, 1] = 0, 1
    edges[1, 0], edges[1, 1] = 1, 2
    edges[2, 0], edges[2, 1] = 0, 2
    faces[0, 0], faces[0, 1], faces[0, 2] = 0, 1, 2
    node_tri[0, 0], node_tri[0, 1], node_tri[0, 2] = 0, 1, 2
    face_node[0] = 0
    n_faces = 1
    for s in range(t):
        k = picks[s]
        a = faces[k, 0]
        b = faces[k, 1]
        c = faces[k, 2]
        v = 3 + s
        node = face_node[k]
        node_center[node] = v
        vertex_node[v] = node
        e = 3 + 3 * s
        edges[e, 0], edges[e, 1] = a, v
        edges[e + 1, 0], edges[e + 1, 1] = b, v
        edges[e + 2, 0], edges[e + 2, 1] = c, v
        base = 1 + 3 * s
        # child triangles (a,b,v), (b,c,v), (a,c,v); the centre is always last
        node_tri[base, 0], node_tri[base, 1], node_tri[base, 2] = a, b, v
        node_tri[base + 1, 0], node_tri[base + 1, 1], node_tri[base + 1, 2] = b, c, v
        node_tri[base + 2, 0], node_tri[base + 2, 1], node_tri[base + 2, 2] = a, c, v
        for i in range(3):
            ch = base + i
            parent[ch] = node
            children[node, i] = ch
            birth[ch] = s + 1
            depth[ch] = depth[node] + 1
        faces[k, 0], faces[k, 1], faces[k, 2] = a, b, v
        face_node[k] = base
        faces[n_faces, 0], faces[n_faces, 1], faces[n_faces, 2] = b, c, v
        face_node[n_faces] = base + 1
        faces[n_faces + 1, 0], faces[n_faces + 1, 1], faces[n_faces + 1, 2] = a, c, v
        face_node[n_faces + 1] = base + 2
        n_faces += 2
    return (parent, children, birth, depth, node_tri, node_center,
            vertex_node, faces, face_node, edges)


@njit(cache=True)
def aleph_kernel(children):
    n, d = children.shape
    aleph = np.ones(n, np.int64)
    # children always carry larger indices than their parent
    for v in range(n - 1, -1, -1):
        for i in range(d):
            c = children[v, i]
            if c >= 0:
                aleph[v] += aleph[c]
    return aleph


@njit(cache=True)
def buono_kernel(children, combos, kept, neg):
    n = children.shape[0]
    F = np.full((n, 4), neg, np.int64)
    F[:, 0] = 1
    choice = np.full((n, 4), -1, np.int16)
    n_combos = combos.shape[0]
    for v in range(n - 1, -1, -1):
        if children[v, 0] < 0:
            continue
        for j in range(n_combos):
            val = 1
            for pos in range(3):
                opt = combos[j, pos]
                if opt < 4:
                    val += F[children[v, pos], opt]
            k = kept[j]
            # strict comparison keeps the first maximising combo
            if k > 0 and val > F[v, k]:
                F[v, k] = val
                choice[v, k] = j
    for v in range(n):
        for k in range(4):
            if F[v, k] < neg:
                F[v, k] = neg
    return F, choice
