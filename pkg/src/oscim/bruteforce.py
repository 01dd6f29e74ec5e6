"""Exact brute-force solvers for small instances.

These enumerate every assignment (with the first node's state fixed to break
the global symmetry) and exist purely as ground truth for tests and small
verification runs.  Witnesses are deterministic: the lexicographically
smallest state vector among the optima.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .model import Graph, StateAssignment

MAXCUT_NODE_CAP = 24
CONFLICT_SEARCH_CAP = 2**24

_CHUNK = 1 << 18


def exact_maxcut(g: Graph) -> Tuple[float, StateAssignment]:
    """Maximum cut by exhaustive enumeration of all 2^(n-1) bipartitions.

    Node 0 is pinned to side 0; the complement of any cut has equal value, so
    nothing is lost.  Limited to node_count <= 24.
    """
    n = g.node_count
    if n > MAXCUT_NODE_CAP:
        raise ValueError(f"exact_maxcut is capped at {MAXCUT_NODE_CAP} nodes (got {n})")
    if n == 1:
        return 0.0, StateAssignment(2, np.zeros(1, dtype=np.int64))
    # Bit (n-1-j) of the mask holds node j's side, so numeric mask order is
    # lexicographic state order and the first argmax is the smallest witness.
    shift_u = (n - 1 - g.u).astype(np.uint64)
    shift_v = (n - 1 - g.v).astype(np.uint64)
    total = 1 << (n - 1)
    best_val = -np.inf
    best_mask = 0
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        cuts = np.zeros(len(masks))
        for su, sv, w in zip(shift_u, shift_v, g.w):
            cuts += w * (((masks >> su) ^ (masks >> sv)) & np.uint64(1)).astype(np.float64)
        k = int(np.argmax(cuts))
        if cuts[k] > best_val:
            best_val = float(cuts[k])
            best_mask = start + k
    states = (best_mask >> (n - 1 - np.arange(n, dtype=np.uint64))) & 1
    states[0] = 0
    return best_val, StateAssignment(2, states.astype(np.int64))


def exact_min_conflicts(g: Graph, n_states: int) -> Tuple[int, StateAssignment]:
    """Minimum number of monochromatic edges over all n_states^n colorings.

    Node 0 is pinned to color 0 (color relabeling symmetry).  Limited to
    n_states^node_count <= 2^24.
    """
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    n = g.node_count
    if n_states**n > CONFLICT_SEARCH_CAP:
        raise ValueError(
            f"exact_min_conflicts is capped at n_states^n <= 2^24 "
            f"(got {n_states}^{n})"
        )
    if n == 1 or g.edge_count == 0:
        return 0, StateAssignment(n_states, np.zeros(n, dtype=np.int64))
    # Digit place for node j: node 1 is the most significant digit, so index
    # order is lexicographic state order and the first argmin wins.
    place = n_states ** (n - 1 - np.arange(n, dtype=np.int64))
    total = n_states ** (n - 1)
    best_val = g.edge_count + 1
    best_idx = 0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        conflicts = np.zeros(len(idx), dtype=np.int64)
        for u, v in zip(g.u, g.v):
            cu = 0 if u == 0 else (idx // place[u]) % n_states
            cv = 0 if v == 0 else (idx // place[v]) % n_states
            conflicts += cu == cv
        k = int(np.argmin(conflicts))
        if conflicts[k] < best_val:
            best_val = int(conflicts[k])
            best_idx = start + k
            if best_val == 0:
                break
    states = (best_idx // place) % n_states
    states[0] = 0
    return best_val, StateAssignment(n_states, states.astype(np.int64))
