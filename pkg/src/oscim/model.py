"""Domain types and energy functions for phase-encoded combinatorial problems.

Oscillator phases live on the unit circle, normalized to [0, 1).  An N-state
assignment maps state k to the phase k/N; for binary problems state 0 is the
Ising spin +1 (phase 0) and state 1 is spin -1 (phase 0.5).  All pairwise
energies sum each unordered pair i < j exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

# Coupling matrices denser than this fraction of n^2 default to dense storage.
DENSE_STORAGE_THRESHOLD = 0.25

__all__ = [
    "Graph",
    "CouplingMatrix",
    "PhaseState",
    "StateAssignment",
    "SolverParams",
    "ising_energy",
    "potts_energy",
    "continuous_energy",
    "threshold_phases",
    "cut_value",
    "coloring_conflicts",
    "wrap_unit",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def wrap_unit(x):
    """Map phases onto [0, 1) as x - floor(x)."""
    return x - np.floor(x)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph with 0-based node indices.

    Edges are stored canonically: u < v, sorted lexicographically, at most
    one edge per unordered pair, no self-loops.
    """

    node_count: int
    u: IntArray
    v: IntArray
    w: FloatArray

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        u = np.asarray(self.u, dtype=np.int64)
        v = np.asarray(self.v, dtype=np.int64)
        w = np.asarray(self.w, dtype=np.float64)
        if not (u.shape == v.shape == w.shape) or u.ndim != 1:
            raise ValueError("edge arrays must be 1-D and equal length")
        if len(u):
            if u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= self.node_count:
                raise ValueError("edge endpoint out of range")
            if np.any(u == v):
                raise ValueError("self-loops are not allowed")
            lo, hi = np.minimum(u, v), np.maximum(u, v)
            order = np.lexsort((hi, lo))
            lo, hi, w = lo[order], hi[order], w[order]
            if np.any((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])):
                raise ValueError("duplicate edge on an unordered pair")
            u, v = lo, hi
        if not np.all(np.isfinite(w)):
            raise ValueError("edge weights must be finite")
        object.__setattr__(self, "u", _readonly(u))
        object.__setattr__(self, "v", _readonly(v))
        object.__setattr__(self, "w", _readonly(w))

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Tuple[int, int, float]]) -> "Graph":
        rows = list(edges)
        if rows:
            u, v, w = (np.array(col) for col in zip(*rows))
        else:
            u = v = np.empty(0, dtype=np.int64)
            w = np.empty(0, dtype=np.float64)
        return cls(node_count, u, v, w)

    @property
    def edge_count(self) -> int:
        return len(self.u)

    @property
    def edges(self) -> list:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]

    @property
    def total_weight(self) -> float:
        return float(self.w.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.w, other.w)
        )

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


class CouplingMatrix:
    """Symmetric coupling structure J over n oscillators with zero diagonal.

    Both storage kinds keep the same canonical CSR arrays (row-major, column
    sorted); "dense" additionally materializes the full matrix.  Solver
    kernels always read the CSR view, so runs over sparse and dense storage
    of the same couplings are bit-identical.
    """

    __slots__ = ("n", "storage_kind", "indptr", "indices", "data", "_dense")

    def __init__(
        self,
        n: int,
        indptr: IntArray,
        indices: IntArray,
        data: FloatArray,
        storage_kind: str,
        dense: Optional[FloatArray] = None,
    ):
        self.n = int(n)
        self.indptr = _readonly(indptr.astype(np.int64))
        self.indices = _readonly(indices.astype(np.int64))
        self.data = _readonly(data.astype(np.float64))
        self.storage_kind = storage_kind
        self._dense = dense

    @classmethod
    def from_edges(
        cls,
        n: int,
        entries: Iterable[Tuple[int, int, float]],
        storage: Optional[str] = None,
    ) -> "CouplingMatrix":
        """Build from (i, j, value) entries, one per unordered pair."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rows = [(i, j, float(x)) for i, j, x in entries]
        if rows:
            i, j, x = (np.array(col) for col in zip(*rows))
            i = i.astype(np.int64)
            j = j.astype(np.int64)
        else:
            i = j = np.empty(0, dtype=np.int64)
            x = np.empty(0, dtype=np.float64)
        if len(i):
            if i.min() < 0 or j.min() < 0 or max(i.max(), j.max()) >= n:
                raise ValueError("coupling index out of range")
            if np.any(i == j):
                raise ValueError("diagonal entries must be zero (no self-coupling)")
            lo, hi = np.minimum(i, j), np.maximum(i, j)
            key = lo * n + hi
            if len(np.unique(key)) != len(key):
                raise ValueError("duplicate coupling entry on an unordered pair")
        keep = x != 0.0
        i, j, x = i[keep], j[keep], x[keep]
        # symmetrize: store both (i,j) and (j,i)
        r = np.concatenate([i, j])
        c = np.concatenate([j, i])
        vals = np.concatenate([x, x])
        order = np.lexsort((c, r))
        r, c, vals = r[order], c[order], vals[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, r + 1, 1)
        indptr = np.cumsum(indptr)
        kind = storage
        if kind is None:
            density = len(vals) / float(n * n)
            kind = "dense" if density > DENSE_STORAGE_THRESHOLD else "sparse"
        if kind not in ("dense", "sparse"):
            raise ValueError(f"unknown storage kind: {kind!r}")
        dense = None
        if kind == "dense":
            dense = np.zeros((n, n))
            dense[r, c] = vals
            dense = _readonly(dense)
        return cls(n, indptr, c, vals, kind, dense)

    @classmethod
    def from_dense(cls, matrix, storage: Optional[str] = None) -> "CouplingMatrix":
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.array_equal(m, m.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diagonal(m) != 0.0):
            raise ValueError("coupling diagonal must be zero")
        iu, ju = np.nonzero(np.triu(m, 1))
        return cls.from_edges(m.shape[0], zip(iu, ju, m[iu, ju]), storage=storage)

    @property
    def nnz(self) -> int:
        """Stored nonzeros (each pair counted in both directions)."""
        return len(self.data)

    def value(self, i: int, j: int) -> float:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError("coupling index out of range")
        if self.storage_kind == "dense":
            return float(self._dense[i, j])
        lo, hi = self.indptr[i], self.indptr[i + 1]
        pos = np.searchsorted(self.indices[lo:hi], j)
        if pos < hi - lo and self.indices[lo + pos] == j:
            return float(self.data[lo + pos])
        return 0.0

    def to_dense(self) -> FloatArray:
        if self._dense is not None:
            return self._dense
        m = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        m[rows, self.indices] = self.data
        return m

    def pairs(self) -> Tuple[IntArray, IntArray, FloatArray]:
        """Canonical unordered pairs (i < j) and their coupling values."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        upper = rows < self.indices
        return rows[upper], self.indices[upper], self.data[upper]

    def max_abs_row_sum(self) -> float:
        """max_i sum_j |J_ij|, the coupling-drift rate bound used for step-size limits."""
        if self.nnz == 0:
            return 0.0
        sums = np.add.reduceat(np.abs(self.data), self.indptr[:-1])
        sums[np.diff(self.indptr) == 0] = 0.0
        return float(sums.max())

    def with_storage(self, storage: str) -> "CouplingMatrix":
        """Same couplings under the other storage kind."""
        i, j, x = self.pairs()
        return CouplingMatrix.from_edges(self.n, zip(i, j, x), storage=storage)

    def __repr__(self) -> str:
        return f"CouplingMatrix(n={self.n}, pairs={self.nnz // 2}, {self.storage_kind})"


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Vector of oscillator phases, each in [0, 1)."""

    phases: FloatArray

    def __post_init__(self) -> None:
        p = np.asarray(self.phases, dtype=np.float64)
        if p.ndim != 1:
            raise ValueError("phases must be a 1-D vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("phases must be finite")
        if len(p) and (p.min() < 0.0 or p.max() >= 1.0):
            raise ValueError("phases must lie in [0, 1)")
        object.__setattr__(self, "phases", _readonly(p))

    @property
    def n(self) -> int:
        return len(self.phases)


@dataclass(frozen=True, eq=False)
class StateAssignment:
    """Discrete state per oscillator: integers in {0, ..., n_states-1}."""

    n_states: int
    states: IntArray

    def __post_init__(self) -> None:
        if self.n_states < 2:
            raise ValueError("n_states must be >= 2")
        s = np.asarray(self.states, dtype=np.int64)
        if s.ndim != 1:
            raise ValueError("states must be a 1-D vector")
        if len(s) and (s.min() < 0 or s.max() >= self.n_states):
            raise ValueError("state out of range")
        object.__setattr__(self, "states", _readonly(s))

    @property
    def n(self) -> int:
        return len(self.states)

    def spins(self) -> IntArray:
        """Ising spins for binary assignments: state 0 -> +1, state 1 -> -1."""
        if self.n_states != 2:
            raise ValueError("spins are defined only for n_states=2")
        return 1 - 2 * self.states

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateAssignment):
            return NotImplemented
        return self.n_states == other.n_states and np.array_equal(self.states, other.states)


@dataclass(frozen=True)
class SolverParams:
    """Simulation knobs for the coupled-oscillator solver.

    K        global coupling strength (> 0)
    ks_max   peak of the triangular phase-locking schedule (>= 0)
    ks_period  simulated time per triangle cycle
    kn       Gaussian noise strength; per-step kick is kn * N(0,1) * sqrt(h)
    h        Forward-Euler time step
    t_stop   total simulated time
    n_states number of stable phase states N (2 = Ising, >= 3 = Potts)
    """

    K: float = 1.0
    ks_max: float = 2.0
    ks_period: float = 10.0
    kn: float = 0.5
    h: float = 0.01
    t_stop: float = 100.0
    n_states: int = 2
    seed: int = 0
    batch_size: int = 256

    def __post_init__(self) -> None:
        if not (self.K > 0 and np.isfinite(self.K)):
            raise ValueError("K must be finite and > 0")
        for name in ("ks_max", "kn"):
            val = getattr(self, name)
            if not (val >= 0 and np.isfinite(val)):
                raise ValueError(f"{name} must be finite and >= 0")
        for name in ("ks_period", "h", "t_stop"):
            val = getattr(self, name)
            if not (val > 0 and np.isfinite(val)):
                raise ValueError(f"{name} must be finite and > 0")
        if self.h >= self.t_stop:
            raise ValueError("h must be smaller than t_stop")
        if self.h >= self.ks_period:
            raise ValueError("h must be smaller than ks_period")
        if self.n_states < 2:
            raise ValueError("n_states must be >= 2")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    @classmethod
    def tuned_for(cls, n: int, n_states: int = 2, **overrides) -> "SolverParams":
        """Size- and family-scaled defaults.

        t_stop grows as n^0.25 with ten anneal cycles per run.  Binary
        problems keep the strong-coupling defaults; multi-state problems use
        the weak-coupling regime (the locking lattice dominates early and
        the run behaves like annealed discrete search), which measures far
        better on planted coloring instances.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        t_stop = overrides.pop("t_stop", 100.0 * n**0.25)
        ks_period = overrides.pop("ks_period", t_stop / 10.0)
        if n_states >= 3:
            overrides.setdefault("K", 0.2)
            overrides.setdefault("ks_max", 0.5)
            overrides.setdefault("kn", 0.1)
        return cls(t_stop=t_stop, ks_period=ks_period, n_states=n_states, **overrides)


def _check_dims(n_left: int, n_right: int, what: str) -> None:
    if n_left != n_right:
        raise ValueError(f"dimension mismatch: {what} ({n_left} vs {n_right})")


def ising_energy(J: CouplingMatrix, s: StateAssignment) -> float:
    """-sum_{i<j} J_ij * sigma_i * sigma_j for binary assignments."""
    if s.n_states != 2:
        raise ValueError("ising_energy requires a binary assignment (n_states=2)")
    _check_dims(J.n, s.n, "coupling vs assignment")
    i, j, w = J.pairs()
    sigma = s.spins()
    return float(-(w * (sigma[i] * sigma[j])).sum())


def potts_energy(J: CouplingMatrix, s: StateAssignment) -> float:
    """-sum_{i<j} J_ij * delta(s_i, s_j)."""
    _check_dims(J.n, s.n, "coupling vs assignment")
    i, j, w = J.pairs()
    return float(-(w * (s.states[i] == s.states[j])).sum())


def continuous_energy(J: CouplingMatrix, phi: PhaseState) -> float:
    """sum_{i<j} J_ij * cos(2*pi*(phi_i - phi_j)); minimized by the dynamics."""
    _check_dims(J.n, phi.n, "coupling vs phases")
    i, j, w = J.pairs()
    p = phi.phases
    return float((w * np.cos(2.0 * np.pi * (p[i] - p[j]))).sum())


def _threshold(phases: FloatArray, n_states: int) -> IntArray:
    """Nearest k/n_states per phase under circular distance; ties to smaller k."""
    targets = np.arange(n_states) / n_states
    d = np.abs(phases[..., None] - targets)
    d = np.minimum(d, 1.0 - d)
    return np.argmin(d, axis=-1).astype(np.int64)


def threshold_phases(phi: PhaseState, n_states: int) -> StateAssignment:
    """Snap each phase to its nearest stable state k/n_states."""
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    return StateAssignment(n_states, _threshold(phi.phases, n_states))


def cut_value(g: Graph, s: StateAssignment) -> float:
    """Total weight of edges crossing the bipartition: sum w * (1 - sigma_u*sigma_v)/2."""
    if s.n_states != 2:
        raise ValueError("cut_value requires a binary assignment (n_states=2)")
    _check_dims(g.node_count, s.n, "graph vs assignment")
    crossing = s.states[g.u] != s.states[g.v]
    return float((g.w * crossing).sum())


def coloring_conflicts(g: Graph, s: StateAssignment) -> Tuple[int, float]:
    """(monochromatic edge count, satisfied fraction); edgeless graphs are fully satisfied."""
    _check_dims(g.node_count, s.n, "graph vs assignment")
    if g.edge_count == 0:
        return 0, 1.0
    conflicts = int((s.states[g.u] == s.states[g.v]).sum())
    return conflicts, 1.0 - conflicts / g.edge_count
