"""Benchmark graph I/O and coupling construction for each problem mapping.

Two text formats are supported: the de facto GSET layout (header "n m", then
1-based "u v w" lines, weight optional) and DIMACS .col ("c" comments,
"p edge n m", "e u v").  Indices are converted to 0-based at the parse
boundary; everything internal stays 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .model import CouplingMatrix, Graph

__all__ = [
    "ParseError",
    "MalformedLineError",
    "SelfLoopError",
    "DuplicateEdgeError",
    "EdgeIndexError",
    "HeaderMismatchError",
    "MissingHeaderError",
    "UnknownDirectiveError",
    "ProblemInstance",
    "parse_gset",
    "load_gset",
    "write_gset",
    "save_gset",
    "parse_dimacs_col",
    "load_dimacs_col",
    "write_dimacs_col",
    "build_maxcut_coupling",
    "build_coloring_coupling",
    "generate_colorable_graph",
    "load_instance",
]


class ParseError(ValueError):
    """Malformed benchmark file; carries the offending 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class MalformedLineError(ParseError):
    pass


class SelfLoopError(ParseError):
    pass


class DuplicateEdgeError(ParseError):
    pass


class EdgeIndexError(ParseError):
    pass


class HeaderMismatchError(ParseError):
    pass


class MissingHeaderError(ParseError):
    pass


class UnknownDirectiveError(ParseError):
    pass


@dataclass(frozen=True)
class ProblemInstance:
    """A graph plus the problem mapping it should be solved under."""

    graph: Graph
    kind: str  # "maxcut" | "coloring"
    n_states: int = 2
    source_name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("maxcut", "coloring"):
            raise ValueError(f"unknown problem kind: {self.kind!r}")
        if self.kind == "maxcut" and self.n_states != 2:
            raise ValueError("maxcut instances require n_states=2")
        if self.n_states < 2:
            raise ValueError("n_states must be >= 2")

    def coupling(self, storage: Optional[str] = None) -> CouplingMatrix:
        if self.kind == "maxcut":
            return build_maxcut_coupling(self.graph, storage=storage)
        return build_coloring_coupling(self.graph, self.n_states, storage=storage)


def _decode(text: Union[str, bytes]) -> str:
    if isinstance(text, bytes):
        return text.decode("ascii")
    return text


def parse_gset(text: Union[str, bytes]) -> Graph:
    """Parse GSET-format text: header "n m", then 1-based "u v [w]" lines."""
    lines = _decode(text).splitlines()
    it = [(no, ln.strip()) for no, ln in enumerate(lines, start=1) if ln.strip()]
    if not it:
        raise MissingHeaderError("empty input, expected 'node_count edge_count' header")
    header_no, header = it[0]
    parts = header.split()
    if len(parts) != 2:
        raise MalformedLineError(f"expected 'node_count edge_count', got {header!r}", header_no)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise MalformedLineError(f"non-integer header {header!r}", header_no) from None
    if n < 1 or m < 0:
        raise MalformedLineError(f"invalid header counts {header!r}", header_no)

    seen = set()
    edges = []
    for no, ln in it[1:]:
        parts = ln.split()
        if len(parts) not in (2, 3):
            raise MalformedLineError(f"expected 'u v [w]', got {ln!r}", no)
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise MalformedLineError(f"non-numeric token in {ln!r}", no) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise EdgeIndexError(f"node index out of range in {ln!r} (1..{n})", no)
        if u == v:
            raise SelfLoopError(f"self-loop on node {u}", no)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge {u} {v}", no)
        seen.add(key)
        edges.append((u - 1, v - 1, w))
    if len(edges) != m:
        raise HeaderMismatchError(f"header declares {m} edges but {len(edges)} were given")
    return Graph.from_edges(n, edges)


def write_gset(g: Graph) -> str:
    """Serialize to canonical GSET text (1-based, integer weights kept integral)."""
    out = [f"{g.node_count} {g.edge_count}"]
    for u, v, w in zip(g.u, g.v, g.w):
        ws = str(int(w)) if float(w).is_integer() else repr(float(w))
        out.append(f"{u + 1} {v + 1} {ws}")
    return "\n".join(out) + "\n"


def parse_dimacs_col(text: Union[str, bytes]) -> Graph:
    """Parse DIMACS .col text; duplicate e-lines for a pair collapse to one edge."""
    n = None
    m_declared = None
    seen = set()
    edges = []
    for no, raw in enumerate(_decode(text).splitlines(), start=1):
        ln = raw.strip()
        if not ln or ln.startswith("c"):
            continue
        parts = ln.split()
        if parts[0] == "p":
            if n is not None:
                raise MalformedLineError("multiple 'p' lines", no)
            if len(parts) != 4 or parts[1] != "edge":
                raise MalformedLineError(f"expected 'p edge n m', got {ln!r}", no)
            try:
                n, m_declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise MalformedLineError(f"non-integer counts in {ln!r}", no) from None
            if n < 1 or m_declared < 0:
                raise MalformedLineError(f"invalid counts in {ln!r}", no)
        elif parts[0] == "e":
            if n is None:
                raise MissingHeaderError("'e' line before the 'p edge' header", no)
            if len(parts) != 3:
                raise MalformedLineError(f"expected 'e u v', got {ln!r}", no)
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise MalformedLineError(f"non-integer endpoint in {ln!r}", no) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise EdgeIndexError(f"node index out of range in {ln!r} (1..{n})", no)
            if u == v:
                raise SelfLoopError(f"self-loop on node {u}", no)
            key = (min(u, v), max(u, v))
            if key not in seen:
                seen.add(key)
                edges.append((u - 1, v - 1, 1.0))
        else:
            raise UnknownDirectiveError(f"unknown directive {parts[0]!r}", no)
    if n is None:
        raise MissingHeaderError("missing 'p edge' header")
    return Graph.from_edges(n, edges)


def write_dimacs_col(g: Graph) -> str:
    out = [f"p edge {g.node_count} {g.edge_count}"]
    for u, v in zip(g.u, g.v):
        out.append(f"e {u + 1} {v + 1}")
    return "\n".join(out) + "\n"


def load_gset(path: Union[str, Path]) -> Graph:
    return parse_gset(Path(path).read_bytes())


def save_gset(g: Graph, path: Union[str, Path]) -> None:
    Path(path).write_text(write_gset(g))


def load_dimacs_col(path: Union[str, Path]) -> Graph:
    return parse_dimacs_col(Path(path).read_bytes())


def load_instance(
    path: Union[str, Path],
    kind: str,
    n_states: Optional[int] = None,
) -> ProblemInstance:
    """Load a file as a problem instance; .col/.dimacs parse as DIMACS, else GSET."""
    p = Path(path)
    if p.suffix.lower() in (".col", ".dimacs"):
        g = load_dimacs_col(p)
    else:
        g = load_gset(p)
    if n_states is None:
        n_states = 2 if kind == "maxcut" else 3
    return ProblemInstance(graph=g, kind=kind, n_states=n_states, source_name=p.name)


def build_maxcut_coupling(g: Graph, storage: Optional[str] = None) -> CouplingMatrix:
    """J_uv = +w_uv per edge: positive couplings drive endpoints anti-phase,
    so minimizing the continuous energy maximizes the cut."""
    return CouplingMatrix.from_edges(g.node_count, zip(g.u, g.v, g.w), storage=storage)


def build_coloring_coupling(g: Graph, n_states: int, storage: Optional[str] = None) -> CouplingMatrix:
    """Unit repulsive coupling per edge; adjacent oscillators prefer distinct
    phase states.  Discrete scoring goes through coloring_conflicts."""
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    ones = np.ones(g.edge_count)
    return CouplingMatrix.from_edges(g.node_count, zip(g.u, g.v, ones), storage=storage)


def generate_colorable_graph(n: int, m: int, n_colors: int, seed: int) -> Graph:
    """Random graph that is n_colors-colorable by construction.

    Nodes are partitioned into near-equal groups (node i belongs to group
    i mod n_colors, which is therefore always a zero-conflict coloring) and
    m distinct unit-weight edges are drawn uniformly from cross-group pairs.
    """
    if n_colors < 2:
        raise ValueError("n_colors must be >= 2")
    if n < n_colors:
        raise ValueError("need at least one node per color group")
    group = np.arange(n, dtype=np.int64) % n_colors
    iu, iv = np.triu_indices(n, 1)
    cross = group[iu] != group[iv]
    iu, iv = iu[cross], iv[cross]
    if m > len(iu):
        raise ValueError(f"m={m} exceeds the {len(iu)} available cross-group pairs")
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(iu), size=m, replace=False)
    pick.sort()
    w = np.ones(m)
    return Graph(n, iu[pick].astype(np.int64), iv[pick].astype(np.int64), w)
