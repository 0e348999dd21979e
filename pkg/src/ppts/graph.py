"""Vertex-partitioned graphs, one-hot colorings and the plaintext conflict oracle.

Vertices are dense 0-based integers internally.  The text format read and
written by :func:`read_graph` / :func:`write_graph` uses 1-based vertex labels
(parties stay 0-based)::

    c <free text>                 comment, ignored
    p dgc <n> <m> <n_edges>       header, exactly once, before any o/e line
    o <vertex> <party>            owner of a vertex, one line per vertex
    e <u> <v>                     undirected edge, u != v

Blank lines are ignored.  Edges are written sorted, ``u < v``.
"""
from __future__ import annotations

import io
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ParameterError

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class PartitionedGraph:
    n_vertices: int
    m_parties: int
    owner: tuple[int, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n_vertices < 0 or self.m_parties < 1:
            raise ParameterError("need n_vertices >= 0 and m_parties >= 1")
        owner = tuple(int(p) for p in self.owner)
        if len(owner) != self.n_vertices:
            raise ParameterError(
                f"owner map has {len(owner)} entries for {self.n_vertices} vertices")
        for v, p in enumerate(owner):
            if not 0 <= p < self.m_parties:
                raise ParameterError(f"vertex {v} owned by out-of-range party {p}")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ParameterError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ParameterError(f"edge ({u}, {v}) out of range")
            e = _norm_edge(u, v)
            if e in seen:
                raise ParameterError(f"duplicate edge {e}")
            seen.add(e)
        object.__setattr__(self, "owner", owner)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def is_internal(self, edge: Edge) -> bool:
        u, v = edge
        return self.owner[u] == self.owner[v]

    @cached_property
    def internal_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if self.is_internal(e))

    @cached_property
    def external_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if not self.is_internal(e))

    @cached_property
    def border_vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.external_edges for v in e)

    def is_border(self, v: int) -> bool:
        return v in self.border_vertices

    def vertices_of(self, party: int) -> tuple[int, ...]:
        return self._party_vertices[party]

    @cached_property
    def _party_vertices(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.m_parties)]
        for v, p in enumerate(self.owner):
            out[p].append(v)
        return tuple(tuple(vs) for vs in out)

    def internal_edges_of(self, party: int) -> tuple[Edge, ...]:
        return tuple(e for e in self.internal_edges if self.owner[e[0]] == party)

    def external_edges_of(self, party: int) -> tuple[Edge, ...]:
        return tuple(e for e in self.external_edges
                     if party in (self.owner[e[0]], self.owner[e[1]]))

    def to_text(self) -> str:
        buf = io.StringIO()
        write_graph(self, buf)
        return buf.getvalue()


@dataclass(frozen=True, order=True)
class ColorVector:
    """A member of the one-hot domain: ``k`` bits, exactly one of them set."""

    k: int
    hot_index: int

    def __post_init__(self):
        if self.k < 1 or not 0 <= self.hot_index < self.k:
            raise ParameterError(f"hot index {self.hot_index} outside [0, {self.k})")

    def bits(self) -> tuple[int, ...]:
        return tuple(1 if c == self.hot_index else 0 for c in range(self.k))


def hot(index: int, k: int) -> ColorVector:
    return ColorVector(k, index)


@dataclass(frozen=True)
class Coloring:
    """A total assignment of colors ``0..k-1`` to vertices ``0..n-1``."""

    k: int
    colors: tuple[int, ...]

    def __post_init__(self):
        colors = tuple(int(c) for c in self.colors)
        for v, c in enumerate(colors):
            if not 0 <= c < self.k:
                raise ParameterError(f"vertex {v} has color {c} outside [0, {self.k})")
        object.__setattr__(self, "colors", colors)

    @classmethod
    def from_mapping(cls, k: int, assignment: Mapping[int, ColorVector | int],
                     n_vertices: int | None = None) -> "Coloring":
        n = n_vertices if n_vertices is not None else len(assignment)
        missing = [v for v in range(n) if v not in assignment]
        if missing:
            raise ParameterError(f"coloring is partial; missing vertices {missing[:5]}")
        colors = []
        for v in range(n):
            c = assignment[v]
            if isinstance(c, ColorVector):
                if c.k != k:
                    raise ParameterError(f"vertex {v} colored with k={c.k}, expected {k}")
                c = c.hot_index
            colors.append(c)
        return cls(k, tuple(colors))

    @classmethod
    def random(cls, n_vertices: int, k: int, rng: random.Random) -> "Coloring":
        return cls(k, tuple(rng.randrange(k) for _ in range(n_vertices)))

    def __len__(self):
        return len(self.colors)

    def __getitem__(self, v: int) -> ColorVector:
        return ColorVector(self.k, self.colors[v])

    def recolored(self, changes: Mapping[int, int]) -> "Coloring":
        colors = list(self.colors)
        for v, c in changes.items():
            colors[v] = c
        return Coloring(self.k, tuple(colors))


@dataclass(frozen=True)
class ConflictReport:
    total: int
    per_edge: dict[Edge, int] = field(default_factory=dict)


def conflict(xi: ColorVector, xj: ColorVector) -> int:
    """Scalar product of two one-hot vectors: 1 when they share a color."""
    if xi.k != xj.k:
        raise ParameterError(f"color vectors of different length ({xi.k} vs {xj.k})")
    return 1 if xi.hot_index == xj.hot_index else 0


def _check_coloring(g: PartitionedGraph, x: Coloring):
    if len(x) != g.n_vertices:
        raise ParameterError(
            f"coloring covers {len(x)} vertices, graph has {g.n_vertices}")


def total_conflicts(g: PartitionedGraph, x: Coloring) -> ConflictReport:
    _check_coloring(g, x)
    per_edge = {e: conflict(x[e[0]], x[e[1]]) for e in g.edges}
    return ConflictReport(sum(per_edge.values()), per_edge)


def count_conflicts(edges: Iterable[Edge], colors: Sequence[int]) -> int:
    """Fast conflict count on a bare color sequence."""
    return sum(1 for u, v in edges if colors[u] == colors[v])


def is_proper_k_coloring(g: PartitionedGraph, x: Coloring, k: int) -> bool:
    _check_coloring(g, x)
    if x.k != k:
        return False
    return total_conflicts(g, x).total == 0


def block_owners(n: int, m: int) -> tuple[int, ...]:
    """Contiguous blocks: the first ``n % m`` parties get one extra vertex."""
    base, extra = divmod(n, m)
    owner = []
    for p in range(m):
        owner.extend([p] * (base + (1 if p < extra else 0)))
    return tuple(owner)


def generate_partitioned_graph(n: int, density: float, m: int, seed: int) -> PartitionedGraph:
    """Erdos-Renyi G(n, density) split into ``m`` contiguous vertex blocks."""
    if not (isinstance(density, (int, float)) and 0.0 <= density <= 1.0) or math.isnan(density):
        raise ParameterError(f"density must lie in [0, 1], got {density!r}")
    if m < 1 or n < m:
        raise ParameterError(f"need n >= m >= 1, got n={n}, m={m}")
    rng = random.Random(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return PartitionedGraph(n, m, block_owners(n, m), tuple(edges))


def write_graph(g: PartitionedGraph, out, comment: str | None = None):
    if comment:
        for line in comment.splitlines():
            out.write(f"c {line}\n")
    out.write(f"p dgc {g.n_vertices} {g.m_parties} {len(g.edges)}\n")
    for v, p in enumerate(g.owner):
        out.write(f"o {v + 1} {p}\n")
    for u, v in g.edges:
        out.write(f"e {u + 1} {v + 1}\n")


def parse_graph(text: str) -> PartitionedGraph:
    header = None
    owner: dict[int, int] = {}
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        try:
            if parts[0] == "p":
                if header is not None or len(parts) != 5 or parts[1] != "dgc":
                    raise ValueError("bad header")
                header = tuple(int(t) for t in parts[2:])
            elif header is None:
                raise ValueError("record before header")
            elif parts[0] == "o" and len(parts) == 3:
                v, p = int(parts[1]) - 1, int(parts[2])
                if v in owner:
                    raise ValueError(f"vertex {v + 1} owned twice")
                owner[v] = p
            elif parts[0] == "e" and len(parts) == 3:
                edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
            else:
                raise ValueError(f"unknown record {parts[0]!r}")
        except ValueError as exc:
            raise ParameterError(f"line {lineno}: {exc}") from None
    if header is None:
        raise ParameterError("missing 'p dgc' header")
    n, m, n_edges = header
    if sorted(owner) != list(range(n)):
        raise ParameterError("every vertex needs exactly one 'o' line")
    if len(edges) != n_edges:
        raise ParameterError(f"header announces {n_edges} edges, found {len(edges)}")
    return PartitionedGraph(n, m, tuple(owner[v] for v in range(n)), tuple(edges))


def read_graph(path) -> PartitionedGraph:
    return parse_graph(Path(path).read_text())


def save_graph(g: PartitionedGraph, path, comment: str | None = None):
    with open(path, "w") as fh:
        write_graph(g, fh, comment)


def example_graph() -> PartitionedGraph:
    """The seven-job, three-party scheduling example (Alice, Bob, Carol)."""
    from importlib.resources import files
    return parse_graph(files("ppts.data").joinpath("example7.dgc").read_text())


# Coloring of the example graph with three conflicts (2-3, 2-4, 3-6), 0-based vertices.
EXAMPLE_CONFLICTED_COLORING = Coloring(3, (0, 1, 1, 1, 2, 1, 0))
# A proper 3-coloring of the example graph.
EXAMPLE_PROPER_COLORING = Coloring(3, (0, 1, 2, 0, 1, 0, 1))
