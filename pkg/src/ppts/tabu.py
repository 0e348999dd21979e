"""Tabucol and the tabu-list / move machinery shared with the secure protocol."""
from __future__ import annotations

import enum
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .errors import ParameterError
from .graph import Coloring, PartitionedGraph


class Move(NamedTuple):
    vertex: int
    from_color: int
    to_color: int


class Neighbor(NamedTuple):
    move: Move
    delta: int


class TabuList:
    """Bounded FIFO of ``(vertex, color)`` pairs with O(1) membership."""

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ParameterError("tabu capacity must be >= 0")
        self.capacity = capacity
        self._queue: deque[tuple[int, int]] = deque()
        self._count: Counter = Counter()

    def push(self, vertex: int, color: int):
        if self.capacity == 0:
            return
        entry = (vertex, color)
        self._queue.append(entry)
        self._count[entry] += 1
        if len(self._queue) > self.capacity:
            old = self._queue.popleft()
            self._count[old] -= 1
            if not self._count[old]:
                del self._count[old]

    def __contains__(self, entry) -> bool:
        return tuple(entry) in self._count

    def __len__(self):
        return len(self._queue)

    def entries(self) -> list[tuple[int, int]]:
        return list(self._queue)


def check_tabu(tabu: TabuList, move: Move) -> bool:
    """True when the move would give its vertex a color it recently left."""
    return (move.vertex, move.to_color) in tabu


def push_tabu(tabu: TabuList, vertex: int, old_color: int):
    tabu.push(vertex, old_color)


def best_non_tabu(neighbors: Iterable[Neighbor], tabu: TabuList) -> Move | None:
    """Lowest-delta neighbor whose move is not tabu.

    Ties go to the smallest ``(vertex, to_color)``.  When every neighbor is
    tabu the overall best one is returned so the search never deadlocks.
    """
    neighbors = list(neighbors)
    if not neighbors:
        return None

    def key(nb):
        return (nb.delta, nb.move.vertex, nb.move.to_color)

    allowed = [nb for nb in neighbors if not check_tabu(tabu, nb.move)]
    return min(allowed or neighbors, key=key).move


class Status(enum.Enum):
    COLORABLE = "colorable"
    NOT_COLORABLE = "not_colorable"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class SolveOutcome:
    status: Status
    iterations: int
    conflict_trace: list[int] = field(default_factory=list)
    coloring: Coloring | None = None
    metrics: object | None = None

    @property
    def colorable(self) -> bool:
        return self.status is Status.COLORABLE


def random_other_color(rng: random.Random, k: int, current: int) -> int:
    c = rng.randrange(k - 1)
    return c if c < current else c + 1


class ConflictTracker:
    """Colors plus the per-vertex color-count table used for O(1) move deltas."""

    def __init__(self, n: int, edges: Sequence[tuple[int, int]], k: int, colors: Sequence[int]):
        self.k = k
        self.colors = list(colors)
        self.adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            self.adj[u].append(v)
            self.adj[v].append(u)
        self.gamma = [[0] * k for _ in range(n)]
        for u, v in edges:
            self.gamma[u][self.colors[v]] += 1
            self.gamma[v][self.colors[u]] += 1
        self._conf: list[tuple[int, int]] = []
        self._pos: dict[tuple[int, int], int] = {}
        for u, v in edges:
            if self.colors[u] == self.colors[v]:
                self._add((u, v))

    def _add(self, e):
        self._pos[e] = len(self._conf)
        self._conf.append(e)

    def _remove(self, e):
        i = self._pos.pop(e)
        last = self._conf.pop()
        if last != e:
            self._conf[i] = last
            self._pos[last] = i

    @property
    def total(self) -> int:
        return len(self._conf)

    def conflicting_edges(self) -> list[tuple[int, int]]:
        return self._conf

    def delta(self, v: int, c: int) -> int:
        return self.gamma[v][c] - self.gamma[v][self.colors[v]]

    def apply(self, v: int, c: int):
        old = self.colors[v]
        if old == c:
            return
        for x in self.adj[v]:
            self.gamma[x][old] -= 1
            self.gamma[x][c] += 1
            e = (v, x) if v < x else (x, v)
            if self.colors[x] == old:
                self._remove(e)
            elif self.colors[x] == c:
                self._add(e)
        self.colors[v] = c


def tabucol_solve(g: PartitionedGraph, k: int, max_iter: int = 100_000,
                  tabu_len: int | None = None, rep: int = 50, seed: int = 0,
                  initial: Sequence[int] | None = None) -> SolveOutcome:
    """Centralized tabu search for a proper ``k``-coloring.

    Each iteration samples up to ``rep`` neighbors (recolor an endpoint of a
    random conflicting edge).  The first strictly improving neighbor is taken
    regardless of the tabu list; otherwise the best non-tabu sampled neighbor
    is taken.  The vertex's previous color becomes tabu.
    """
    if tabu_len is None:
        tabu_len = max(1, g.n_vertices // 10)
    return tabucol(g.n_vertices, g.edges, k, max_iter, tabu_len, rep, random.Random(seed), initial)


def tabucol(n: int, edges: Sequence[tuple[int, int]], k: int, max_iter: int, tabu_len: int,
            rep: int, rng: random.Random, initial: Sequence[int] | None = None) -> SolveOutcome:
    """Tabucol on a bare edge list over vertices ``0..n-1``."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    if max_iter < 0 or rep < 1:
        raise ParameterError("max_iter must be >= 0 and rep >= 1")
    colors = list(initial) if initial is not None else [rng.randrange(k) for _ in range(n)]
    state = ConflictTracker(n, edges, k, colors)
    tabu = TabuList(tabu_len)
    trace: list[int] = []
    it = 0
    while state.total > 0 and it < max_iter:
        if k == 1:
            # no alternative color exists, and an edge rules out one color
            return SolveOutcome(Status.NOT_COLORABLE, it, trace)
        sampled: list[Neighbor] = []
        chosen = None
        conf = state.conflicting_edges()
        for _ in range(rep):
            w = rng.choice(conf[rng.randrange(len(conf))])
            c = random_other_color(rng, k, state.colors[w])
            d = state.delta(w, c)
            nb = Neighbor(Move(w, state.colors[w], c), d)
            if d < 0:
                chosen = nb.move
                break
            sampled.append(nb)
        if chosen is None:
            chosen = best_non_tabu(sampled, tabu)
        push_tabu(tabu, chosen.vertex, chosen.from_color)
        state.apply(chosen.vertex, chosen.to_color)
        it += 1
        trace.append(state.total)
    if state.total == 0:
        return SolveOutcome(Status.COLORABLE, it, trace, Coloring(k, tuple(state.colors)))
    return SolveOutcome(Status.ITERATION_LIMIT, it, trace)
