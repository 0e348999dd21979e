"""Experiment driver: single solves, chromatic-number scans and sweeps.

Result rows share one fixed schema (:data:`ROW_FIELDS`) so CSV and JSON-lines
outputs line up.  Every row carries the graph seed and the solver seed, which
is all that is needed to reproduce it.  Wall times exclude key generation,
which is reported in its own column.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

from .errors import ParameterError
from .graph import PartitionedGraph, generate_partitioned_graph
from .metrics import verify_cost_model
from .protocol import ProtocolConfig, run_ppts
from .tabu import SolveOutcome, Status, tabucol_solve

SOLVERS = ("tabucol", "ppts")


def solve(g: PartitionedGraph, solver: str, k: int, budget: int = 100_000, seed: int = 0,
          **options) -> SolveOutcome:
    """Run one solver on one ``k``.

    ``options`` go to :class:`ProtocolConfig` for PPTS (events are not kept
    unless asked for; ``listeners`` is passed to :func:`run_ppts`) and are
    rejected for Tabucol, except ``rep`` and ``tabu_len``.
    """
    if solver == "tabucol":
        extra = set(options) - {"rep", "tabu_len"}
        if extra:
            raise ParameterError(f"options not understood by tabucol: {sorted(extra)}")
        t0 = time.perf_counter()
        out = tabucol_solve(g, k, max_iter=budget, seed=seed, **options)
        out.metrics = {"wall_time": time.perf_counter() - t0}
        return out
    if solver == "ppts":
        listeners = options.pop("listeners", ())
        options.setdefault("keep_events", False)
        cfg = ProtocolConfig(k=k, max_iterations=budget, seed=seed, **options)
        out, _ = run_ppts(g, cfg, listeners=listeners)
        return out
    raise ParameterError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def _wall(out: SolveOutcome) -> float:
    m = out.metrics
    return m["wall_time"] if isinstance(m, dict) else m.wall_time


@dataclass
class LevelResult:
    k: int
    status: str
    iterations: int
    wall_time: float
    cost_ok: bool | None = None


@dataclass
class ChromaticResult:
    solver: str
    min_k: int | None
    levels: list[LevelResult] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return sum(lv.iterations for lv in self.levels)

    @property
    def wall_time(self) -> float:
        return sum(lv.wall_time for lv in self.levels)


def chromatic_search(g: PartitionedGraph, solver: str, k_range: Iterable[int],
                     budget: int, seed: int = 0, **options) -> ChromaticResult:
    """Scan ``k`` downward from the top of ``k_range``.

    Stops at the first ``k`` that is not solved within ``budget`` iterations
    and returns the smallest ``k`` that was.  ``min_k`` is ``None`` when even
    the largest ``k`` fails.  Every attempted level is recorded.
    """
    ks = sorted(set(k_range), reverse=True)
    if not ks or ks[-1] < 1:
        raise ParameterError("k_range must contain positive integers")
    result = ChromaticResult(solver, None)
    for k in ks:
        out = solve(g, solver, k, budget, seed, **options)
        cost_ok = None if solver == "tabucol" else verify_cost_model(out.metrics).ok
        result.levels.append(LevelResult(k, out.status.value, out.iterations, _wall(out), cost_ok))
        if out.status is not Status.COLORABLE:
            break
        result.min_k = k
    return result


# -- experiment specs ----------------------------------------------------------------

@dataclass
class ExperimentSpec:
    """Grid of experiment cells.  Defaults give the full-scale grid."""
    vertex_counts: tuple[int, ...] = (100, 200, 300, 500, 1000)
    densities: tuple[float, ...] = (0.02, 0.05, 0.10, 0.20, 0.30)
    parties: int = 10
    key_bits: int = 512
    k_values: tuple[int, ...] | str = "search"
    k_min: int = 2
    k_max: int = 12
    seeds: int = 10
    base_seed: int = 0
    max_iterations: int = 100_000
    search_budget: int = 10_000
    solvers: tuple[str, ...] = SOLVERS
    defense: bool = True

    def __post_init__(self):
        def positive(name, values):
            if not values or any(v <= 0 for v in values):
                raise ParameterError(f"{name} must be positive")
        positive("vertex_counts", self.vertex_counts)
        positive("densities", self.densities)
        if any(d > 1 for d in self.densities):
            raise ParameterError("densities must be at most 1")
        positive("parties/key_bits/seeds/budgets",
                 (self.parties, self.key_bits, self.seeds, self.max_iterations,
                  self.search_budget))
        if self.parties < 2:
            raise ParameterError("at least two parties are needed")
        if self.k_values != "search":
            positive("k_values", self.k_values)
        if not 1 <= self.k_min <= self.k_max:
            raise ParameterError("need 1 <= k_min <= k_max")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ParameterError(f"unknown solver {s!r}")

    @property
    def search(self) -> bool:
        return self.k_values == "search"

    def cells(self) -> list[tuple[int, float, int]]:
        """``(n, density, graph_seed)`` in a fixed order."""
        return [(n, d, self.base_seed + i) for n in self.vertex_counts for d in self.densities
                for i in range(self.seeds)]


def _split(text: str, cast):
    return tuple(cast(x) for x in text.replace(",", " ").split())


_PARSERS = {
    "vertex_counts": lambda s: _split(s, int),
    "densities": lambda s: _split(s, float),
    "parties": int, "key_bits": int, "k_min": int, "k_max": int, "seeds": int,
    "base_seed": int, "max_iterations": int, "search_budget": int,
    "k_values": lambda s: "search" if s.strip() == "search" else _split(s, int),
    "solvers": lambda s: _split(s, str),
    "defense": lambda s: s.strip().lower() in ("1", "on", "true", "yes"),
}


def parse_spec(text: str) -> ExperimentSpec:
    """Parse ``key = value`` lines (``#`` comments allowed) into a spec.

    Lists are comma or space separated.  Missing keys keep their defaults.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string("[spec]\n" + text)
    values = {}
    for key, raw in cp["spec"].items():
        if key not in _PARSERS:
            raise ParameterError(f"unknown config key {key!r}")
        try:
            values[key] = _PARSERS[key](raw)
        except ValueError as exc:
            raise ParameterError(f"bad value for {key}: {raw!r}") from exc
    return ExperimentSpec(**values)


def load_spec(path) -> ExperimentSpec:
    with open(path) as fh:
        return parse_spec(fh.read())


# -- sweep rows ----------------------------------------------------------------------

@dataclass
class ResultRow:
    mode: str
    solver: str
    n: int
    density: float
    parties: int
    key_bits: int
    graph_seed: int
    seed: int
    k: int | None
    status: str
    iterations: int
    wall_time: float
    keygen_time: float = 0.0
    n_external: int = 0
    turns: int = 0
    sync_moves: int = 0
    scalar_messages: int = 0
    comparisons: int = 0
    cost_check: str = ""
    levels: str = ""


ROW_FIELDS = [f.name for f in fields(ResultRow)]


def _solve_row(g, spec: ExperimentSpec, cell, solver, k, seed) -> ResultRow:
    n, d, gseed = cell
    opts = {} if solver == "tabucol" else {"key_bits": spec.key_bits, "sync_move": spec.defense}
    out = solve(g, solver, k, spec.max_iterations, seed, **opts)
    row = ResultRow("solve", solver, n, d, spec.parties, spec.key_bits if solver == "ppts" else 0,
                    gseed, seed, k, out.status.value, out.iterations, round(_wall(out), 4))
    if solver == "ppts":
        m = out.metrics
        row.keygen_time = round(m.keygen_time, 4)
        row.n_external = m.n_external
        row.turns = m.turns
        row.sync_moves = m.sync_moves
        row.scalar_messages = m.scalar_messages
        row.comparisons = m.comparisons
        row.cost_check = "pass" if verify_cost_model(m).ok else "fail"
    else:
        row.n_external = len(g.external_edges)
    return row


def _chromatic_row(g, spec: ExperimentSpec, cell, solver, seed) -> ResultRow:
    n, d, gseed = cell
    opts = {} if solver == "tabucol" else {"key_bits": spec.key_bits, "sync_move": spec.defense}
    res = chromatic_search(g, solver, range(spec.k_min, spec.k_max + 1), spec.search_budget,
                           seed, **opts)
    status = "found" if res.min_k is not None else "none"
    return ResultRow("chromatic", solver, n, d, spec.parties,
                     spec.key_bits if solver == "ppts" else 0, gseed, seed, res.min_k, status,
                     res.iterations, round(res.wall_time, 4), n_external=len(g.external_edges),
                     levels=json.dumps([asdict(lv) for lv in res.levels]))


def run_cell(spec: ExperimentSpec, cell: tuple[int, float, int]) -> list[ResultRow]:
    n, d, gseed = cell
    g = generate_partitioned_graph(n, d, spec.parties, seed=gseed)
    rows = []
    for solver in spec.solvers:
        if spec.search:
            rows.append(_chromatic_row(g, spec, cell, solver, gseed))
        else:
            for k in spec.k_values:
                rows.append(_solve_row(g, spec, cell, solver, k, gseed))
    return rows


def run_sweep(spec: ExperimentSpec, workers: int = 1) -> list[ResultRow]:
    """Run every cell; rows come back in cell order whatever ``workers`` is."""
    cells = spec.cells()
    if workers <= 1:
        return [row for cell in cells for row in run_cell(spec, cell)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(lambda c: run_cell(spec, c), cells))
    return [row for chunk in chunks for row in chunk]


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(asdict(r))
    return buf.getvalue()


def rows_to_jsonl(rows: Sequence[ResultRow]) -> str:
    return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in rows)
