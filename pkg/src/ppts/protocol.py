"""Privacy-preserving tabu search across vertex-partitioned parties.

Parties take turns (round robin).  On its turn a party:

1. works on its internal conflicts.  A move on an inner vertex only changes
   its own share, so it is decided locally.  A move on a border vertex is a
   *synchronous move*: a randomly picked second party makes a hidden companion
   move (or silently skips), the touched external edges are re-evaluated, and
   the sealed comparator tells the two movers whether the global conflict
   count dropped.  After the decision the same edges are evaluated once more
   with the final colors, so third parties cannot tell accept from reject.
2. if its partition is conflict free, tries ``border_budget`` border moves.
3. joins the global check ``conflicts < 1`` with all parties, then passes the
   token.

When a party has gone ``rep`` neighbors without an accepted move it takes its
best non-tabu inner candidate, or, for border moves, relaxes the comparison to
``conflicts(x') < conflicts(x) + 1`` so sideways moves can escape plateaus.
After ``uphill_after * rep`` such neighbors the bound becomes ``+ 2``, which
lets one uphill border move through and gets the search out of local minima.
"""
from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass
from typing import Sequence

from .compare import SecureComparator, wrap64
from .errors import ParameterError, ProtocolAbort
from .graph import Coloring, PartitionedGraph
from .metrics import RunMetrics
from .secure_conflict import DEFAULT_MASK_BITS, ConflictParty, evaluate_edges
from .tabu import (ConflictTracker, Move, Neighbor, SolveOutcome, Status, TabuList,
                   best_non_tabu, random_other_color, tabucol)
from .transcript import ProtocolTranscript
from .transport import InProcessTransport
from .wire import Envelope, MsgType, pack_u64, unpack_u64


@dataclass
class ProtocolConfig:
    k: int
    max_local_iter: int = 10_000
    max_iterations: int = 100_000
    max_global_rounds: int | None = None
    rep: int = 50
    tabu_len: int | None = None
    skip_probability: float = 0.5
    mask_bits: int = DEFAULT_MASK_BITS
    key_bits: int = 256
    seed: int = 0
    sync_move: bool = True
    incremental: bool = True
    cover_pair_edges: bool = False
    border_budget: int = 1
    turn_cap: int | None = None
    plateau: bool = True
    uphill_after: int = 5
    start_party: int = 0
    keep_events: bool = True
    check_invariants: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if not 0.0 <= self.skip_probability <= 1.0:
            raise ParameterError("skip_probability must lie in [0, 1]")
        if not 1 <= self.mask_bits <= 62:
            raise ParameterError("mask_bits must be in [1, 62]")
        if self.rep < 1 or self.max_iterations < 0 or self.max_local_iter < 0:
            raise ParameterError("budgets must be nonnegative and rep >= 1")
        if self.uphill_after < 0:
            raise ParameterError("uphill_after must be >= 0 (0 disables)")
        if self.border_budget < 0:
            raise ParameterError("border_budget must be >= 0")

    def public_meta(self) -> dict:
        meta = asdict(self)
        for private in ("keep_events", "check_invariants"):
            meta.pop(private)
        return meta


class Party(ConflictParty):
    """A protocol participant: share state plus its own tabu list."""

    def __init__(self, *args, tabu_len: int, **kwargs):
        super().__init__(*args, **kwargs)
        self.tabu = TabuList(tabu_len)
        self.stall = 0
        self.inner_candidates: list[Neighbor] = []
        self.border = [v for v in self.vertices if self.ext_by_vertex[v]]

    def conflicting_internal_edges(self):
        return [(u, v) for u, v in self.internal_edges if self.colors[u] == self.colors[v]]

    def note_accept(self, vertex: int, old_color: int, own_move: bool = True):
        self.tabu.push(vertex, old_color)
        self.inner_candidates.clear()
        if own_move:
            self.stall = 0

    def locally_colorable(self, max_iter: int, rep: int) -> bool:
        if not self.internal_edges:
            return True
        index = {v: i for i, v in enumerate(self.vertices)}
        edges = [(index[u], index[v]) for u, v in self.internal_edges]
        n = len(self.vertices)
        out = tabucol(n, edges, self.k, max_iter, max(1, n // 10), rep,
                      random.Random(self.rng.getrandbits(64)))
        return out.status is Status.COLORABLE


class PPTSEngine:
    """Deterministic single-threaded scheduler for all parties."""

    def __init__(self, g: PartitionedGraph, config: ProtocolConfig,
                 transport: InProcessTransport | None = None,
                 initial: Sequence[int] | None = None, listeners=()):
        if g.m_parties < 2:
            raise ParameterError("the protocol needs at least two parties")
        if not 0 <= config.start_party < g.m_parties:
            raise ParameterError("start_party out of range")
        self.g = g
        self.cfg = config
        self.transport = transport or InProcessTransport()
        self.transcript = ProtocolTranscript(
            {"n_vertices": g.n_vertices, "n_parties": g.m_parties, **config.public_meta()},
            keep_events=config.keep_events)
        for fn in listeners:
            self.transcript.add_listener(fn)
        self.transport.subscribe(self.transcript.on_transport)
        self.comparator = SecureComparator(self.transport, self.transcript)
        self.metrics = RunMetrics(n_vertices=g.n_vertices, n_external=len(g.external_edges),
                                  parties=g.m_parties)
        self.round = 0
        self._move_id = 0
        self._cmp_id = 0
        self.trace: list[int] = []
        tabu_len = config.tabu_len if config.tabu_len is not None else max(1, g.n_vertices // 10)

        t0 = time.perf_counter()
        self.parties: dict[int, Party] = {}
        for p in range(g.m_parties):
            rng = random.Random(f"ppts:{config.seed}:party:{p}")
            own = g.vertices_of(p)
            if initial is None:
                colors = {v: rng.randrange(config.k) for v in own}
            else:
                colors = {v: int(initial[v]) for v in own}
            self.parties[p] = Party(p, g, colors, config.k, rng, key_bits=config.key_bits,
                                    transcript=self.transcript, mask_bits=config.mask_bits,
                                    tabu_len=tabu_len)
        self.metrics.keygen_time = time.perf_counter() - t0
        # plaintext ground truth, harness only
        truth = [0] * g.n_vertices
        for party in self.parties.values():
            for v, c in party.colors.items():
                truth[v] = c
        self.truth = ConflictTracker(g.n_vertices, g.edges, config.k, truth)

    # -- helpers ---------------------------------------------------------------
    def _log(self, party: int, ev: str, **fields):
        self.transcript.party_event(party, ev, **fields)

    def _apply_truth(self, changes: dict[int, int], **fields):
        for v, c in changes.items():
            self.truth.apply(v, c)
        self.transcript.oracle_event("apply", changes={str(v): c for v, c in changes.items()},
                                     mu=self.truth.total, **fields)

    def _next_cmp(self) -> int:
        self._cmp_id += 1
        return self._cmp_id - 1

    def _exhausted(self) -> bool:
        if self.metrics.iterations >= self.cfg.max_iterations:
            return True
        cap = self.cfg.max_global_rounds
        return cap is not None and self.metrics.turns >= cap

    def _record_iteration(self):
        self.metrics.iterations += 1
        self.trace.append(self.truth.total)

    def _evaluate(self, edges, requested_by, static=frozenset()):
        self.metrics.touched.append(len(edges))
        evaluate_edges(self.parties, self.g, edges, self.transport, self.round, requested_by,
                       static)

    def _check_shares(self):
        if not self.cfg.check_invariants:
            return
        total = wrap64(sum(p.share for p in self.parties.values()))
        if total != self.truth.total:
            raise AssertionError(f"share sum {total} != conflict count {self.truth.total}")

    # -- moves -------------------------------------------------------------------
    def inner_move(self, a: int, move: Move) -> bool:
        """Decide a move on an inner vertex from ``a``'s own share alone."""
        party = self.parties[a]
        delta = party.internal_delta(move.vertex, move.to_color)
        accepted = delta < 0
        self._log(a, "move", kind="inner", vertex=move.vertex, to=move.to_color,
                  delta_a=delta, accepted=accepted)
        self.metrics.inner_moves += 1
        if accepted:
            self._apply_local(a, move, "inner")
        else:
            party.stall += 1
            party.inner_candidates.append(Neighbor(move, delta))
        return accepted

    def _apply_local(self, a: int, move: Move, kind: str):
        party = self.parties[a]
        party.colors[move.vertex] = move.to_color
        party.note_accept(move.vertex, move.from_color)
        party.refresh_share()
        self.metrics.accepted_moves += 1
        self._apply_truth({move.vertex: move.to_color}, kind=kind)
        self._check_shares()

    def _forced_move(self, a: int):
        party = self.parties[a]
        move = best_non_tabu(party.inner_candidates, party.tabu)
        self._log(a, "move", kind="forced", vertex=move.vertex, to=move.to_color)
        self.metrics.forced_moves += 1
        self._apply_local(a, move, "forced")

    def _companion(self, b: int, move_id: int):
        """``b`` picks a hidden companion move; returns ``(vertex, old, new)``."""
        pb = self.parties[b]
        v = pb.rng.choice(pb.vertices)
        old = pb.colors[v]
        new = old if self.cfg.k == 1 else random_other_color(pb.rng, self.cfg.k, old)
        skip = pb.rng.random() < self.cfg.skip_probability or (v, new) in pb.tabu
        if skip:
            new = old
        self._log(b, "companion", move_id=move_id, vertex=v, to=new, skip=skip,
                  delta_b=pb.internal_delta(v, new), n_ext=len(pb.ext_by_vertex[v]))
        pb.colors[v] = new
        return v, old, new

    def synchronous_move(self, a: int, move: Move) -> bool:
        """Border move by ``a`` with an optional hidden companion move."""
        cfg = self.cfg
        pa = self.parties[a]
        move_id = self._move_id
        self._move_id += 1
        v, old = move.vertex, move.from_color
        delta_a = pa.internal_delta(v, move.to_color)
        is_tabu = (v, move.to_color) in pa.tabu
        threshold = 0
        if cfg.plateau and pa.stall >= cfg.rep and not is_tabu:
            threshold = 1
            if cfg.uphill_after and pa.stall >= cfg.uphill_after * cfg.rep:
                threshold = 2

        b = comp = None
        if cfg.sync_move:
            b = pa.rng.choice([p for p in self.parties if p != a])
            self.transport.send(Envelope(self.round, a, b, MsgType.SYNC_INVITE, pack_u64(move_id)))
            if unpack_u64(self.transport.recv(b, MsgType.SYNC_INVITE).payload) != move_id:
                raise ProtocolAbort("synchronous move id mismatch")
            comp = self._companion(b, move_id)
            self.transport.send(Envelope(self.round, b, a, MsgType.SYNC_DONE, pack_u64(move_id)))
            self.transport.recv(a, MsgType.SYNC_DONE)

        cmp_id = self._next_cmp()
        peers = sorted({u if w == v else w for u, w in pa.ext_by_vertex[v]})
        self._log(a, "border_move", move_id=move_id, cmp_id=cmp_id, vertex=v, old=old, to=move.to_color,
                  n_ext=len(peers), peers=peers, delta_a=delta_a, threshold=threshold,
                  tabu=is_tabu)
        pa.colors[v] = move.to_color

        requested = {e: a for e in pa.ext_by_vertex[v]}
        if comp is not None:
            for e in self.parties[b].ext_by_vertex[comp[0]]:
                requested.setdefault(e, b)
            if cfg.cover_pair_edges:
                # hide which of b's vertices moved from a
                for e in pa.external_edges:
                    if pa.peer[e] == b:
                        requested.setdefault(e, min(a, b))
        if cfg.incremental:
            edges = sorted(requested)
        else:
            edges = list(self.g.external_edges)
        # edges between the two movers need no commit exchange: both learn the
        # decision and restore their earlier values locally on a reject
        pair_edges = []
        if b is not None and cfg.incremental:
            pair_edges = [e for e in edges if pa.peer.get(e) == b]
        saved = {p: {e: self.parties[p].values[e] for e in pair_edges} for p in (a, b)
                 if pair_edges}
        self._evaluate(edges, requested)

        recipients = [a] if b is None else sorted((a, b))
        for p, party in self.parties.items():
            right = party.share + (threshold if p == a else 0)
            self.comparator.submit(p, cmp_id, party.compute_share(), right, self.round)
        self.comparator.evaluate(cmp_id, self.parties, recipients, self.round, "move")
        bits = {p: self.comparator.receive(p, cmp_id) for p in recipients}
        accepted = bits[a]
        self.metrics.sync_moves += 1

        changes = {}
        if accepted:
            pa.note_accept(v, old)
            changes[v] = move.to_color
            self.metrics.accepted_moves += 1
        else:
            pa.colors[v] = old
            pa.stall += 1
        if comp is not None:
            vj, old_j, new_j = comp
            pb = self.parties[b]
            if not bits[b]:
                pb.colors[vj] = old_j
            elif new_j != old_j:
                pb.note_accept(vj, old_j, own_move=False)
                changes[vj] = new_j
        self._apply_truth(changes, kind="sync", move_id=move_id, accepted=accepted)

        # commit pass: same edges, final colors.  Parties outside the move
        # cannot have changed color since pass one, so they resend.
        movers = {a} if b is None else {a, b}
        if not accepted:
            for p, values in saved.items():
                for e, value in values.items():
                    self.parties[p]._store(e, value)
        if pair_edges:
            skip = set(pair_edges)
            edges = [e for e in edges if e not in skip]
        self._evaluate(edges, requested, frozenset(self.parties) - movers)
        for party in self.parties.values():
            party.refresh_share()
        self._check_shares()
        return accepted

    # -- turn structure ----------------------------------------------------------
    def _try(self, a: int, vertex: int) -> bool:
        party = self.parties[a]
        old = party.colors[vertex]
        move = Move(vertex, old, random_other_color(party.rng, self.cfg.k, old))
        if party.ext_by_vertex[vertex]:
            accepted = self.synchronous_move(a, move)
        else:
            accepted = self.inner_move(a, move)
        self._record_iteration()
        return accepted

    def _turn(self, a: int):
        cfg = self.cfg
        party = self.parties[a]
        party.inner_candidates.clear()
        self._log(a, "turn", round=self.round)
        cap = cfg.turn_cap if cfg.turn_cap is not None else cfg.rep
        if cfg.k > 1:
            steps = 0
            while steps < cap and not self._exhausted():
                conflicted = party.conflicting_internal_edges()
                if not conflicted:
                    break
                steps += 1
                u, w = party.rng.choice(conflicted)
                accepted = self._try(a, party.rng.choice((u, w)))
                if not accepted and party.stall >= cfg.rep and party.inner_candidates:
                    self._forced_move(a)
            if not party.conflicting_internal_edges() and party.border:
                for _ in range(cfg.border_budget):
                    if self._exhausted():
                        break
                    self._try(a, party.rng.choice(party.border))

    def _termination_check(self) -> bool:
        cmp_id = self._next_cmp()
        parties = sorted(self.parties)
        for p in parties:
            const = 1 if p == parties[0] else 0
            self.comparator.submit(p, cmp_id, self.parties[p].share, const, self.round)
        self.comparator.evaluate(cmp_id, parties, parties, self.round, "termination")
        bits = [self.comparator.receive(p, cmp_id) for p in parties]
        return bits[0]

    def _pass_token(self, a: int, b: int):
        self.transport.send(Envelope(self.round, a, b, MsgType.PASS_TOKEN, pack_u64(self.round)))
        self.transport.recv(b, MsgType.PASS_TOKEN)

    def _finish(self, status: Status, t0: float) -> SolveOutcome:
        m = self.metrics
        m.wall_time = time.perf_counter() - t0
        m.scalar_messages = self.transport.count(MsgType.SCALAR_REQ, MsgType.SCALAR_RESP)
        m.comparisons = self.comparator.count
        m.eval_requests = self.transport.count(MsgType.EVAL_REQ)
        m.bytes_sent = self.transport.bytes_sent
        coloring = None
        if status is Status.COLORABLE:
            coloring = Coloring(self.cfg.k, tuple(self.truth.colors))
        for p in sorted(self.parties):
            self._log(p, "result", status=status.value)
        self.transcript.oracle_event("outcome", status=status.value, iterations=m.iterations,
                                     mu=self.truth.total)
        return SolveOutcome(status, m.iterations, list(self.trace), coloring, m)

    def initialize(self) -> bool:
        """Local colorability checks, then the first full conflict computation.

        Returns False when some party's own subgraph resisted ``k`` colors.
        """
        for p, party in self.parties.items():
            self._log(p, "init", colors={str(v): c for v, c in party.colors.items()})
        self.transcript.oracle_event("init", colors=list(self.truth.colors), mu=self.truth.total)
        for p in sorted(self.parties):
            if not self.parties[p].locally_colorable(self.cfg.max_local_iter, self.cfg.rep):
                self._log(p, "local_uncolorable")
                return False
        self._evaluate(list(self.g.external_edges), None)
        for party in self.parties.values():
            party.refresh_share()
        self._check_shares()
        return True

    def run(self) -> SolveOutcome:
        t0 = time.perf_counter()
        cfg = self.cfg
        try:
            if not self.initialize():
                return self._finish(Status.NOT_COLORABLE, t0)
            a = cfg.start_party
            m = self.g.m_parties
            while True:
                self._turn(a)
                self.metrics.turns += 1
                if self._termination_check():
                    return self._finish(Status.COLORABLE, t0)
                if cfg.k == 1:
                    # no move can ever change a 1-coloring
                    return self._finish(Status.NOT_COLORABLE, t0)
                if self._exhausted():
                    return self._finish(Status.ITERATION_LIMIT, t0)
                nxt = (a + 1) % m
                self._pass_token(a, nxt)
                self.round += 1
                a = nxt
        except ProtocolAbort as exc:
            exc.transcript = self.transcript
            raise


def run_ppts(g: PartitionedGraph, config: ProtocolConfig,
             transport: InProcessTransport | None = None,
             initial: Sequence[int] | None = None,
             listeners=()) -> tuple[SolveOutcome, ProtocolTranscript]:
    """Run the protocol to completion.  Metrics ride on ``outcome.metrics``.

    ``listeners`` see every transcript event as it is recorded, even when
    ``config.keep_events`` is off.
    """
    engine = PPTSEngine(g, config, transport, initial, listeners)
    outcome = engine.run()
    return outcome, engine.transcript
