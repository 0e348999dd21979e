"""Additive shares of the total conflict count via homomorphic scalar products.

For an external edge ``(u, v)`` the owner with the lower party id is the
initiator.  It sends its encrypted one-hot vector; the responder multiplies in
its own vector, adds a fresh mask ``r`` and returns one ciphertext.  The
initiator decrypts ``s = conflict + r``.  A party's share is its internal
conflict count plus every ``s`` it decrypted minus every ``r`` it generated,
so the shares add up to the global count while each one looks random.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .compare import wrap64
from .errors import CryptoError, ParameterError, ProtocolAbort
from .graph import ColorVector, Coloring, PartitionedGraph, count_conflicts
from .paillier import (Ciphertext, PaillierPrivateKey, PaillierPublicKey, add, decode_signed,
                       decrypt, encrypt, keygen, scalar_mul)
from .transport import InProcessTransport
from .wire import (Envelope, MsgType, pack_edge, pack_scalar_req, pack_scalar_resp,
                   unpack_edge, unpack_scalar_req, unpack_scalar_resp)

DEFAULT_MASK_BITS = 62

Edge = tuple[int, int]


# -- two-party primitive -------------------------------------------------------

def encrypt_vector(pk: PaillierPublicKey, sk: PaillierPrivateKey | None, bits: Sequence[int],
                   rng: random.Random | None = None) -> list[Ciphertext]:
    return [encrypt(pk, b, rng, private_key=sk) for b in bits]


def respond_product(pk: PaillierPublicKey, cts: Sequence[Ciphertext], bits: Sequence[int],
                    mask: int, rng: random.Random | None = None) -> Ciphertext:
    """``E(<x, y> + mask)`` from ``E(x)`` componentwise and plaintext ``y``."""
    if len(cts) != len(bits):
        raise ProtocolAbort(f"vector length mismatch: {len(cts)} ciphertexts, k={len(bits)}")
    acc = encrypt(pk, mask % pk.n, rng)
    for ct, b in zip(cts, bits):
        if b == 1:
            acc = add(pk, acc, ct)
        elif b:
            acc = add(pk, acc, scalar_mul(pk, ct, b))
    return acc


def _decode_sum(pk, sk, ct, mask_bits):
    s = decode_signed(pk, decrypt(pk, sk, ct))
    if not 0 <= s <= (1 << mask_bits):
        raise CryptoError("decrypted scalar product is outside the mask range")
    return s


@dataclass
class ScalarProductExchange:
    initiator: int
    responder: int
    edge: Edge
    encrypted_vector: list[Ciphertext]
    response: Ciphertext
    mask: int
    result: int


def secure_scalar_product(pa_vector: ColorVector, pb_vector: ColorVector,
                          pa_keys: tuple[PaillierPublicKey, PaillierPrivateKey],
                          transport: InProcessTransport | None = None, *,
                          mask: int | None = None, rng: random.Random | None = None,
                          parties: tuple[int, int] = (0, 1), edge: Edge = (0, 1),
                          mask_bits: int = DEFAULT_MASK_BITS) -> ScalarProductExchange:
    """Two messages; afterwards ``result - mask == pa_vector . pb_vector``."""
    if pa_vector.k != pb_vector.k:
        raise ParameterError("color vectors have different k")
    transport = transport or InProcessTransport()
    rng = rng or random.Random()
    pk, sk = pa_keys
    a, b = parties
    cts = encrypt_vector(pk, sk, pa_vector.bits(), rng)
    transport.send(Envelope(0, a, b, MsgType.SCALAR_REQ, pack_scalar_req(edge, pk, cts)))

    env = transport.recv(b, MsgType.SCALAR_REQ)
    got_edge, got_pk, got_cts = unpack_scalar_req(env.payload)
    r = rng.getrandbits(mask_bits) if mask is None else mask
    resp = respond_product(got_pk, got_cts, pb_vector.bits(), r, rng)
    transport.send(Envelope(0, b, a, MsgType.SCALAR_RESP, pack_scalar_resp(got_edge, got_pk, resp)))

    env = transport.recv(a, MsgType.SCALAR_RESP)
    _, ct = unpack_scalar_resp(env.payload)
    s = _decode_sum(pk, sk, ct, max(mask_bits, r.bit_length()) + 1)
    return ScalarProductExchange(a, b, tuple(edge), cts, resp, r, s)


# -- party state -----------------------------------------------------------------

class ConflictParty:
    """One party's private state for share maintenance.

    It knows its own vertices and colors, its internal edges, and for each of
    its external edges the foreign endpoint id and the foreign owner.
    ``values`` holds the latest ``s`` (as initiator) or ``r`` (as responder)
    per external edge.
    """

    def __init__(self, pid: int, graph: PartitionedGraph, colors: Mapping[int, int], k: int,
                 rng: random.Random, key_bits: int = 256, transcript=None,
                 mask_bits: int = DEFAULT_MASK_BITS,
                 keys: tuple[PaillierPublicKey, PaillierPrivateKey] | None = None):
        self.pid = pid
        self.k = k
        self.rng = rng
        self.mask_bits = mask_bits
        self.transcript = transcript
        self.vertices = graph.vertices_of(pid)
        own = set(self.vertices)
        missing = own - set(colors)
        if missing:
            raise ParameterError(f"party {pid} has no color for vertices {sorted(missing)}")
        self.colors = {v: int(colors[v]) for v in self.vertices}
        self.internal_edges = graph.internal_edges_of(pid)
        self.external_edges = graph.external_edges_of(pid)
        self.internal_adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.internal_edges:
            self.internal_adj[u].append(v)
            self.internal_adj[v].append(u)
        # foreign endpoint bookkeeping for own external edges
        self.peer: dict[Edge, int] = {}
        self.local_end: dict[Edge, int] = {}
        self.ext_by_vertex: dict[int, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.external_edges:
            u, v = e
            mine, other = (u, v) if u in own else (v, u)
            self.local_end[e] = mine
            self.peer[e] = graph.owner[other]
            self.ext_by_vertex[mine].append(e)
        self.pk, self.sk = keys if keys is not None else keygen(key_bits, rng)
        self.values: dict[Edge, int] = {}
        self._ext_sum = 0
        self._last_request: dict[Edge, list[Ciphertext]] = {}
        self.share = 0

    # -- local quantities ------------------------------------------------------
    def is_initiator(self, edge: Edge) -> bool:
        return self.pid < self.peer[edge]

    def initiator_of(self, edge: Edge) -> int:
        return min(self.pid, self.peer[edge])

    def internal_conflicts(self) -> int:
        return count_conflicts(self.internal_edges, self.colors)

    def internal_delta(self, v: int, color: int) -> int:
        old = self.colors[v]
        adj = self.internal_adj[v]
        return sum(self.colors[w] == color for w in adj) - sum(self.colors[w] == old for w in adj)

    def external_sum(self) -> int:
        return self._ext_sum

    def _store(self, edge: Edge, value: int):
        sign = 1 if self.is_initiator(edge) else -1
        self._ext_sum += sign * (value - self.values.get(edge, 0))
        self.values[edge] = value

    def compute_share(self) -> int:
        return wrap64(self.internal_conflicts() + self.external_sum())

    def refresh_share(self) -> int:
        self.share = self.compute_share()
        return self.share

    def _log(self, ev, **fields):
        if self.transcript is not None:
            self.transcript.party_event(self.pid, ev, **fields)

    # -- exchange steps ------------------------------------------------------
    def start_exchange(self, edge: Edge, transport, round_: int = 0, resend: bool = False):
        """Send ``E(own vector)`` for ``edge``.

        ``resend`` repeats the previous request's ciphertexts verbatim.  Only
        safe when the responder already knows the vertex cannot have changed.
        """
        if resend and edge in self._last_request:
            cts = self._last_request[edge]
        else:
            bits = [0] * self.k
            bits[self.colors[self.local_end[edge]]] = 1
            cts = encrypt_vector(self.pk, self.sk, bits, self.rng)
            self._last_request[edge] = cts
        transport.send(Envelope(round_, self.pid, self.peer[edge], MsgType.SCALAR_REQ,
                                pack_scalar_req(edge, self.pk, cts)))

    def respond(self, transport, round_: int = 0) -> Edge:
        env = transport.recv(self.pid, MsgType.SCALAR_REQ)
        edge, pk, cts = unpack_scalar_req(env.payload)
        if edge not in self.peer or self.peer[edge] != env.sender or not env.sender < self.pid:
            raise ProtocolAbort(f"party {self.pid} got a request for edge {edge} it does not answer")
        bits = [0] * self.k
        bits[self.colors[self.local_end[edge]]] = 1
        r = self.rng.getrandbits(self.mask_bits)
        resp = respond_product(pk, cts, bits, r, self.rng)
        transport.send(Envelope(round_, self.pid, env.sender, MsgType.SCALAR_RESP,
                                pack_scalar_resp(edge, pk, resp)))
        self._store(edge, r)
        if self.transcript is not None:
            self.transcript.edge_value(self.pid, "mask", edge, "r", r)
        return edge

    def finish_exchange(self, transport) -> Edge:
        env = transport.recv(self.pid, MsgType.SCALAR_RESP)
        edge, ct = unpack_scalar_resp(env.payload)
        if self.peer.get(edge) != env.sender:
            raise ProtocolAbort(f"party {self.pid} got a response for unexpected edge {edge}")
        s = _decode_sum(self.pk, self.sk, ct, self.mask_bits + 1)
        self._store(edge, s)
        if self.transcript is not None:
            self.transcript.edge_value(self.pid, "sum", edge, "s", s)
        return edge

    def request_exchange(self, edge: Edge, transport, round_: int = 0):
        """Ask the initiating peer to re-run the exchange on ``edge``."""
        transport.send(Envelope(round_, self.pid, self.peer[edge], MsgType.EVAL_REQ, pack_edge(edge)))

    def accept_request(self, transport) -> Edge:
        env = transport.recv(self.pid, MsgType.EVAL_REQ)
        edge = unpack_edge(env.payload)
        if self.peer.get(edge) != env.sender or not self.is_initiator(edge):
            raise ProtocolAbort(f"party {self.pid} got an evaluation request it cannot serve")
        return edge


def owners_of(edge: Edge, graph: PartitionedGraph) -> tuple[int, int]:
    a, b = graph.owner[edge[0]], graph.owner[edge[1]]
    return (a, b) if a < b else (b, a)


def exchange_edge(parties: Mapping[int, ConflictParty], graph: PartitionedGraph, edge: Edge,
                  transport, round_: int = 0, requested_by: int | None = None,
                  static: frozenset[int] = frozenset()):
    """Run one scalar-product exchange on ``edge``.

    When ``requested_by`` is the responder it first sends ``EVAL_REQ`` so the
    initiator knows to start; that message is not a scalar-product message.
    Initiators in ``static`` (parties whose colors are publicly frozen since
    their last request on this edge) resend their previous ciphertexts.
    """
    ini, resp = owners_of(edge, graph)
    if requested_by == resp:
        parties[resp].request_exchange(edge, transport, round_)
        if parties[ini].accept_request(transport) != edge:
            raise ProtocolAbort("evaluation request for the wrong edge")
    parties[ini].start_exchange(edge, transport, round_, resend=ini in static)
    parties[resp].respond(transport, round_)
    parties[ini].finish_exchange(transport)


@dataclass
class ConflictShares:
    shares: dict[int, int]
    messages: int = 0
    edges_evaluated: int = 0
    parties: dict[int, ConflictParty] = field(default_factory=dict, repr=False)

    def total(self) -> int:
        """Sum of the shares.  Test-harness use only."""
        return wrap64(sum(self.shares.values()))


def make_parties(graph: PartitionedGraph, x: Coloring | Sequence[int], *, key_bits: int = 256,
                 seed: int | str = 0, transcript=None,
                 mask_bits: int = DEFAULT_MASK_BITS) -> dict[int, ConflictParty]:
    colors = x.colors if isinstance(x, Coloring) else tuple(x)
    k = x.k if isinstance(x, Coloring) else max(colors, default=0) + 1
    if len(colors) != graph.n_vertices:
        raise ParameterError("coloring does not cover every vertex")
    parties = {}
    for p in range(graph.m_parties):
        own = {v: colors[v] for v in graph.vertices_of(p)}
        parties[p] = ConflictParty(p, graph, own, k, random.Random(f"{seed}:party:{p}"),
                                   key_bits=key_bits, transcript=transcript, mask_bits=mask_bits)
    return parties


def evaluate_edges(parties: Mapping[int, ConflictParty], graph: PartitionedGraph,
                   edges: Iterable[Edge], transport, round_: int = 0,
                   requested_by: Mapping[Edge, int] | None = None,
                   static: frozenset[int] = frozenset()) -> int:
    """Exchange on every listed edge, in order.  Returns the number of edges."""
    n = 0
    for e in edges:
        exchange_edge(parties, graph, e, transport, round_,
                      None if requested_by is None else requested_by.get(e), static)
        n += 1
    return n


def secure_conflict_computation(g: PartitionedGraph, x: Coloring,
                                transport: InProcessTransport | None = None, *,
                                key_bits: int = 256, seed: int | str = 0, transcript=None,
                                mask_bits: int = DEFAULT_MASK_BITS,
                                parties: Mapping[int, ConflictParty] | None = None) -> ConflictShares:
    """Every party ends with an additive share of the total conflict count.

    Each external edge is evaluated exactly once, so ``2 * len(external_edges)``
    scalar-product messages cross the transport.
    """
    transport = transport or InProcessTransport()
    if parties is None:
        parties = make_parties(g, x, key_bits=key_bits, seed=seed, transcript=transcript,
                               mask_bits=mask_bits)
    before = transport.count(MsgType.SCALAR_REQ, MsgType.SCALAR_RESP)
    n = evaluate_edges(parties, g, g.external_edges, transport)
    shares = {p: party.refresh_share() for p, party in parties.items()}
    messages = transport.count(MsgType.SCALAR_REQ, MsgType.SCALAR_RESP) - before
    return ConflictShares(shares, messages, n, dict(parties))


def touched_edges(parties: Mapping[int, ConflictParty], moved: Iterable[tuple[int, int]]) -> list[Edge]:
    """External edges incident to the moved ``(party, vertex)`` pairs, sorted."""
    out = set()
    for p, v in moved:
        out.update(parties[p].ext_by_vertex[v])
    return sorted(out)


def incremental_update(parties: Mapping[int, ConflictParty], graph: PartitionedGraph,
                       changes: Mapping[int, int], transport, round_: int = 0) -> ConflictShares:
    """Apply color changes and re-evaluate only the external edges they touch.

    The owners of changed vertices request exchanges on edges where they are
    the responder.  Shares then equal a full recomputation under the new
    coloring.
    """
    moved = []
    for v, c in sorted(changes.items()):
        p = graph.owner[v]
        parties[p].colors[v] = c
        moved.append((p, v))
    edges = touched_edges(parties, moved)
    requested = {}
    for p, v in moved:
        for e in parties[p].ext_by_vertex[v]:
            requested.setdefault(e, p)
    before = transport.count(MsgType.SCALAR_REQ, MsgType.SCALAR_RESP)
    n = evaluate_edges(parties, graph, edges, transport, round_, requested)
    shares = {p: party.refresh_share() for p, party in parties.items()}
    messages = transport.count(MsgType.SCALAR_REQ, MsgType.SCALAR_RESP) - before
    return ConflictShares(shares, messages, n, dict(parties))
