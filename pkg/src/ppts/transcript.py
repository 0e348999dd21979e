"""Per-party protocol views, JSON-lines export and the view-minimality scanner.

A transcript has three streams:

* ``party`` events: what one party saw or did.  This is that party's view.
* ``evaluator`` events: the sealed comparison evaluator's bookkeeping
  (who submitted, who received the bit).  Never part of a party view.
* ``oracle`` events: ground truth kept by the test harness (initial coloring,
  applied color changes).  Used only to score attacks and build outcomes.

Every event is a flat JSON object.  Party events carry ``party`` and ``ev``
keys; message events (``send``/``recv``) also carry the envelope fields and
the hex payload.
"""
from __future__ import annotations

import hashlib
import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import TranscriptParseError
from .graph import PartitionedGraph
from .paillier import PaillierPublicKey
from .wire import EVALUATOR, Envelope, MsgType, decode_payload


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class ProtocolTranscript:
    """Append-only event log.

    With ``keep_events=False`` only running SHA-256 digests are kept, which is
    what long benchmark runs use; listeners still see every event.
    """

    def __init__(self, meta: dict | None = None, keep_events: bool = True):
        self.meta = dict(meta or {})
        self.keep_events = keep_events
        self.events: list[dict] = []
        self._digest = hashlib.sha256()
        self._party_digests: dict[int, "hashlib._Hash"] = defaultdict(hashlib.sha256)
        self._seq = 0
        self._in_flight: dict[int, deque[int]] = defaultdict(deque)
        self._listeners = []
        self.n_events = 0

    # -- recording -------------------------------------------------------
    def add_listener(self, fn):
        self._listeners.append(fn)

    def _append(self, event: dict, line: str | None = None):
        if line is None:
            line = _dumps(event)
        data = line.encode() + b"\n"
        self._digest.update(data)
        if "party" in event:
            self._party_digests[event["party"]].update(data)
        self.n_events += 1
        if self.keep_events:
            self.events.append(event)
        for fn in self._listeners:
            fn(event)

    def party_event(self, party: int, ev: str, **fields):
        self._append({"stream": "party", "party": party, "ev": ev, **fields})

    def edge_value(self, party: int, ev: str, edge, key: str, value: int):
        """Per-edge share event; hot path, so the JSON line is built by hand."""
        u, w = edge
        event = {"stream": "party", "party": party, "ev": ev, "edge": [u, w], key: value}
        line = (f'{{"edge":[{u},{w}],"ev":"{ev}","party":{party},"{key}":{value},'
                f'"stream":"party"}}')
        self._append(event, line)

    def evaluator_event(self, ev: str, **fields):
        self._append({"stream": "evaluator", "ev": ev, **fields})

    def oracle_event(self, ev: str, **fields):
        self._append({"stream": "oracle", "ev": ev, **fields})

    def on_transport(self, kind: str, env: Envelope):
        """Transport listener: logs sends for the sender, receipts for the recipient."""
        if kind == "send":
            seq = self._seq
            self._seq += 1
            self._in_flight[env.recipient].append(seq)
            peer_key, peer, owner = "to", env.recipient, env.sender
        else:
            seq = self._in_flight[env.recipient].popleft()
            peer_key, peer, owner = "sender", env.sender, env.recipient
        payload = env.payload.hex()
        tname = env.type.name
        if owner == EVALUATOR:
            event = {"stream": "evaluator", "ev": kind}
        else:
            event = {"stream": "party", "party": owner, "ev": kind}
        event.update({"seq": seq, peer_key: peer, "round": env.round, "type": tname,
                      "payload": payload})
        # same bytes as _dumps(event), built directly because this is the hot path
        party = "" if owner == EVALUATOR else f'"party":{owner},'
        stream = "evaluator" if owner == EVALUATOR else "party"
        if kind == "send":
            line = (f'{{"ev":"send",{party}"payload":"{payload}","round":{env.round},'
                    f'"seq":{seq},"stream":"{stream}","to":{peer},"type":"{tname}"}}')
        else:
            line = (f'{{"ev":"recv",{party}"payload":"{payload}","round":{env.round},'
                    f'"sender":{peer},"seq":{seq},"stream":"{stream}","type":"{tname}"}}')
        self._append(event, line)

    # -- access ------------------------------------------------------------
    def digest(self) -> str:
        return self._digest.hexdigest()

    def party_digest(self, party: int) -> str:
        return self._party_digests[party].hexdigest()

    def view(self, party: int) -> list[dict]:
        return [e for e in self.events if e.get("party") == party]

    def stream(self, name: str) -> list[dict]:
        return [e for e in self.events if e["stream"] == name]

    def to_jsonl(self) -> str:
        lines = [_dumps({"stream": "meta", **self.meta})]
        lines.extend(_dumps(e) for e in self.events)
        return "\n".join(lines) + "\n"

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "ProtocolTranscript":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise TranscriptParseError("empty transcript")
        try:
            records = [json.loads(ln) for ln in lines]
        except json.JSONDecodeError as exc:
            raise TranscriptParseError(f"invalid JSON: {exc}") from None
        head = records[0]
        if not isinstance(head, dict) or head.get("stream") != "meta":
            raise TranscriptParseError("first record must be the meta header")
        meta = {k: v for k, v in head.items() if k != "stream"}
        tr = cls(meta)
        for rec in records[1:]:
            if not isinstance(rec, dict) or rec.get("stream") not in ("party", "evaluator", "oracle"):
                raise TranscriptParseError(f"bad record {str(rec)[:80]}")
            if rec["stream"] == "party" and ("party" not in rec or "ev" not in rec):
                raise TranscriptParseError("party record without party/ev fields")
            tr._append(rec)
        return tr

    @classmethod
    def read_jsonl(cls, path) -> "ProtocolTranscript":
        with open(path) as fh:
            return cls.from_jsonl(fh.read())


# -- view minimality -------------------------------------------------------

@dataclass
class ViewReport:
    violations: list[str] = field(default_factory=list)
    events_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


class ViewScanner:
    """Checks that each party's events only reveal what the party may know.

    Allowed content of party ``p``'s view: its own vertices and their colors,
    its internal edges, external edges incident to its vertices (with the
    foreign endpoint's id), ciphertexts, the s/r values of its own exchanges,
    comparison bits addressed to it, and scheduling metadata.
    """

    def __init__(self, graph: PartitionedGraph):
        self.g = graph
        self.report = ViewReport()
        self._recipients: dict[int, set[int]] = {}
        self._external = set(graph.external_edges)
        self._internal = set(graph.internal_edges)

    def _fail(self, event, why):
        if len(self.report.violations) < 100:
            self.report.violations.append(f"{why}: {str(event)[:160]}")

    def _own_vertex(self, p, v):
        return 0 <= v < self.g.n_vertices and self.g.owner[v] == p

    def _edge_ok(self, p, edge):
        u, v = edge
        e = (min(u, v), max(u, v))
        if e in self._external:
            return p in (self.g.owner[u], self.g.owner[v])
        return e in self._internal and self.g.owner[u] == p

    def _check_ciphertexts(self, event, pk: PaillierPublicKey, cts):
        for ct in cts:
            if not 0 < ct.value < pk.nsquare:
                self._fail(event, "ciphertext out of range")
            if ct.value in (1, pk.n + 1):
                self._fail(event, "plaintext one-hot component sent unencrypted")

    def __call__(self, event: dict):
        self.report.events_checked += 1
        stream = event.get("stream")
        if stream == "evaluator":
            if event.get("ev") == "result":
                self._recipients[event["cmp_id"]] = set(event["recipients"])
            return
        if stream != "party":
            return
        p = event["party"]
        ev = event["ev"]
        if "vertex" in event and not self._own_vertex(p, event["vertex"]):
            self._fail(event, f"party {p} view mentions foreign vertex state")
        if "edge" in event and not self._edge_ok(p, tuple(event["edge"])):
            self._fail(event, f"party {p} view mentions an edge it may not know")
        if "peers" in event and "vertex" in event:
            v = event["vertex"]
            for w in event["peers"]:
                if not self._edge_ok(p, (v, w)) or (min(v, w), max(v, w)) not in self._external:
                    self._fail(event, f"party {p} lists a non-neighbor as a foreign peer")
        if "colors" in event:
            for v in event["colors"]:
                if not self._own_vertex(p, int(v)):
                    self._fail(event, f"party {p} view holds a foreign color")
        if ev in ("send", "recv"):
            self._check_message(p, event)
        elif ev == "bit":
            rec = self._recipients.get(event["cmp_id"])
            if rec is not None and p not in rec:
                self._fail(event, f"party {p} saw a bit not addressed to it")

    def _check_message(self, p, event):
        try:
            mtype = MsgType[event["type"]]
            body = decode_payload(mtype, bytes.fromhex(event["payload"]))
        except Exception as exc:  # malformed payloads are violations, not crashes
            self._fail(event, f"undecodable payload ({exc})")
            return
        if "edge" in body and not self._edge_ok(p, body["edge"]):
            self._fail(event, f"party {p} exchanged on an edge it does not touch")
        if mtype == MsgType.SCALAR_REQ:
            self._check_ciphertexts(event, body["pk"], body["ciphertexts"])
        elif mtype == MsgType.CMP_SHARE and event["ev"] != "send":
            self._fail(event, f"party {p} received another party's comparison share")
        elif mtype == MsgType.CMP_RESULT:
            rec = self._recipients.get(body["cmp_id"])
            if rec is not None and p not in rec:
                self._fail(event, f"party {p} received a bit not addressed to it")


def scan_views(transcript: ProtocolTranscript, graph: PartitionedGraph) -> ViewReport:
    scanner = ViewScanner(graph)
    for event in transcript.events:
        scanner(event)
    return scanner.report


def iter_party_events(transcript: ProtocolTranscript, party: int) -> Iterator[dict]:
    return (e for e in transcript.events if e.get("party") == party)


def global_message_seqs(transcript: ProtocolTranscript) -> Iterable[int]:
    return sorted(e["seq"] for e in transcript.events if e.get("ev") == "send")
