"""Byte-level message encoding.

All integers are big-endian.  ``bytes*`` is a length-prefixed byte string
(``u32`` length, then the bytes).

Envelope::

    u64 round | u16 from | u16 to | u8 type | u32 payload_len | payload

``to == EVALUATOR`` (0xFFFF) addresses the sealed comparison evaluator.

Payloads by type::

    SCALAR_REQ   u32 u | u32 v | bytes* pk_n | u16 k | k x bytes* ciphertext
    SCALAR_RESP  u32 u | u32 v | bytes* ciphertext
    CMP_SHARE    u64 cmp_id | u8 side (0 left, 1 right) | i64 value
    CMP_RESULT   u64 cmp_id | u8 bit
    SYNC_INVITE  u64 move_id
    SYNC_DONE    u64 move_id
    PASS_TOKEN   u64 turn
    EVAL_REQ     u32 u | u32 v

``(u, v)`` is an external edge with ``u < v`` (0-based vertex ids).
Ciphertexts are encoded at the fixed width of ``n**2``.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from .errors import ParameterError, TranscriptParseError
from .paillier import Ciphertext, PaillierPublicKey

EVALUATOR = 0xFFFF

_ENVELOPE = struct.Struct(">QHHBI")
_EDGE = struct.Struct(">II")
_U16 = struct.Struct(">H")
_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")
_CMP_SHARE = struct.Struct(">QBq")
_CMP_RESULT = struct.Struct(">QB")


class MsgType(enum.IntEnum):
    SCALAR_REQ = 1
    SCALAR_RESP = 2
    CMP_SHARE = 3
    CMP_RESULT = 4
    SYNC_INVITE = 5
    SYNC_DONE = 6
    PASS_TOKEN = 7
    EVAL_REQ = 8


@dataclass(frozen=True)
class Envelope:
    round: int
    sender: int
    recipient: int
    type: MsgType
    payload: bytes

    def encode(self) -> bytes:
        return _ENVELOPE.pack(self.round, self.sender, self.recipient,
                              int(self.type), len(self.payload)) + self.payload

    @classmethod
    def decode(cls, data: bytes) -> "Envelope":
        if len(data) < _ENVELOPE.size:
            raise TranscriptParseError("truncated envelope")
        rnd, sender, recipient, mtype, length = _ENVELOPE.unpack_from(data)
        payload = data[_ENVELOPE.size:]
        if len(payload) != length:
            raise TranscriptParseError(
                f"payload length {len(payload)} does not match header {length}")
        try:
            mtype = MsgType(mtype)
        except ValueError:
            raise TranscriptParseError(f"unknown message type {mtype}") from None
        return cls(rnd, sender, recipient, mtype, payload)


def _bytes_field(data: bytes) -> bytes:
    return _U32.pack(len(data)) + data


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, st: struct.Struct):
        if self.pos + st.size > len(self.data):
            raise TranscriptParseError("truncated payload")
        out = st.unpack_from(self.data, self.pos)
        self.pos += st.size
        return out

    def take_bytes(self) -> bytes:
        (length,) = self.take(_U32)
        if self.pos + length > len(self.data):
            raise TranscriptParseError("truncated byte string")
        out = self.data[self.pos:self.pos + length]
        self.pos += length
        return out

    def done(self):
        if self.pos != len(self.data):
            raise TranscriptParseError("trailing bytes in payload")


def _edge_bytes(edge):
    u, v = edge
    if not u < v:
        raise ParameterError("edges travel with u < v")
    return _EDGE.pack(u, v)


def pack_scalar_req(edge, pk: PaillierPublicKey, cts: list[Ciphertext]) -> bytes:
    parts = [_edge_bytes(edge), _bytes_field(pk.to_bytes()), _U16.pack(len(cts))]
    parts.extend(_bytes_field(c.to_bytes(pk)) for c in cts)
    return b"".join(parts)


def unpack_scalar_req(payload: bytes):
    r = _Reader(payload)
    edge = r.take(_EDGE)
    pk = PaillierPublicKey.from_bytes(r.take_bytes())
    (k,) = r.take(_U16)
    cts = [Ciphertext.from_bytes(r.take_bytes()) for _ in range(k)]
    r.done()
    return edge, pk, cts


def pack_scalar_resp(edge, pk: PaillierPublicKey, ct: Ciphertext) -> bytes:
    return _edge_bytes(edge) + _bytes_field(ct.to_bytes(pk))


def unpack_scalar_resp(payload: bytes):
    r = _Reader(payload)
    edge = r.take(_EDGE)
    ct = Ciphertext.from_bytes(r.take_bytes())
    r.done()
    return edge, ct


def pack_cmp_share(cmp_id: int, side: int, value: int) -> bytes:
    return _CMP_SHARE.pack(cmp_id, side, value)


def unpack_cmp_share(payload: bytes):
    r = _Reader(payload)
    out = r.take(_CMP_SHARE)
    r.done()
    return out


def pack_cmp_result(cmp_id: int, bit: bool) -> bytes:
    return _CMP_RESULT.pack(cmp_id, 1 if bit else 0)


def unpack_cmp_result(payload: bytes):
    r = _Reader(payload)
    cmp_id, bit = r.take(_CMP_RESULT)
    r.done()
    return cmp_id, bool(bit)


def pack_u64(value: int) -> bytes:
    return _U64.pack(value)


def unpack_u64(payload: bytes) -> int:
    r = _Reader(payload)
    (value,) = r.take(_U64)
    r.done()
    return value


def pack_edge(edge) -> bytes:
    return _edge_bytes(edge)


def unpack_edge(payload: bytes):
    r = _Reader(payload)
    edge = r.take(_EDGE)
    r.done()
    return edge


def decode_payload(mtype: MsgType, payload: bytes) -> dict:
    """Structured view of a payload, used by transcript tooling."""
    if mtype == MsgType.SCALAR_REQ:
        edge, pk, cts = unpack_scalar_req(payload)
        return {"edge": edge, "pk": pk, "ciphertexts": cts}
    if mtype == MsgType.SCALAR_RESP:
        edge, ct = unpack_scalar_resp(payload)
        return {"edge": edge, "ciphertext": ct}
    if mtype == MsgType.CMP_SHARE:
        cmp_id, side, value = unpack_cmp_share(payload)
        return {"cmp_id": cmp_id, "side": side, "value": value}
    if mtype == MsgType.CMP_RESULT:
        cmp_id, bit = unpack_cmp_result(payload)
        return {"cmp_id": cmp_id, "bit": bit}
    if mtype == MsgType.EVAL_REQ:
        return {"edge": unpack_edge(payload)}
    return {"value": unpack_u64(payload)}
