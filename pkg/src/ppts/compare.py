"""Ideal functionality for comparing two additively shared integers.

The evaluator is a sealed component: every party sends it one share of each
side (``CMP_SHARE``), it adds them up internally and answers ``left < right``
(``CMP_RESULT``) to the designated recipients only.  Nothing else leaves it.
A garbled-circuit or secret-sharing backend would replace
:meth:`SecureComparator._decide` and keep the same message interface.

Shares are 64-bit two's-complement values; sums are taken modulo 2**64 and
must stay below 2**62 in magnitude.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ParameterError, ProtocolAbort
from .transport import InProcessTransport
from .wire import (EVALUATOR, Envelope, MsgType, pack_cmp_result, pack_cmp_share,
                   unpack_cmp_result, unpack_cmp_share)

SHARE_MODULUS = 1 << 64
SUM_GUARD = 1 << 62

LEFT, RIGHT = 0, 1


def wrap64(v: int) -> int:
    """Reduce to the signed 64-bit representative."""
    v %= SHARE_MODULUS
    return v - SHARE_MODULUS if v >= SHARE_MODULUS // 2 else v


@dataclass(frozen=True)
class ComparisonRequest:
    left_shares: Mapping[int, int]
    right_shares: Mapping[int, int]
    recipients: frozenset[int]

    def __post_init__(self):
        if set(self.left_shares) != set(self.right_shares):
            raise ParameterError("left and right shares come from different party sets")
        recipients = frozenset(self.recipients)
        if not recipients <= set(self.left_shares):
            raise ParameterError("recipients must be participating parties")
        object.__setattr__(self, "recipients", recipients)


@dataclass(frozen=True)
class ComparisonBit:
    value: bool
    visible_to: frozenset[int]


class SecureComparator:
    """The evaluator.  One comparison in flight at a time."""

    def __init__(self, transport: InProcessTransport | None = None, transcript=None):
        self.transport = transport or InProcessTransport()
        self.transcript = transcript
        self.count = 0

    # party side ---------------------------------------------------------
    def submit(self, party: int, cmp_id: int, left: int, right: int, round_: int = 0):
        for side, value in ((LEFT, left), (RIGHT, right)):
            self.transport.send(Envelope(round_, party, EVALUATOR, MsgType.CMP_SHARE,
                                         pack_cmp_share(cmp_id, side, wrap64(value))))

    def receive(self, party: int, cmp_id: int) -> bool:
        env = self.transport.recv(party, MsgType.CMP_RESULT)
        got_id, bit = unpack_cmp_result(env.payload)
        if got_id != cmp_id:
            raise ProtocolAbort(f"party {party} got result for comparison {got_id}, expected {cmp_id}")
        if self.transcript is not None:
            self.transcript.party_event(party, "bit", cmp_id=cmp_id, bit=bit)
        return bit

    # evaluator side -----------------------------------------------------
    def evaluate(self, cmp_id: int, parties: Iterable[int], recipients: Iterable[int],
                 round_: int = 0, purpose: str = "") -> ComparisonBit:
        parties = sorted(parties)
        recipients = frozenset(recipients)
        if not recipients <= set(parties):
            raise ParameterError("recipients must be participating parties")
        sums = [0, 0]
        seen: set[tuple[int, int]] = set()
        for _ in range(2 * len(parties)):
            env = self.transport.recv(EVALUATOR, MsgType.CMP_SHARE)
            got_id, side, value = unpack_cmp_share(env.payload)
            key = (env.sender, side)
            if got_id != cmp_id or env.sender not in parties or key in seen:
                raise ProtocolAbort(f"unexpected comparison share from party {env.sender}")
            seen.add(key)
            sums[side] += value
        bit = self._decide(wrap64(sums[LEFT]), wrap64(sums[RIGHT]))
        self.count += 1
        if self.transcript is not None:
            self.transcript.evaluator_event("result", cmp_id=cmp_id, purpose=purpose,
                                            recipients=sorted(recipients))
        for p in sorted(recipients):
            self.transport.send(Envelope(round_, EVALUATOR, p, MsgType.CMP_RESULT,
                                         pack_cmp_result(cmp_id, bit)))
        return ComparisonBit(bit, recipients)

    @staticmethod
    def _decide(left: int, right: int) -> bool:
        if abs(left) >= SUM_GUARD or abs(right) >= SUM_GUARD:
            raise ProtocolAbort("shared sum exceeds the 2**62 guard")
        return left < right


def sec_compare(req: ComparisonRequest, comparator: SecureComparator | None = None,
                cmp_id: int = 0) -> ComparisonBit:
    """Run one comparison: every party submits, recipients collect the bit."""
    comp = comparator or SecureComparator()
    parties = sorted(req.left_shares)
    for p in parties:
        if req.left_shares[p] is None or req.right_shares[p] is None:
            raise ProtocolAbort(f"party {p} did not submit a share")
        comp.submit(p, cmp_id, req.left_shares[p], req.right_shares[p])
    result = comp.evaluate(cmp_id, parties, req.recipients)
    for p in sorted(req.recipients):
        comp.receive(p, cmp_id)
    return result


def sec_compare_with_constant(shares: Mapping[int, int], constant: int,
                              recipients: Iterable[int] | None = None,
                              comparator: SecureComparator | None = None,
                              cmp_id: int = 0) -> ComparisonBit:
    """``sum(shares) < constant``; the lowest party id contributes the constant."""
    parties = sorted(shares)
    if not parties:
        raise ParameterError("no shares to compare")
    right = {p: 0 for p in parties}
    right[parties[0]] = constant
    rec = frozenset(parties if recipients is None else recipients)
    return sec_compare(ComparisonRequest(dict(shares), right, rec), comparator, cmp_id)
