"""Message buses connecting the parties.

Both transports move encoded envelopes (bytes), never Python objects, so the
payloads seen by a party are exactly what would cross a network.
"""
from __future__ import annotations

import socket
import struct
from collections import Counter, deque
from typing import Callable

from .errors import ProtocolAbort
from .wire import Envelope, MsgType

Listener = Callable[[str, Envelope], None]

_FRAME = struct.Struct(">I")


class InProcessTransport:
    """Deterministic FIFO queues, one per recipient.

    ``fail_after`` makes the transport raise :class:`ProtocolAbort` on the
    n-th send, for exercising abort paths.
    """

    def __init__(self, fail_after: int | None = None):
        self._inboxes: dict[int, deque[bytes]] = {}
        self._listeners: list[Listener] = []
        self.counts: Counter = Counter()
        self.bytes_sent = 0
        self.fail_after = fail_after

    def subscribe(self, listener: Listener):
        self._listeners.append(listener)

    def _emit(self, kind, env):
        for listener in self._listeners:
            listener(kind, env)

    def _deliver(self, recipient: int, frame: bytes):
        self._inboxes.setdefault(recipient, deque()).append(frame)

    def send(self, env: Envelope):
        if self.fail_after is not None and sum(self.counts.values()) >= self.fail_after:
            raise ProtocolAbort(f"transport failure sending {env.type.name}")
        frame = env.encode()
        self.counts[env.type] += 1
        self.bytes_sent += len(frame)
        self._emit("send", env)
        self._deliver(env.recipient, frame)

    def recv(self, party: int, expected: MsgType | None = None) -> Envelope:
        box = self._inboxes.get(party)
        if not box:
            raise ProtocolAbort(f"party {party} expected a message but its inbox is empty")
        env = Envelope.decode(box.popleft())
        if expected is not None and env.type != expected:
            raise ProtocolAbort(
                f"party {party} expected {expected.name}, received {env.type.name}")
        self._emit("recv", env)
        return env

    def pending(self, party: int) -> int:
        return len(self._inboxes.get(party, ()))

    def count(self, *types: MsgType) -> int:
        return sum(self.counts[t] for t in types)

    def close(self):
        pass


class SocketTransport(InProcessTransport):
    """Pushes every frame through a local socket pair with u32 length framing."""

    def __init__(self, fail_after: int | None = None):
        super().__init__(fail_after)
        self._tx, self._rx = socket.socketpair()

    def _deliver(self, recipient: int, frame: bytes):
        self._tx.sendall(_FRAME.pack(len(frame)) + frame)
        (length,) = _FRAME.unpack(self._read_exact(_FRAME.size))
        super()._deliver(recipient, self._read_exact(length))

    def _read_exact(self, size: int) -> bytes:
        chunks = []
        while size:
            chunk = self._rx.recv(size)
            if not chunk:
                raise ProtocolAbort("socket closed mid-frame")
            chunks.append(chunk)
            size -= len(chunk)
        return b"".join(chunks)

    def close(self):
        self._tx.close()
        self._rx.close()


def make_transport(kind: str = "inproc") -> InProcessTransport:
    if kind == "inproc":
        return InProcessTransport()
    if kind == "socket":
        return SocketTransport()
    raise ValueError(f"unknown transport {kind!r}")
