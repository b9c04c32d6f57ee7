"""Simulated network with passive taps, and the ClientHello carrier frame."""
from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Callable

from ..errors import ScriptError

# TLS record + handshake header for a fixed-size ClientHello; the 32-byte
# client random is the only variable part of the frame.
_HELLO_PREFIX = bytes.fromhex("1603010053" "0100004f" "0303")
_HELLO_SUFFIX = (bytes([0x20]) + bytes([0x5A]) * 32
                 + bytes.fromhex("0006130113021303") + bytes.fromhex("0100") + bytes.fromhex("0000"))
RANDOM_LEN = 32


@dataclass(frozen=True)
class HelloFrame:
    client_random: bytes

    def __post_init__(self):
        if len(self.client_random) != RANDOM_LEN:
            raise ValueError("client_random must be 32 bytes")

    @classmethod
    def carrying(cls, wire: bytes) -> "HelloFrame":
        """Frame a nonce wire; shorter (toy) wires are right-aligned."""
        if len(wire) > RANDOM_LEN:
            raise ValueError("wire longer than the client random")
        return cls(bytes(RANDOM_LEN - len(wire)) + wire)

    def wire(self, nbytes: int) -> bytes:
        return self.client_random[RANDOM_LEN - nbytes:]

    def encode(self) -> bytes:
        return _HELLO_PREFIX + self.client_random + _HELLO_SUFFIX

    @classmethod
    def decode(cls, data: bytes) -> "HelloFrame":
        n = len(_HELLO_PREFIX)
        if (len(data) != n + RANDOM_LEN + len(_HELLO_SUFFIX) or not data.startswith(_HELLO_PREFIX)
                or not data.endswith(_HELLO_SUFFIX)):
            raise ValueError("not a ClientHello frame")
        return cls(data[n:n + RANDOM_LEN])

    @staticmethod
    def is_hello(data: bytes) -> bool:
        return data[:1] == b"\x16"


@dataclass(frozen=True)
class Frame:
    time: int
    src: str
    dst: str
    data: bytes

    def to_json(self) -> str:
        return json.dumps({"time": self.time, "src": self.src, "dst": self.dst,
                           "hex": self.data.hex()}, sort_keys=True)


class SimNetwork:
    """Named endpoints with per-link FIFO mailboxes and a logical clock."""

    def __init__(self):
        self.endpoints: set[str] = set()
        self.taps: list[Callable[[Frame], None]] = []
        self.clock = 0
        self._links: dict[tuple[str, str], deque] = defaultdict(deque)

    def register(self, name: str) -> None:
        self.endpoints.add(name)

    def add_tap(self, tap: Callable[[Frame], None]) -> None:
        self.taps.append(tap)

    def send(self, src: str, dst: str, data: bytes) -> None:
        for name in (src, dst):
            if name not in self.endpoints:
                raise ScriptError(f"unknown endpoint {name!r}")
        self.clock += 1
        frame = Frame(self.clock, src, dst, bytes(data))
        self._links[(src, dst)].append(frame)
        for tap in self.taps:
            tap(frame)

    def recv(self, dst: str, src: str) -> bytes:
        link = self._links[(src, dst)]
        if not link:
            raise LookupError(f"no frame queued from {src} to {dst}")
        return link.popleft().data

    def queued(self, dst: str, src: str) -> int:
        return len(self._links[(src, dst)])


class Recorder:
    """A tap that keeps every frame it sees."""

    def __init__(self):
        self.frames: list[Frame] = []

    def __call__(self, frame: Frame) -> None:
        self.frames.append(frame)

    def to_ndjson(self) -> str:
        return "".join(f.to_json() + "\n" for f in self.frames)
