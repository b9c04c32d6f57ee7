"""Database rows, user-side credentials and the distress event log."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from ..field_curve import Point


@dataclass
class ServerRecord:
    identity: str
    pk_enc: Point
    k_bc_seed: bytes


@dataclass
class UserRecord:
    usr: str
    pwd_salt: bytes
    pwd_hash: bytes
    info: str
    instruction: str
    id: int
    sqn: int
    k_ac_seed: bytes
    websites: list[str] = field(default_factory=list)


@dataclass
class UserCredentials:
    usr: str
    id: int
    sqn: int
    k_ac_seed: bytes
    websites_with_keys: dict[str, Point]
    instruction: str
    last_sqn: Optional[int] = None


@dataclass(frozen=True)
class DistressEvent:
    id: int
    sqn: int
    time: int
    server: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class EventLog:
    """Append-only sink for accepted distress signals."""

    def __init__(self, path=None):
        self.events: list[DistressEvent] = []
        self.path = path

    def append(self, event: DistressEvent) -> None:
        self.events.append(event)
        if self.path is not None:
            with open(self.path, "a") as fh:
                fh.write(event.to_json() + "\n")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def to_ndjson(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)
