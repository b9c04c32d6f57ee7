"""Scripted end-to-end runs: enrol everyone, then replay timed hellos.

A script is JSON::

    {"profile": "production", "seed": 7,
     "servers": ["shop.example"],
     "clients": ["c1"],
     "users": [{"usr": "alice", "pwd": "pw", "sites": ["shop.example"]}],
     "steps": [{"at": 10, "op": "hello", "from": "c1", "to": "shop.example", "count": 1000},
               {"at": 20, "op": "distress", "user": "alice", "site": "shop.example"}]}

Steps run in order of ``at`` (ties keep script order); the network clock is
advanced to ``at`` before each step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import jsonschema

from .. import profiles, schemas
from ..errors import ScriptError
from ..profiles import Profile
from ..protocol.records import DistressEvent, EventLog
from ..rng import Prg
from .flows import Deployment, HelloOutcome
from .network import Frame, Recorder


@dataclass
class ScenarioResult:
    events: list[DistressEvent]
    frames: list[Frame]
    outcomes: list[dict] = field(default_factory=list)

    def events_ndjson(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)

    def frames_ndjson(self) -> str:
        return "".join(f.to_json() + "\n" for f in self.frames)


def _check_names(script: dict) -> None:
    servers = set(script["servers"])
    users = {u["usr"] for u in script["users"]}
    senders = users | set(script.get("clients", ()))
    for u in script["users"]:
        for site in u["sites"]:
            if site not in servers:
                raise ScriptError(f"user {u['usr']!r} selects unknown server {site!r}")
    for k, step in enumerate(script["steps"]):
        op = step["op"]
        need = {"hello": ("from", "to"), "distress": ("user", "site"), "expire": ("site",)}[op]
        for key in need:
            if key not in step:
                raise ScriptError(f"step {k}: {op} needs {key!r}")
        if op == "hello" and step["from"] not in senders:
            raise ScriptError(f"step {k}: unknown client {step['from']!r}")
        if op == "distress" and step["user"] not in users:
            raise ScriptError(f"step {k}: unknown user {step['user']!r}")
        target = step.get("to", step.get("site"))
        if target not in servers:
            raise ScriptError(f"step {k}: unknown server {target!r}")


def _summary(k: int, step: dict, out: HelloOutcome) -> dict:
    return {"step": k, "op": step["op"], "forwarded": out.forwarded, "accepted": out.accepted,
            "reason": out.reason, "confirmed": out.confirmed}


def scenario_run(script: dict, seed=None, profile: Optional[Profile] = None) -> ScenarioResult:
    """Run ``script`` over a fresh simulated deployment; a pure function of (script, seed)."""
    try:
        schemas.validate("scenario", script)
    except jsonschema.ValidationError as exc:
        raise ScriptError(f"script does not match schema: {exc.message}") from exc
    _check_names(script)
    if seed is None:
        seed = script.get("seed", 0)
    if profile is None:
        profile = profiles.load(script.get("profile", "production"))
    rng = Prg(seed)
    dep = Deployment(profile, rng.spawn("deployment"), n_max=script.get("n_max", 8),
                     events=EventLog())
    tap = Recorder()
    dep.net.add_tap(tap)
    for name in script["servers"]:
        dep.add_webserver(name)
    for u in script["users"]:
        dep.add_user(u["usr"], u["pwd"], u["sites"], u.get("info", ""), u.get("instruction"))
    for name in script.get("clients", ()):
        if name not in dep.users:
            dep.add_client(name)
    outcomes = []
    order = sorted(range(len(script["steps"])), key=lambda k: script["steps"][k].get("at", 0))
    for k in order:
        step = script["steps"][k]
        dep.net.clock = max(dep.net.clock, step.get("at", 0))
        if step["op"] == "hello":
            hello_rng = rng.spawn("hello", k)
            for _ in range(step.get("count", 1)):
                out = dep.normal_hello(step["from"], step["to"], hello_rng)
                if out.forwarded:
                    outcomes.append(_summary(k, step, out))
        elif step["op"] == "distress":
            outcomes.append(_summary(k, step, dep.distress(step["user"], step["site"])))
        else:
            dep.servers[step["site"]].expire(dep.net.clock)
    return ScenarioResult(list(dep.dcp.events), tap.frames, outcomes)
