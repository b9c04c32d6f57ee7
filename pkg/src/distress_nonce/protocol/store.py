"""JSON persistence for DCP databases and principal state.

Keys, seeds and points are hex; sequence numbers are decimal. Output is
canonical (sorted keys, fixed indentation) so save/load/save is
byte-identical.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

from .. import crypto
from ..errors import StoreCorrupt
from ..field_curve import Curve
from ..meceg import KeyPair
from ..profiles import Profile
from ..rng import Prg
from .parties import Dcp, User, Webserver
from .records import DistressEvent, EventLog, ServerRecord, UserCredentials, UserRecord

FORMAT_VERSION = 1


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _pt(curve: Curve, p) -> str:
    return crypto.point_to_bytes(curve, p).hex()


def _unpt(curve: Curve, s: str):
    return crypto.point_from_bytes(curve, bytes.fromhex(s))


def databases_to_dict(dcp: Dcp) -> dict:
    curve = dcp.curve
    return {
        "version": FORMAT_VERSION,
        "profile": dcp.profile.name,
        "n_max": dcp.n_max,
        "servers": [{"identity": r.identity, "pk_enc": _pt(curve, r.pk_enc),
                     "k_bc_seed": r.k_bc_seed.hex()}
                    for r in sorted(dcp.servers.values(), key=lambda r: r.identity)],
        "users": [{"usr": r.usr, "pwd_salt": r.pwd_salt.hex(), "pwd_hash": r.pwd_hash.hex(),
                   "info": r.info, "instruction": r.instruction, "id": r.id, "sqn": r.sqn,
                   "k_ac_seed": r.k_ac_seed.hex(), "websites": list(r.websites)}
                  for r in sorted(dcp.users.values(), key=lambda r: r.id)],
    }


def databases_from_dict(curve: Curve, d: dict):
    if d.get("version") != FORMAT_VERSION:
        raise ValueError("unsupported store version")
    servers = {}
    for s in d["servers"]:
        rec = ServerRecord(str(s["identity"]), _unpt(curve, s["pk_enc"]),
                           bytes.fromhex(s["k_bc_seed"]))
        if rec.identity in servers:
            raise ValueError(f"duplicate server {rec.identity}")
        servers[rec.identity] = rec
    users = {}
    for u in d["users"]:
        rec = UserRecord(str(u["usr"]), bytes.fromhex(u["pwd_salt"]),
                         bytes.fromhex(u["pwd_hash"]), str(u["info"]), str(u["instruction"]),
                         int(u["id"]), int(u["sqn"]), bytes.fromhex(u["k_ac_seed"]),
                         [str(w) for w in u["websites"]])
        if rec.id in users or rec.sqn < 0:
            raise ValueError(f"bad user row {rec.id}")
        users[rec.id] = rec
    return servers, users, int(d["n_max"])


def save_dcp(dcp: Dcp, path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(dumps(databases_to_dict(dcp)))
    os.replace(tmp, path)


def load_dcp(dcp: Dcp, path) -> Dcp:
    """Replace ``dcp``'s databases with the file contents; all or nothing."""
    try:
        data = json.loads(Path(path).read_text())
        servers, users, n_max = databases_from_dict(dcp.curve, data)
    except StoreCorrupt:
        raise
    except Exception as exc:
        raise StoreCorrupt(f"{path}: {exc}") from exc
    with dcp._lock:
        dcp.servers, dcp.users, dcp.n_max = servers, users, n_max
        dcp._bc_keys.clear()
    return dcp


def signing_key_to_dict(curve: Curve, key: crypto.SigningKey) -> dict:
    return {"sk": format(key.sk, "x"), "vk": _pt(curve, key.vk)}


def signing_key_from_dict(curve: Curve, d: dict) -> crypto.SigningKey:
    return crypto.SigningKey(int(d["sk"], 16), _unpt(curve, d["vk"]))


def webserver_to_dict(srv: Webserver) -> dict:
    curve = srv.curve
    return {
        "identity": srv.identity,
        "signing_key": signing_key_to_dict(curve, srv.signing_key),
        "cert": srv.cert.to_dict(curve),
        "enc_sk": None if srv.enc_keys is None else format(srv.enc_keys.sk, "x"),
        "enc_pk": None if srv.enc_keys is None else _pt(curve, srv.enc_keys.pk),
        "k_bc_seed": None if srv.k_bc_seed is None else srv.k_bc_seed.hex(),
    }


def webserver_from_dict(profile: Profile, d: dict, rng: Prg) -> Webserver:
    curve = profile.curve
    try:
        enc = None
        if d.get("enc_sk"):
            enc = KeyPair(int(d["enc_sk"], 16), _unpt(curve, d["enc_pk"]))
        seed = bytes.fromhex(d["k_bc_seed"]) if d.get("k_bc_seed") else None
        return Webserver(profile, d["identity"], signing_key_from_dict(curve, d["signing_key"]),
                         crypto.Certificate.from_dict(curve, d["cert"]), rng, enc, seed)
    except Exception as exc:
        raise StoreCorrupt(f"bad webserver record: {exc}") from exc


def user_to_dict(user: User) -> dict:
    curve = user.curve
    c = user.creds
    return {
        "usr": user.usr, "pwd": user.pwd, "info": user.info, "instruction": user.instruction,
        "creds": None if c is None else {
            "id": c.id, "sqn": c.sqn, "k_ac_seed": c.k_ac_seed.hex(),
            "websites": {s: _pt(curve, p) for s, p in sorted(c.websites_with_keys.items())},
            "last_sqn": c.last_sqn,
        },
    }


def user_from_dict(profile: Profile, d: dict, rng: Prg) -> User:
    curve = profile.curve
    try:
        creds: Optional[UserCredentials] = None
        c = d.get("creds")
        if c:
            creds = UserCredentials(d["usr"], int(c["id"]), int(c["sqn"]),
                                    bytes.fromhex(c["k_ac_seed"]),
                                    {s: _unpt(curve, p) for s, p in c["websites"].items()},
                                    d["instruction"], c.get("last_sqn"))
        return User(profile, d["usr"], d["pwd"], rng, d.get("info", ""), d["instruction"], creds)
    except Exception as exc:
        raise StoreCorrupt(f"bad user record: {exc}") from exc


def read_events(path) -> EventLog:
    log = EventLog()
    p = Path(path)
    if p.exists():
        for line in p.read_text().splitlines():
            if line.strip():
                log.events.append(DistressEvent(**json.loads(line)))
    return log
