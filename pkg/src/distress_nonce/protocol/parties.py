"""The three principals (User, Webserver, DCP) and their protocol sessions.

Enrolment runs as small state machines driven by message exchange; each
session exposes ``start()``, ``handle(msg)`` and ``done``. Sessions on the
DCP side never raise on bad input: they answer with ``ENROL_REJECT`` and
record the reason in ``error``. Client sessions raise
:class:`EnrolmentRejected` when they receive a rejection.
"""
from __future__ import annotations

import hashlib
import json
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

from .. import crypto
from ..codec import DistressPayload
from ..errors import EnrolmentRejected, NotOnCurve, ProtocolReject, UnknownWebsite
from ..field_curve import OpCounter
from ..meceg import KeyPair, keygen
from ..profiles import Profile
from ..rng import Prg
from .messages import (
    FrameError,
    MsgType,
    ProtocolMessage,
    bytes_int,
    int_bytes,
    unpack_fields,
)
from .records import (
    DistressEvent,
    EventLog,
    ServerRecord,
    UserCredentials,
    UserRecord,
)

DCP_IDENTITY = "DCP"
CONFIRM_BITS = 63
NONCE_BYTES = 16
USER_LABEL = "alice"
SERVER_LABEL = "bob"

# reject reasons
CERT_INVALID = "CertInvalid"
SIG_INVALID = "SigInvalid"
DUPLICATE = "Duplicate"
UNKNOWN_WEBSITE = "UnknownWebsite"
BAD_PASSWORD = "BadPassword"
MALFORMED = "Malformed"
UNKNOWN_SERVER = "UnknownServer"
BAD_OUTER_MAC = "BadOuterMac"
UNKNOWN_USER = "UnknownUser"
BAD_TAG = "BadTag"
BAD_MAC = "BadMac"
STALE_NONCE = "StaleNonce"


def key_len(profile: Profile) -> int:
    return 16 if profile.is_toy else 32


def tag_input(id: int, sqn: int) -> bytes:
    return crypto.encode_fields(id, sqn)


def confirm_input(sqn: int) -> bytes:
    return crypto.encode_fields(sqn)


def page_offset(instruction: str) -> int:
    """Byte offset of s_AC inside the page blob, named by the instruction."""
    return int.from_bytes(hashlib.sha256(instruction.encode()).digest()[:2], "big") % 512


def _reject(reason: str) -> ProtocolMessage:
    return ProtocolMessage(MsgType.ENROL_REJECT, (reason.encode(),))


def _expect(msg: ProtocolMessage, kind: MsgType) -> None:
    if msg.msg_type == MsgType.ENROL_REJECT:
        raise EnrolmentRejected(msg.fields[0].decode(errors="replace"))
    if msg.msg_type != kind:
        raise EnrolmentRejected(MALFORMED, f"expected {kind.name}, got {msg.msg_type.name}")


# -- DCP ------------------------------------------------------------------

@dataclass
class ForwardOutcome:
    accepted: bool
    reply: Optional[ProtocolMessage] = None
    reason: Optional[str] = None


class Dcp:
    """Distress coordination point: server and user databases plus the event sink."""

    def __init__(self, profile: Profile, signing_key: crypto.SigningKey,
                 cert: crypto.Certificate, root_vk, rng: Prg, n_max: int = 8,
                 events: Optional[EventLog] = None):
        self.profile = profile
        self.curve = profile.curve
        self.signing_key, self.cert, self.root_vk = signing_key, cert, root_vk
        self.rng = rng
        self.n_max = n_max
        self.servers: dict[str, ServerRecord] = {}
        self.users: dict[int, UserRecord] = {}
        self.events = events if events is not None else EventLog()
        self._lock = threading.RLock()
        self._bc_keys: dict[str, crypto.DerivedKeys] = {}

    def usr_index(self, usr: str) -> Optional[UserRecord]:
        return next((r for r in self.users.values() if r.usr == usr), None)

    def server_keys(self, identity: str) -> crypto.DerivedKeys:
        keys = self._bc_keys.get(identity)
        if keys is None:
            keys = crypto.kdf(self.servers[identity].k_bc_seed, SERVER_LABEL,
                              key_len(self.profile))
            self._bc_keys[identity] = keys
        return keys

    def user_keys(self, record: UserRecord) -> crypto.DerivedKeys:
        return crypto.kdf(record.k_ac_seed, USER_LABEL, key_len(self.profile))

    def server_enrol_session(self) -> "DcpServerEnrolSession":
        return DcpServerEnrolSession(self)

    def user_enrol_session(self) -> "DcpUserEnrolSession":
        return DcpUserEnrolSession(self)

    def new_user_id(self) -> int:
        m_i = self.profile.layout.m_i
        if len(self.users) >= 1 << m_i:
            raise EnrolmentRejected("IdSpaceExhausted")
        while True:
            candidate = self.rng.randbits(m_i)
            if candidate not in self.users:
                return candidate

    def on_forward(self, msg: ProtocolMessage, now: int = 0) -> ForwardOutcome:
        """Verify a relayed distress signal; on success advance sqn and reply."""
        if msg.msg_type != MsgType.DISTRESS_FORWARD:
            return ForwardOutcome(False, reason=MALFORMED)
        b_raw, c_bc, nonce_b = msg.fields
        identity = b_raw.decode(errors="replace")
        with self._lock:
            if identity not in self.servers:
                return ForwardOutcome(False, reason=UNKNOWN_SERVER)
            keys = self.server_keys(identity)
            if not crypto.mac_verify(keys.mac_key, crypto.encode_fields(b_raw, c_bc, nonce_b),
                                     bytes_int(msg.auth)):
                return ForwardOutcome(False, reason=BAD_OUTER_MAC)
            try:
                id_raw, tag_raw = crypto_fields(crypto.sym_decrypt(keys.enc_key, c_bc), 2)
            except (ValueError, FrameError):
                return ForwardOutcome(False, reason=MALFORMED)
            record = self.users.get(bytes_int(id_raw))
            if record is None:
                return ForwardOutcome(False, reason=UNKNOWN_USER)
            user_keys = self.user_keys(record)
            tag = bytes_int(tag_raw)
            m_t = self.profile.layout.m_t
            accepted = None
            for i in range(self.n_max + 1):
                if crypto.mac_verify(user_keys.mac_key, tag_input(record.id, record.sqn + i),
                                     tag, m_t):
                    accepted = record.sqn + i
                    break
            if accepted is None:
                return ForwardOutcome(False, reason=BAD_TAG)
            record.sqn = accepted + 1
            s_ac = crypto.mac_sign(user_keys.mac_key, confirm_input(accepted), CONFIRM_BITS)
            self.events.append(DistressEvent(record.id, accepted, now, identity))
        c_cb = crypto.sym_encrypt(keys.enc_key, record.instruction.encode(), self.rng)
        s_ac_raw = s_ac.to_bytes(8, "big")
        nonce_c = self.rng.bytes(NONCE_BYTES)
        mac = crypto.mac_sign(keys.mac_key,
                              crypto.encode_fields(c_cb, s_ac_raw, nonce_b, nonce_c))
        reply = ProtocolMessage(MsgType.DISTRESS_REPLY, (c_cb, s_ac_raw, nonce_c), int_bytes(mac))
        return ForwardOutcome(True, reply=reply)


def crypto_fields(data: bytes, count: int) -> list[bytes]:
    parts = unpack_fields(data)
    if len(parts) != count:
        raise FrameError(f"expected {count} fields")
    return parts


class DcpServerEnrolSession:
    def __init__(self, dcp: Dcp):
        self.dcp = dcp
        self.done = False
        self.error: Optional[str] = None
        self.record: Optional[ServerRecord] = None

    def start(self) -> list[ProtocolMessage]:
        return []

    def _fail(self, reason: str) -> list[ProtocolMessage]:
        self.error, self.done = reason, True
        return [_reject(reason)]

    def handle(self, msg: ProtocolMessage) -> list[ProtocolMessage]:
        dcp, curve = self.dcp, self.dcp.curve
        if self.done or msg.msg_type != MsgType.SERVER_ENROL_REQ:
            return self._fail(MALFORMED)
        g_b, b_raw, cert_raw, pk_raw = msg.fields
        identity = b_raw.decode(errors="replace")
        try:
            cert = crypto.Certificate.from_dict(curve, json.loads(cert_raw))
        except (ValueError, KeyError, TypeError, NotOnCurve):
            return self._fail(CERT_INVALID)
        if not crypto.cert_verify(curve, dcp.root_vk, cert, subject=identity):
            return self._fail(CERT_INVALID)
        signed = crypto.encode_fields(g_b, b_raw, pk_raw)
        if not crypto.sig_verify(curve, cert.subject_vk, signed, msg.auth):
            return self._fail(SIG_INVALID)
        try:
            share = crypto.point_from_bytes(curve, g_b)
            pk_enc = crypto.point_from_bytes(curve, pk_raw)
        except (NotOnCurve, ValueError):
            return self._fail(MALFORMED)
        with dcp._lock:
            if identity in dcp.servers:
                return self._fail(DUPLICATE)
            mine = crypto.dh_keygen(curve, dcp.rng)
            seed = crypto.dh_combine(curve, mine, share)
            self.record = ServerRecord(identity, pk_enc, seed)
            dcp.servers[identity] = self.record
            dcp._bc_keys.pop(identity, None)
        self.done = True
        return [ProtocolMessage(MsgType.SERVER_ENROL_RESP,
                                (crypto.point_to_bytes(curve, mine.share),))]


class DcpUserEnrolSession:
    def __init__(self, dcp: Dcp):
        self.dcp = dcp
        self.done = False
        self.error: Optional[str] = None
        self.state = "await_hello"
        self._hello = None

    def start(self) -> list[ProtocolMessage]:
        return []

    def _fail(self, reason: str) -> list[ProtocolMessage]:
        self.error, self.done, self.state = reason, True, "failed"
        return [_reject(reason)]

    def handle(self, msg: ProtocolMessage) -> list[ProtocolMessage]:
        if self.state == "await_hello" and msg.msg_type == MsgType.USER_ENROL_HELLO:
            return self._on_hello(msg)
        if self.state == "await_select" and msg.msg_type == MsgType.USER_ENROL_SELECT:
            return self._on_select(msg)
        return self._fail(MALFORMED)

    def _on_hello(self, msg: ProtocolMessage) -> list[ProtocolMessage]:
        usr, pwd, info, g_a, sqn, instruction = msg.fields
        try:
            share = crypto.point_from_bytes(self.dcp.curve, g_a)
        except (NotOnCurve, ValueError):
            return self._fail(MALFORMED)
        existing = self.dcp.usr_index(usr.decode())
        if existing is not None and not crypto.check_password(
                pwd.decode(), existing.pwd_salt, existing.pwd_hash):
            return self._fail(BAD_PASSWORD)
        if not instruction:
            return self._fail(MALFORMED)
        self._hello = (usr.decode(), pwd.decode(), info.decode(), share, bytes_int(sqn),
                       instruction.decode(), existing)
        self.state = "await_select"
        sites = sorted(self.dcp.servers)
        return [ProtocolMessage(MsgType.USER_ENROL_SITES, (json.dumps(sites).encode(),))]

    def _on_select(self, msg: ProtocolMessage) -> list[ProtocolMessage]:
        dcp, curve = self.dcp, self.dcp.curve
        usr, pwd, info, share, sqn, instruction, existing = self._hello
        try:
            chosen = json.loads(msg.fields[0])
            if not isinstance(chosen, list) or not all(isinstance(s, str) for s in chosen):
                raise ValueError
        except ValueError:
            return self._fail(MALFORMED)
        with dcp._lock:
            if not chosen or any(s not in dcp.servers for s in chosen):
                return self._fail(UNKNOWN_WEBSITE)
            pk_list = {s: crypto.point_to_bytes(curve, dcp.servers[s].pk_enc).hex()
                       for s in chosen}
            mine = crypto.dh_keygen(curve, dcp.rng)
            seed = crypto.dh_combine(curve, mine, share)
            if existing is not None:
                uid, salt, digest = existing.id, existing.pwd_salt, existing.pwd_hash
            else:
                try:
                    uid = dcp.new_user_id()
                except EnrolmentRejected as exc:
                    return self._fail(exc.reason)
                salt = dcp.rng.bytes(16)
                digest = crypto.hash_password(pwd, salt)
            dcp.users[uid] = UserRecord(usr, salt, digest, info, instruction, uid, sqn,
                                        seed, list(chosen))
        self.done, self.state = True, "done"
        return [ProtocolMessage(MsgType.USER_ENROL_DONE, (
            int_bytes(uid), json.dumps(pk_list, sort_keys=True).encode(),
            crypto.point_to_bytes(curve, mine.share)))]


# -- Webserver ----------------------------------------------------------------

@dataclass
class PageEmbed:
    blob: bytes


class Webserver:
    """Participating webserver: decodes every ClientHello nonce, relays distress."""

    def __init__(self, profile: Profile, identity: str, signing_key: crypto.SigningKey,
                 cert: crypto.Certificate, rng: Prg, enc_keys: Optional[KeyPair] = None,
                 k_bc_seed: Optional[bytes] = None, pending_timeout: int = 1000,
                 history: int = 1024):
        self.profile = profile
        self.curve = profile.curve
        self.identity = identity
        self.signing_key, self.cert = signing_key, cert
        self.rng = rng
        self.enc_keys = enc_keys
        self.k_bc_seed = k_bc_seed
        self.pending_timeout = pending_timeout
        self.pending: "OrderedDict[bytes, int]" = OrderedDict()
        self.seen_nonces: "OrderedDict[bytes, None]" = OrderedDict()
        self._history = history
        self.expired: list[bytes] = []

    @property
    def keys(self) -> crypto.DerivedKeys:
        if self.k_bc_seed is None:
            raise ProtocolReject("NotEnrolled", self.identity)
        return crypto.kdf(self.k_bc_seed, SERVER_LABEL, key_len(self.profile))

    def enrolment_session(self) -> "ServerEnrolClient":
        return ServerEnrolClient(self)

    def on_client_hello(self, nonce: bytes, now: int = 0,
                        counter: Optional[OpCounter] = None) -> Optional[ProtocolMessage]:
        """Decode a ClientHello nonce; a forward message when it carries distress."""
        payload = self.profile.codec.decode(nonce, self.enc_keys.sk, counter)
        if payload is None:
            return None
        keys = self.keys
        c_bc = crypto.sym_encrypt(keys.enc_key,
                                  crypto.encode_fields(payload.id, payload.tag), self.rng)
        nonce_b = self.rng.bytes(NONCE_BYTES)
        b_raw = self.identity.encode()
        mac = crypto.mac_sign(keys.mac_key, crypto.encode_fields(b_raw, c_bc, nonce_b))
        self.pending[nonce_b] = now
        self._remember(nonce_b)
        return ProtocolMessage(MsgType.DISTRESS_FORWARD, (b_raw, c_bc, nonce_b), int_bytes(mac))

    def _remember(self, nonce_b: bytes) -> None:
        self.seen_nonces[nonce_b] = None
        while len(self.seen_nonces) > self._history:
            self.seen_nonces.popitem(last=False)

    def expire(self, now: int) -> list[bytes]:
        """Drop pending forwards older than the timeout; returns the dropped nonces."""
        dropped = [n for n, t in self.pending.items() if now - t > self.pending_timeout]
        for n in dropped:
            del self.pending[n]
        self.expired.extend(dropped)
        return dropped

    def _reply_mac_ok(self, reply: ProtocolMessage, nonce_b: bytes) -> bool:
        c_cb, s_ac, nonce_c = reply.fields
        return crypto.mac_verify(self.keys.mac_key,
                                 crypto.encode_fields(c_cb, s_ac, nonce_b, nonce_c),
                                 bytes_int(reply.auth))

    def on_reply(self, reply: ProtocolMessage, nonce_b: bytes) -> PageEmbed:
        """Accept DCP's reply for the pending forward ``nonce_b`` and build the page."""
        if reply.msg_type != MsgType.DISTRESS_REPLY:
            raise ProtocolReject(MALFORMED)
        if nonce_b in self.pending and self._reply_mac_ok(reply, nonce_b):
            del self.pending[nonce_b]
            c_cb, s_ac, _ = reply.fields
            instruction = crypto.sym_decrypt(self.keys.enc_key, c_cb).decode(errors="replace")
            return self.build_page(instruction, s_ac)
        if any(self._reply_mac_ok(reply, old) for old in self.seen_nonces if old != nonce_b) \
                or nonce_b not in self.pending:
            raise ProtocolReject(STALE_NONCE)
        raise ProtocolReject(BAD_MAC)

    def build_page(self, instruction: str, s_ac: bytes) -> PageEmbed:
        offset = page_offset(instruction)
        content = bytearray(self.rng.bytes(offset + len(s_ac) + 64))
        content[offset:offset + len(s_ac)] = s_ac
        return PageEmbed(len(content).to_bytes(4, "big") + bytes(content))


class ServerEnrolClient:
    def __init__(self, server: Webserver):
        self.server = server
        self.done = False
        self._dh = None

    def start(self) -> list[ProtocolMessage]:
        srv, curve = self.server, self.server.curve
        srv.enc_keys = keygen(curve, srv.rng)
        self._dh = crypto.dh_keygen(curve, srv.rng)
        g_b = crypto.point_to_bytes(curve, self._dh.share)
        b_raw = srv.identity.encode()
        pk_raw = crypto.point_to_bytes(curve, srv.enc_keys.pk)
        cert_raw = json.dumps(srv.cert.to_dict(curve), sort_keys=True).encode()
        sig = crypto.sig_sign(curve, srv.signing_key, crypto.encode_fields(g_b, b_raw, pk_raw),
                              srv.rng)
        return [ProtocolMessage(MsgType.SERVER_ENROL_REQ, (g_b, b_raw, cert_raw, pk_raw), sig)]

    def handle(self, msg: ProtocolMessage) -> list[ProtocolMessage]:
        self.done = True
        _expect(msg, MsgType.SERVER_ENROL_RESP)
        curve = self.server.curve
        try:
            share = crypto.point_from_bytes(curve, msg.fields[0])
        except (NotOnCurve, ValueError) as exc:
            raise EnrolmentRejected(MALFORMED, "DCP share") from exc
        self.server.k_bc_seed = crypto.dh_combine(curve, self._dh, share)
        return []


# -- User ---------------------------------------------------------------------

class User:
    def __init__(self, profile: Profile, usr: str, pwd: str, rng: Prg, info: str = "",
                 instruction: str = "default", creds: Optional[UserCredentials] = None):
        self.profile = profile
        self.curve = profile.curve
        self.usr, self.pwd, self.info, self.instruction = usr, pwd, info, instruction
        self.rng = rng
        self.creds = creds

    def enrolment_session(self, select: Union[Iterable[str], Callable]) -> "UserEnrolClient":
        return UserEnrolClient(self, select)

    def keys(self) -> crypto.DerivedKeys:
        return crypto.kdf(self.creds.k_ac_seed, USER_LABEL, key_len(self.profile))

    def make_distress_nonce(self, site: str, k: Optional[int] = None) -> bytes:
        """Build a distress nonce for ``site``; consumes one sequence number."""
        creds = self.creds
        if creds is None or site not in creds.websites_with_keys:
            raise UnknownWebsite(site)
        sqn = creds.sqn
        creds.sqn += 1
        creds.last_sqn = sqn
        tag = crypto.mac_sign(self.keys().mac_key, tag_input(creds.id, sqn),
                              self.profile.layout.m_t)
        return self.profile.codec.encode(DistressPayload(creds.id, tag),
                                         creds.websites_with_keys[site], self.rng, k)

    def verify_confirmation(self, page: PageEmbed) -> bool:
        try:
            blob = page.blob
            n = int.from_bytes(blob[:4], "big")
            content = blob[4:]
            if n != len(content) or self.creds is None or self.creds.last_sqn is None:
                return False
            offset = page_offset(self.creds.instruction)
            s_ac = content[offset:offset + 8]
            if len(s_ac) != 8:
                return False
            return crypto.mac_verify(self.keys().mac_key, confirm_input(self.creds.last_sqn),
                                     int.from_bytes(s_ac, "big"), CONFIRM_BITS)
        except (AttributeError, TypeError, ValueError):
            return False


class UserEnrolClient:
    def __init__(self, user: User, select):
        self.user = user
        self.select = select
        self.done = False
        self.state = "start"
        self._dh = None
        self._sqn = None
        self._chosen: list[str] = []

    def start(self) -> list[ProtocolMessage]:
        u, curve = self.user, self.user.curve
        self._dh = crypto.dh_keygen(curve, u.rng)
        self._sqn = u.rng.randbits(32)
        self.state = "await_sites"
        return [ProtocolMessage(MsgType.USER_ENROL_HELLO, (
            u.usr.encode(), u.pwd.encode(), u.info.encode(),
            crypto.point_to_bytes(curve, self._dh.share), int_bytes(self._sqn),
            u.instruction.encode()))]

    def handle(self, msg: ProtocolMessage) -> list[ProtocolMessage]:
        if msg.msg_type == MsgType.ENROL_REJECT:
            self.done, self.state = True, "failed"
            _expect(msg, MsgType.USER_ENROL_DONE)
        if self.state == "await_sites":
            _expect(msg, MsgType.USER_ENROL_SITES)
            offered = json.loads(msg.fields[0])
            chosen = self.select(offered) if callable(self.select) else list(self.select)
            self._chosen = list(chosen)
            self.state = "await_done"
            return [ProtocolMessage(MsgType.USER_ENROL_SELECT,
                                    (json.dumps(self._chosen).encode(),))]
        _expect(msg, MsgType.USER_ENROL_DONE)
        self.done, self.state = True, "done"
        curve = self.user.curve
        uid, pk_json, g_c = msg.fields
        pk_hex = json.loads(pk_json)
        if sorted(pk_hex) != sorted(self._chosen):
            raise EnrolmentRejected(MALFORMED, "public key list does not match selection")
        keys = {s: crypto.point_from_bytes(curve, bytes.fromhex(pk_hex[s])) for s in self._chosen}
        seed = crypto.dh_combine(curve, self._dh, crypto.point_from_bytes(curve, g_c))
        self.user.creds = UserCredentials(self.user.usr, bytes_int(uid), self._sqn, seed, keys,
                                          self.user.instruction)
        return []
