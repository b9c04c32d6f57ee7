"""Protocol runs over a :class:`SimNetwork`: enrolments and distress rounds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .. import crypto
from ..errors import EnrolmentRejected, ProtocolReject
from ..field_curve import OpCounter
from ..profiles import Profile
from ..protocol.channel import ChannelClient, ChannelServer
from ..protocol.messages import MsgType, ProtocolMessage
from ..protocol.parties import DCP_IDENTITY, Dcp, PageEmbed, User, Webserver, key_len
from ..protocol.records import EventLog
from ..rng import Prg
from .network import HelloFrame, SimNetwork


def pump(net: SimNetwork, a: str, a_sess, b: str, b_sess) -> None:
    """Shuttle frames between two sessions until neither has anything to send."""
    queue = [(a, b, frame) for frame in a_sess.start()]
    queue += [(b, a, frame) for frame in b_sess.start()]
    while queue:
        src, dst, frame = queue.pop(0)
        net.send(src, dst, frame)
        sess = b_sess if dst == b else a_sess
        queue += [(dst, src, out) for out in sess.handle(net.recv(dst, src))]


def server_enroll(net: SimNetwork, server: Webserver, dcp: Dcp, root_vk):
    curve, klen = dcp.curve, key_len(dcp.profile)
    inner = dcp.server_enrol_session()
    client = ChannelClient(curve, root_vk, DCP_IDENTITY, server.enrolment_session(),
                           server.rng, klen)
    srv = ChannelServer(curve, dcp.signing_key, dcp.cert, inner, dcp.rng, klen)
    pump(net, server.identity, client, DCP_IDENTITY, srv)
    if inner.error:
        raise EnrolmentRejected(inner.error)
    return inner.record, server.k_bc_seed


def user_enroll(net: SimNetwork, user: User, dcp: Dcp, root_vk, sites):
    curve, klen = dcp.curve, key_len(dcp.profile)
    inner = dcp.user_enrol_session()
    client = ChannelClient(curve, root_vk, DCP_IDENTITY, user.enrolment_session(sites),
                           user.rng, klen)
    srv = ChannelServer(curve, dcp.signing_key, dcp.cert, inner, dcp.rng, klen)
    pump(net, user.usr, client, DCP_IDENTITY, srv)
    if inner.error:
        raise EnrolmentRejected(inner.error)
    return dcp.users[user.creds.id], user.creds


@dataclass
class HelloOutcome:
    forwarded: bool = False
    accepted: bool = False
    reason: Optional[str] = None
    page: Optional[PageEmbed] = None
    confirmed: Optional[bool] = None


class Deployment:
    """A root CA, a DCP, webservers and users wired to one simulated network."""

    def __init__(self, profile: Profile, rng: Prg, n_max: int = 8,
                 net: Optional[SimNetwork] = None, events: Optional[EventLog] = None,
                 root: Optional[crypto.SigningKey] = None, dcp: Optional[Dcp] = None):
        self.profile = profile
        self.curve = profile.curve
        self.rng = rng
        self.net = net if net is not None else SimNetwork()
        self.root = root if root is not None else crypto.sig_keygen(self.curve, rng.spawn("root"))
        if dcp is None:
            dcp_key = crypto.sig_keygen(self.curve, rng.spawn("dcp-key"))
            dcp_cert = crypto.cert_issue(self.curve, self.root, DCP_IDENTITY, dcp_key.vk,
                                         rng.spawn("dcp-cert"))
            dcp = Dcp(profile, dcp_key, dcp_cert, self.root.vk, rng.spawn("dcp"), n_max, events)
        self.dcp = dcp
        self.net.register(DCP_IDENTITY)
        self.servers: dict[str, Webserver] = {}
        self.users: dict[str, User] = {}
        self.counter = OpCounter()

    def attach_webserver(self, srv: Webserver) -> None:
        self.net.register(srv.identity)
        self.servers[srv.identity] = srv

    def attach_user(self, user: User) -> None:
        self.net.register(user.usr)
        self.users[user.usr] = user

    def make_webserver(self, name: str) -> Webserver:
        key = crypto.sig_keygen(self.curve, self.rng.spawn("server-key", name))
        cert = crypto.cert_issue(self.curve, self.root, name, key.vk,
                                 self.rng.spawn("server-cert", name))
        self.net.register(name)
        return Webserver(self.profile, name, key, cert, self.rng.spawn("server", name))

    def add_webserver(self, name: str) -> Webserver:
        srv = self.servers.get(name) or self.make_webserver(name)
        server_enroll(self.net, srv, self.dcp, self.root.vk)
        self.servers[name] = srv
        return srv

    def add_user(self, usr: str, pwd: str, sites: Iterable[str], info: str = "",
                 instruction: Optional[str] = None) -> User:
        user = self.users.get(usr) or User(self.profile, usr, pwd, self.rng.spawn("user", usr),
                                           info, instruction or f"banner:{usr}")
        self.net.register(usr)
        user_enroll(self.net, user, self.dcp, self.root.vk, list(sites))
        self.users[usr] = user
        return user

    def add_client(self, name: str) -> None:
        self.net.register(name)

    def hello(self, client: str, site: str, wire: bytes) -> HelloOutcome:
        """Deliver one ClientHello carrying ``wire`` and run whatever it triggers."""
        net, srv, out = self.net, self.servers[site], HelloOutcome()
        net.send(client, site, HelloFrame.carrying(wire).encode())
        frame = HelloFrame.decode(net.recv(site, client))
        fwd = srv.on_client_hello(frame.wire(self.profile.codec.wire_bytes), net.clock,
                                  self.counter)
        if fwd is None:
            return out
        out.forwarded = True
        net.send(site, DCP_IDENTITY, fwd.encode())
        result = self.dcp.on_forward(ProtocolMessage.decode(net.recv(DCP_IDENTITY, site)),
                                     net.clock)
        out.accepted, out.reason = result.accepted, result.reason
        if not result.accepted:
            return out
        net.send(DCP_IDENTITY, site, result.reply.encode())
        reply = ProtocolMessage.decode(net.recv(site, DCP_IDENTITY))
        try:
            out.page = srv.on_reply(reply, fwd.fields[2])
        except ProtocolReject as exc:
            out.reason = exc.reason
            return out
        net.send(client, site, ProtocolMessage(MsgType.PAGE_REQUEST, ()).encode())
        net.recv(site, client)
        net.send(site, client, ProtocolMessage(MsgType.PAGE, (out.page.blob,)).encode())
        page = ProtocolMessage.decode(net.recv(client, site))
        out.page = PageEmbed(page.fields[0])
        return out

    def normal_hello(self, client: str, site: str, rng: Prg) -> HelloOutcome:
        return self.hello(client, site, self.profile.codec.prg_nonce(rng))

    def distress(self, usr: str, site: str) -> HelloOutcome:
        user = self.users[usr]
        out = self.hello(usr, site, user.make_distress_nonce(site))
        out.confirmed = out.page is not None and user.verify_confirmation(out.page)
        return out
