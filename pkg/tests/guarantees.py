"""Scripted attacks against the distress protocols, shared by the unit and
acceptance suites. Each check raises AssertionError on failure."""
from dataclasses import replace

from distress_nonce import crypto
from distress_nonce.errors import EnrolmentRejected, ProtocolReject
from distress_nonce.harness.flows import Deployment, server_enroll
from distress_nonce.protocol import parties
from distress_nonce.protocol.channel import ChannelClient, ChannelError, ChannelServer
from distress_nonce.protocol.messages import MsgType, ProtocolMessage
from distress_nonce.rng import Prg

SHOP, NEWS = "shop.example", "news.example"


def deployment(profile, seed="guarantees", n_max=8):
    dep = Deployment(profile, Prg(seed), n_max=n_max)
    dep.add_webserver(SHOP)
    dep.add_webserver(NEWS)
    dep.add_user("alice", "pw-a", [SHOP, NEWS])
    dep.add_user("bob", "pw-b", [SHOP])
    return dep


def forward_of(dep, wire, site=SHOP):
    return dep.servers[site].on_client_hello(wire, dep.net.clock)


def expect_reject(fn, reason):
    try:
        fn()
    except (EnrolmentRejected, ProtocolReject) as exc:
        assert exc.reason == reason, f"rejected with {exc.reason}, expected {reason}"
        return
    raise AssertionError(f"expected rejection {reason}")


def honest_run(profile):
    dep = deployment(profile)
    out = dep.distress("alice", SHOP)
    assert out.accepted and out.confirmed is True
    assert len(dep.dcp.events) == 1
    ev = dep.dcp.events.events[0]
    creds = dep.users["alice"].creds
    assert (ev.id, ev.sqn, ev.server) == (creds.id, creds.last_sqn, SHOP)


def certificate_forgery(profile):
    dep = deployment(profile)
    curve = dep.curve
    rogue_root = crypto.sig_keygen(curve, Prg("rogue-root"))
    key = crypto.sig_keygen(curve, Prg("evil-key"))
    cert = crypto.cert_issue(curve, rogue_root, "evil.example", key.vk, Prg("evil-cert"))
    dep.net.register("evil.example")
    srv = parties.Webserver(profile, "evil.example", key, cert, Prg("evil"))
    expect_reject(lambda: server_enroll(dep.net, srv, dep.dcp, dep.root.vk),
                  parties.CERT_INVALID)
    # a real certificate for another name does not help either
    shop = dep.servers[SHOP]
    thief = parties.Webserver(profile, "thief.example", shop.signing_key, shop.cert, Prg("t"))
    dep.net.register("thief.example")
    expect_reject(lambda: server_enroll(dep.net, thief, dep.dcp, dep.root.vk),
                  parties.CERT_INVALID)
    assert "evil.example" not in dep.dcp.servers and "thief.example" not in dep.dcp.servers
    # and a DCP impostor cannot complete the channel handshake with a user
    imp_key = crypto.sig_keygen(curve, Prg("imp"))
    imp_cert = crypto.cert_issue(curve, rogue_root, parties.DCP_IDENTITY, imp_key.vk, Prg("i"))
    user = parties.User(profile, "carol", "pw", Prg("carol"), instruction="x")
    client = ChannelClient(curve, dep.root.vk, parties.DCP_IDENTITY,
                           user.enrolment_session([SHOP]), Prg("c"))
    server = ChannelServer(curve, imp_key, imp_cert, dep.dcp.user_enrol_session(), Prg("s"))
    hello = client.start()[0]
    accept = server.handle(hello)[0]
    expect_reject(lambda: client.handle(accept), "DcpAuthFailed")


def signature_replay(profile):
    dep = deployment(profile)
    curve = dep.curve
    srv = dep.make_webserver("late.example")
    enrol = srv.enrolment_session()
    old = enrol.start()[0]
    fresh_share = crypto.point_to_bytes(curve, crypto.dh_keygen(curve, Prg("fresh")).share)
    replayed = ProtocolMessage(old.msg_type, (fresh_share,) + old.fields[1:], old.auth)
    session = dep.dcp.server_enrol_session()
    reply = session.handle(replayed)
    assert reply[0].msg_type == MsgType.ENROL_REJECT
    assert session.error == parties.SIG_INVALID
    # the untouched message still verifies, so the rejection is the share binding
    ok = dep.dcp.server_enrol_session()
    assert ok.handle(old)[0].msg_type == MsgType.SERVER_ENROL_RESP
    dup = dep.dcp.server_enrol_session()
    dup.handle(old)
    assert dup.error == parties.DUPLICATE


def forward_replay(profile):
    dep = deployment(profile)
    fwd = forward_of(dep, dep.users["alice"].make_distress_nonce(SHOP))
    first = dep.dcp.on_forward(fwd)
    assert first.accepted
    again = dep.dcp.on_forward(fwd)
    assert not again.accepted and again.reason == parties.BAD_TAG
    assert len(dep.dcp.events) == 1


def tag_replay(profile):
    dep = deployment(profile)
    alice = dep.users["alice"]
    wire = alice.make_distress_nonce(SHOP)
    srv = dep.servers[SHOP]
    payload = profile.codec.decode(wire, srv.enc_keys.sk)
    assert dep.dcp.on_forward(forward_of(dep, wire)).accepted
    # same (id, tag) re-encrypted under fresh randomness, and sent to another site
    for site in (SHOP, NEWS):
        pk = alice.creds.websites_with_keys[site]
        rewrapped = profile.codec.encode(payload, pk, Prg(f"rewrap-{site}"))
        res = dep.dcp.on_forward(forward_of(dep, rewrapped, site))
        assert not res.accepted and res.reason == parties.BAD_TAG
    assert len(dep.dcp.events) == 1


def sqn_window(profile):
    n_max = 8
    dep = deployment(profile, n_max=n_max)
    alice = dep.users["alice"]
    for _ in range(n_max):
        alice.make_distress_nonce(SHOP)  # lost in transit
    edge = dep.dcp.on_forward(forward_of(dep, alice.make_distress_nonce(SHOP)))
    assert edge.accepted, "offset n_max must be accepted"
    for _ in range(n_max + 1):
        alice.make_distress_nonce(SHOP)
    past = dep.dcp.on_forward(forward_of(dep, alice.make_distress_nonce(SHOP)))
    assert not past.accepted and past.reason == parties.BAD_TAG
    assert len(dep.dcp.events) == 1


def stale_reply(profile):
    dep = deployment(profile)
    srv, alice = dep.servers[SHOP], dep.users["alice"]
    fwd1 = forward_of(dep, alice.make_distress_nonce(SHOP))
    reply1 = dep.dcp.on_forward(fwd1).reply
    nonce_b1 = fwd1.fields[2]
    srv.on_reply(reply1, nonce_b1)
    expect_reject(lambda: srv.on_reply(reply1, nonce_b1), parties.STALE_NONCE)
    fwd2 = forward_of(dep, alice.make_distress_nonce(SHOP))
    assert fwd2.fields[2] != nonce_b1
    expect_reject(lambda: srv.on_reply(reply1, fwd2.fields[2]), parties.STALE_NONCE)
    reply2 = dep.dcp.on_forward(fwd2).reply
    tampered = replace(reply2, fields=(reply2.fields[0], bytes(8), reply2.fields[2]))
    expect_reject(lambda: srv.on_reply(tampered, fwd2.fields[2]), parties.BAD_MAC)
    srv.on_reply(reply2, fwd2.fields[2])


def stale_confirmation(profile):
    dep = deployment(profile)
    first = dep.distress("alice", SHOP)
    assert first.confirmed
    second = dep.distress("alice", SHOP)
    assert second.confirmed
    alice = dep.users["alice"]
    assert not alice.verify_confirmation(first.page)
    # a page for someone else's distress does not confirm either
    bob_out = dep.distress("bob", SHOP)
    assert not alice.verify_confirmation(bob_out.page)
    junk = parties.PageEmbed(len(second.page.blob[4:]).to_bytes(4, "big")
                             + Prg("junk").bytes(len(second.page.blob) - 4))
    assert not alice.verify_confirmation(junk)


CHECKS = {
    "honest end-to-end run": honest_run,
    "certificate forgery": certificate_forgery,
    "signature replay across sessions": signature_replay,
    "forward replay": forward_replay,
    "tag replay": tag_replay,
    "out-of-window sqn (n_max, n_max+1)": sqn_window,
    "reply replay with stale nonce_B": stale_reply,
    "stale s_AC": stale_confirmation,
}
