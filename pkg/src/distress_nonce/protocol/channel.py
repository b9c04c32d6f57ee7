"""Authenticated, encrypted session standing in for TLS during enrolment.

The server side (DCP) proves its identity with a root-issued certificate
and a signature over both DH shares; the client side is anonymous, as with
ordinary server-authenticated TLS. Inner sessions exchange
:class:`ProtocolMessage` objects and never see the channel frames.
"""
from __future__ import annotations

import json

from .. import crypto
from ..errors import NotOnCurve, ProtocolReject
from ..field_curve import Curve
from ..rng import Prg
from .messages import FrameError, MsgType, ProtocolMessage, bytes_int, int_bytes


class ChannelError(ProtocolReject):
    pass


class _Keys:
    def __init__(self, seed: bytes, key_len: int, outbound: str, inbound: str):
        self.keys = crypto.kdf(seed, "channel", key_len)
        self.outbound, self.inbound = outbound, inbound
        self.send_seq = 0
        self.recv_seq = 0

    def seal(self, msg: ProtocolMessage, rng: Prg) -> bytes:
        seq = int_bytes(self.send_seq)
        self.send_seq += 1
        ct = crypto.sym_encrypt(self.keys.enc_key, msg.encode(), rng)
        tag = crypto.mac_sign(self.keys.mac_key, crypto.encode_fields(self.outbound, seq, ct))
        return ProtocolMessage(MsgType.CHANNEL_DATA, (seq, ct), int_bytes(tag)).encode()

    def open(self, frame: ProtocolMessage) -> ProtocolMessage:
        if frame.msg_type != MsgType.CHANNEL_DATA:
            raise ChannelError("UnexpectedFrame", frame.msg_type.name)
        seq, ct = frame.fields
        if not crypto.mac_verify(self.keys.mac_key,
                                 crypto.encode_fields(self.inbound, seq, ct),
                                 bytes_int(frame.auth)):
            raise ChannelError("ChannelMac")
        if bytes_int(seq) != self.recv_seq:
            raise ChannelError("ChannelReplay")
        self.recv_seq += 1
        try:
            return ProtocolMessage.decode(crypto.sym_decrypt(self.keys.enc_key, ct))
        except FrameError as exc:
            raise ChannelError("ChannelFrame", str(exc)) from exc


class ChannelClient:
    """Client end; verifies the server certificate for ``peer_name``."""

    def __init__(self, curve: Curve, root_vk, peer_name: str, inner, rng: Prg,
                 key_len: int = 32):
        self.curve, self.root_vk, self.peer_name = curve, root_vk, peer_name
        self.inner, self.rng, self.key_len = inner, rng, key_len
        self._dh = None
        self._keys = None

    @property
    def done(self) -> bool:
        return self.inner.done

    def start(self) -> list[bytes]:
        self._dh = crypto.dh_keygen(self.curve, self.rng)
        share = crypto.point_to_bytes(self.curve, self._dh.share)
        return [ProtocolMessage(MsgType.CHANNEL_HELLO, (share,)).encode()]

    def handle(self, data: bytes) -> list[bytes]:
        frame = ProtocolMessage.decode(data)
        if self._keys is None:
            self._accept(frame)
            return [self._keys.seal(m, self.rng) for m in self.inner.start()]
        out = self.inner.handle(self._keys.open(frame))
        return [self._keys.seal(m, self.rng) for m in out]

    def _accept(self, frame: ProtocolMessage) -> None:
        if frame.msg_type != MsgType.CHANNEL_ACCEPT:
            raise ChannelError("UnexpectedFrame", frame.msg_type.name)
        cert_json, server_share = frame.fields
        try:
            cert = crypto.Certificate.from_dict(self.curve, json.loads(cert_json))
            peer = crypto.point_from_bytes(self.curve, server_share)
        except (ValueError, KeyError, NotOnCurve) as exc:
            raise ChannelError("DcpAuthFailed", "malformed certificate or share") from exc
        if not crypto.cert_verify(self.curve, self.root_vk, cert, subject=self.peer_name):
            raise ChannelError("DcpAuthFailed", "certificate")
        mine = crypto.point_to_bytes(self.curve, self._dh.share)
        transcript = crypto.encode_fields("channel", mine, server_share)
        if not crypto.sig_verify(self.curve, cert.subject_vk, transcript, frame.auth):
            raise ChannelError("DcpAuthFailed", "handshake signature")
        seed = crypto.dh_combine(self.curve, self._dh, peer)
        self._keys = _Keys(seed, self.key_len, "c2s", "s2c")


class ChannelServer:
    """Server end; holds the signing key and certificate it presents."""

    def __init__(self, curve: Curve, signing_key: crypto.SigningKey,
                 cert: crypto.Certificate, inner, rng: Prg, key_len: int = 32):
        self.curve, self.signing_key, self.cert = curve, signing_key, cert
        self.inner, self.rng, self.key_len = inner, rng, key_len
        self._keys = None

    @property
    def done(self) -> bool:
        return self.inner.done

    def start(self) -> list[bytes]:
        return []

    def handle(self, data: bytes) -> list[bytes]:
        frame = ProtocolMessage.decode(data)
        if self._keys is None:
            if frame.msg_type != MsgType.CHANNEL_HELLO:
                raise ChannelError("UnexpectedFrame", frame.msg_type.name)
            (client_share,) = frame.fields
            try:
                peer = crypto.point_from_bytes(self.curve, client_share)
            except (NotOnCurve, ValueError) as exc:
                raise ChannelError("ChannelFrame", "bad client share") from exc
            dh = crypto.dh_keygen(self.curve, self.rng)
            mine = crypto.point_to_bytes(self.curve, dh.share)
            sig = crypto.sig_sign(self.curve, self.signing_key,
                                  crypto.encode_fields("channel", client_share, mine),
                                  self.rng)
            self._keys = _Keys(crypto.dh_combine(self.curve, dh, peer), self.key_len,
                               "s2c", "c2s")
            cert_json = json.dumps(self.cert.to_dict(self.curve), sort_keys=True).encode()
            return [ProtocolMessage(MsgType.CHANNEL_ACCEPT, (cert_json, mine), sig).encode()]
        out = self.inner.handle(self._keys.open(frame))
        return [self._keys.seal(m, self.rng) for m in out]
