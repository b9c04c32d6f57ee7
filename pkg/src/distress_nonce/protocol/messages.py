"""Wire framing for protocol messages.

Frame: 1-byte type, 4-byte big-endian body length, body. The body is the
message fields, each with a 4-byte length prefix, followed by the
authenticator (possibly empty) as the final length-prefixed field.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple


class MsgType(IntEnum):
    CHANNEL_HELLO = 1
    CHANNEL_ACCEPT = 2
    CHANNEL_DATA = 3
    SERVER_ENROL_REQ = 10    # g^b, B, Cert_B, pk_B' | Sign_B(g^b, B, pk_B')
    SERVER_ENROL_RESP = 11   # g^c
    USER_ENROL_HELLO = 20    # usr, pwd, info, g^a, sqn, instruction
    USER_ENROL_SITES = 21    # websites
    USER_ENROL_SELECT = 22   # websites_A
    USER_ENROL_DONE = 23     # id_A, PK_A, g^c
    ENROL_REJECT = 29        # reason
    DISTRESS_FORWARD = 30    # B, c_BC, nonce_B | MAC(B, c_BC, nonce_B)
    DISTRESS_REPLY = 31      # c_CB, s_AC, nonce_C | MAC(c_CB, s_AC, nonce_B, nonce_C)
    PAGE = 32                # page blob
    PAGE_REQUEST = 33        # https request standing in for a page fetch


FIELD_COUNTS = {
    MsgType.CHANNEL_HELLO: 1,
    MsgType.CHANNEL_ACCEPT: 2,
    MsgType.CHANNEL_DATA: 2,
    MsgType.SERVER_ENROL_REQ: 4,
    MsgType.SERVER_ENROL_RESP: 1,
    MsgType.USER_ENROL_HELLO: 6,
    MsgType.USER_ENROL_SITES: 1,
    MsgType.USER_ENROL_SELECT: 1,
    MsgType.USER_ENROL_DONE: 3,
    MsgType.ENROL_REJECT: 1,
    MsgType.DISTRESS_FORWARD: 3,
    MsgType.DISTRESS_REPLY: 3,
    MsgType.PAGE: 1,
    MsgType.PAGE_REQUEST: 0,
}


class FrameError(ValueError):
    pass


def pack_fields(fields) -> bytes:
    return b"".join(struct.pack(">I", len(f)) + f for f in fields)


def unpack_fields(data: bytes) -> list[bytes]:
    out, pos = [], 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise FrameError("truncated field length")
        (n,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + n > len(data):
            raise FrameError("truncated field")
        out.append(data[pos:pos + n])
        pos += n
    return out


@dataclass(frozen=True)
class ProtocolMessage:
    msg_type: MsgType
    fields: Tuple[bytes, ...]
    auth: bytes = b""

    def encode(self) -> bytes:
        body = pack_fields(self.fields + (self.auth,))
        return struct.pack(">BI", self.msg_type, len(body)) + body

    @classmethod
    def decode(cls, data: bytes) -> "ProtocolMessage":
        if len(data) < 5:
            raise FrameError("frame shorter than its header")
        kind, length = struct.unpack_from(">BI", data)
        try:
            msg_type = MsgType(kind)
        except ValueError:
            raise FrameError(f"unknown message type {kind}") from None
        if length != len(data) - 5:
            raise FrameError("body length mismatch")
        parts = unpack_fields(data[5:])
        if len(parts) != FIELD_COUNTS[msg_type] + 1:
            raise FrameError(f"{msg_type.name} expects {FIELD_COUNTS[msg_type]} fields")
        return cls(msg_type, tuple(parts[:-1]), parts[-1])


def int_bytes(v: int) -> bytes:
    return v.to_bytes(max(1, (v.bit_length() + 7) // 8), "big")


def bytes_int(b: bytes) -> int:
    return int.from_bytes(b, "big")
