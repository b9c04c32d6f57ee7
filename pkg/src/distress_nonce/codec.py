"""Distress nonce codec.

A distress nonce is the mECEG encryption of ``1^m_d | id | tag`` embedded
as a curve point. Any other nonce is plain PRG output. ``decode`` is total:
every wire yields either a :class:`DistressPayload` or ``None``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import meceg
from .errors import (
    ContractViolation,
    InvalidFieldElement,
    LayoutViolation,
    NotOnCurve,
)
from .field_curve import Curve, OpCounter, Point
from .rng import Prg


@dataclass(frozen=True)
class BitLayout:
    m_d: int
    m_i: int
    m_t: int
    pad_bits: int

    @property
    def payload_bits(self) -> int:
        return self.m_d + self.m_i + self.m_t

    @property
    def bit_len(self) -> int:
        return self.payload_bits + self.pad_bits

    @property
    def marker(self) -> int:
        return (1 << self.m_d) - 1

    def problems(self, bit_len: int, toy: bool = False) -> list[str]:
        out = []
        if min(self.m_d, self.m_i, self.m_t) <= 0 or self.pad_bits < 0:
            out.append("field widths must be positive")
        if self.bit_len != bit_len:
            out.append(f"m_d + m_i + m_t + pad_bits = {self.bit_len}, expected {bit_len}")
        if not toy and self.m_d < 8:
            out.append("m_d must be at least 8 outside the toy profile")
        return out

    def pack(self, id: int, tag: int) -> int:
        if not 0 <= id < 1 << self.m_i:
            raise LayoutViolation(f"id does not fit in {self.m_i} bits")
        if not 0 <= tag < 1 << self.m_t:
            raise LayoutViolation(f"tag does not fit in {self.m_t} bits")
        return (((self.marker << self.m_i) | id) << self.m_t) | tag

    def unpack(self, r: int) -> Optional["DistressPayload"]:
        """Payload of a decrypted message, or None when the marker is absent."""
        if r >> (self.m_i + self.m_t) != self.marker:
            return None
        return DistressPayload((r >> self.m_t) & ((1 << self.m_i) - 1),
                               r & ((1 << self.m_t) - 1))


@dataclass(frozen=True)
class DistressPayload:
    id: int
    tag: int


class NonceCodec:
    """Encode/decode distress payloads for one curve profile and layout."""

    def __init__(self, curve: Curve, layout: BitLayout):
        if layout.bit_len != curve.bit_len:
            raise LayoutViolation(
                f"layout covers {layout.bit_len} bits, curve has {curve.bit_len}")
        self.curve = curve
        self.layout = layout
        self.wire_bits = meceg.wire_bits(curve)
        self.wire_bytes = meceg.wire_bytes(curve)

    def pack(self, payload: DistressPayload) -> int:
        return self.layout.pack(payload.id, payload.tag)

    def message_point(self, payload: DistressPayload) -> Point:
        return self.curve.embed_message(self.pack(payload), self.layout.pad_bits)

    def encode(self, payload: DistressPayload, pk: Point, rng: Prg,
               k: Optional[int] = None) -> bytes:
        ct = meceg.encrypt(self.curve, pk, self.message_point(payload), rng, k)
        return meceg.serialize(self.curve, ct)

    def decode(self, w: bytes, sk: int,
               counter: Optional[OpCounter] = None) -> Optional[DistressPayload]:
        try:
            ct = meceg.deserialize(self.curve, w)
        except (InvalidFieldElement, NotOnCurve, ValueError):
            return None
        m = meceg.decrypt(self.curve, sk, ct, counter)
        if m is None:
            return None
        return self.layout.unpack(self.curve.extract_message(m, self.layout.pad_bits))

    def prg_nonce(self, rng: Prg) -> bytes:
        return rng.randbits(self.wire_bits).to_bytes(self.wire_bytes, "big")

    def f_n(self, d: bool, payload: Optional[DistressPayload], pk: Point,
            rng: Prg) -> bytes:
        """The fixed-length reversible function: encode if ``d`` else PRG output."""
        if d != (payload is not None):
            raise ContractViolation("payload must be given exactly when d is true")
        if d:
            return self.encode(payload, pk, rng)
        return self.prg_nonce(rng)
