"""Modified EC El Gamal: ciphertext points travel as (x, sign bit) pairs.

A ciphertext serializes MSB-first as
``x(c1) | sign(c1) | x(c2) | sign(c2)`` with each x padded to ``bit_len``
bits, i.e. ``2 * (bit_len + 1)`` bits in total (256 for a 127-bit field).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import InvalidFieldElement, InvalidPoint, NotOnCurve
from .field_curve import CompressedPoint, Curve, OpCounter, Point
from .rng import Prg


@dataclass(frozen=True)
class KeyPair:
    sk: int
    pk: Point


class Ciphertext(NamedTuple):
    c1: CompressedPoint
    c2: CompressedPoint


def wire_bits(curve: Curve) -> int:
    return 2 * (curve.bit_len + 1)


def wire_bytes(curve: Curve) -> int:
    return (wire_bits(curve) + 7) // 8


def keygen(curve: Curve, rng: Prg, sk: Optional[int] = None) -> KeyPair:
    """Secret key uniform in [1, 2^bit_len); public key sk * gen."""
    if sk is not None:
        pk = curve.scalar_mul(sk, curve.gen)
        if pk is None:
            raise InvalidPoint("secret key maps the generator to infinity")
        return KeyPair(sk, pk)
    while True:
        sk = rng.randbits(curve.bit_len)
        if sk == 0:
            continue
        pk = curve.scalar_mul(sk, curve.gen)
        if pk is not None:
            return KeyPair(sk, pk)


def encrypt(curve: Curve, pk: Point, m_point: Point, rng: Prg,
            k: Optional[int] = None) -> Ciphertext:
    """Encrypt a finite point; ``k`` pins the ephemeral scalar (test hook)."""
    if m_point is None:
        raise InvalidPoint("message point must be finite")
    while True:
        eph = k if k is not None else rng.randbits(curve.bit_len)
        if eph:
            c1 = curve.scalar_mul(eph, curve.gen)
            shared = curve.scalar_mul(eph, pk)
            c2 = curve.add(m_point, shared)
            if c1 is not None and shared is not None and c2 is not None:
                return Ciphertext(curve.compress(c1), curve.compress(c2))
        if k is not None:
            raise InvalidPoint(f"ephemeral scalar {k} gives a degenerate ciphertext")


def decrypt(curve: Curve, sk: int, ct: Ciphertext,
            counter: Optional[OpCounter] = None) -> Point:
    """Return c2 - sk * c1; may be infinity for ciphertexts not made by encrypt."""
    c1 = curve.decompress(ct.c1)
    c2 = curve.decompress(ct.c2)
    return curve.sub(c2, curve.scalar_mul(sk, c1, counter))


def serialize(curve: Curve, ct: Ciphertext) -> bytes:
    n = curve.bit_len + 1
    v = 0
    for c in (ct.c1, ct.c2):
        curve.field.element(c.x)
        v = (v << n) | (c.x << 1) | (c.sign_bit & 1)
    return v.to_bytes(wire_bytes(curve), "big")


def split_wire(curve: Curve, w: bytes) -> Ciphertext:
    """Cut a wire into its two (x, sign) slots without any validation."""
    if len(w) != wire_bytes(curve):
        raise ValueError(f"wire must be {wire_bytes(curve)} bytes, got {len(w)}")
    n = curve.bit_len + 1
    v = int.from_bytes(w, "big")
    if v >> (2 * n):
        raise ValueError("wire has bits set above its width")
    lo = v & ((1 << n) - 1)
    hi = v >> n
    return Ciphertext(CompressedPoint(hi >> 1, hi & 1), CompressedPoint(lo >> 1, lo & 1))


def deserialize(curve: Curve, w: bytes) -> Ciphertext:
    ct = split_wire(curve, w)
    for c in ct:
        if c.x >= curve.q:
            raise InvalidFieldElement(f"x slot {c.x} >= q")
        if not curve.is_on_curve(c.x):
            raise NotOnCurve(f"x slot {c.x} is not on the curve")
    return ct


def has_structure(curve: Curve, w: bytes) -> bool:
    """True iff both x slots are field elements lying on the curve."""
    ct = split_wire(curve, w)
    q = curve.q
    return (ct.c1.x < q and ct.c2.x < q
            and curve.is_on_curve(ct.c1.x) and curve.is_on_curve(ct.c2.x))
