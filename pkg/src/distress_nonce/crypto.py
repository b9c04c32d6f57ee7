"""Symmetric and PKI scaffolding: DH, KDF, truncated MACs, Schnorr, certificates.

DH and signatures run over the same curve as the nonce codec. All multi-field
MAC and signature inputs go through :func:`encode_fields` so that field
boundaries are unambiguous.
"""
from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from typing import Optional

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import DegenerateShare, InvalidSeed, NotOnCurve, ParameterError
from .field_curve import CompressedPoint, Curve, Point
from .rng import Prg

MAC_BITS = 256
PBKDF2_ROUNDS = 20_000


def encode_fields(*fields) -> bytes:
    """Length-prefixed concatenation; str is UTF-8, int is minimal big-endian."""
    out = bytearray()
    for f in fields:
        if isinstance(f, str):
            f = f.encode()
        elif isinstance(f, int):
            f = f.to_bytes(max(1, (f.bit_length() + 7) // 8), "big")
        out += len(f).to_bytes(4, "big") + f
    return bytes(out)


def point_to_bytes(curve: Curve, p: Point) -> bytes:
    c = curve.compress(p)
    return curve.field.to_bytes(c.x) + bytes([c.sign_bit])


def point_from_bytes(curve: Curve, data: bytes) -> Point:
    n = curve.field.byte_len
    if len(data) != n + 1 or data[-1] > 1:
        raise NotOnCurve("malformed point encoding")
    return curve.decompress(CompressedPoint(curve.field.from_bytes(data[:n]), data[-1]))


# -- Diffie-Hellman -------------------------------------------------------

@dataclass(frozen=True)
class DhKeyShare:
    exponent: int
    share: Point


def dh_keygen(curve: Curve, rng: Prg) -> DhKeyShare:
    while True:
        e = rng.randbits(curve.bit_len)
        share = curve.scalar_mul(e, curve.gen) if e else None
        if share is not None:
            return DhKeyShare(e, share)


def dh_combine(curve: Curve, mine: DhKeyShare, their_share: Point) -> bytes:
    if their_share is None or not curve.contains(their_share):
        raise DegenerateShare("peer share is the identity or off the curve")
    shared = curve.scalar_mul(mine.exponent, their_share)
    if shared is None:
        raise DegenerateShare("shared point is the identity")
    return point_to_bytes(curve, shared)


# -- KDF and symmetric primitives ----------------------------------------

@dataclass(frozen=True)
class DerivedKeys:
    enc_key: bytes
    mac_key: bytes


def _hkdf(seed: bytes, info: bytes, length: int) -> bytes:
    return HKDF(algorithm=hashes.SHA256(), length=length, salt=None, info=info).derive(seed)


def kdf(seed: bytes, label: str, key_len: int = 32) -> DerivedKeys:
    """Derive independent encryption and MAC keys from a shared seed."""
    if not seed:
        raise InvalidSeed("empty seed")
    return DerivedKeys(_hkdf(seed, f"{label}/enc".encode(), key_len),
                       _hkdf(seed, f"{label}/mac".encode(), key_len))


def mac_sign(key: bytes, message: bytes, out_bits: int = MAC_BITS) -> int:
    """HMAC-SHA256 truncated to its leftmost ``out_bits`` bits, as an int."""
    if not 0 < out_bits <= MAC_BITS:
        raise ValueError(f"out_bits must be in (0, {MAC_BITS}]")
    full = int.from_bytes(hmac.digest(key, message, "sha256"), "big")
    return full >> (MAC_BITS - out_bits)


def mac_verify(key: bytes, message: bytes, tag: int, out_bits: int = MAC_BITS) -> bool:
    try:
        expected = mac_sign(key, message, out_bits)
        width = (out_bits + 7) // 8
        return hmac.compare_digest(expected.to_bytes(width, "big"),
                                   int(tag).to_bytes(width, "big"))
    except (OverflowError, ValueError, TypeError):
        return False


def sym_encrypt(key: bytes, plaintext: bytes, rng: Prg) -> bytes:
    """AES-CTR with a random 16-byte IV prefix; integrity comes from the outer MAC."""
    iv = rng.bytes(16)
    enc = Cipher(algorithms.AES(key), modes.CTR(iv)).encryptor()
    return iv + enc.update(plaintext) + enc.finalize()


def sym_decrypt(key: bytes, blob: bytes) -> bytes:
    if len(blob) < 16:
        raise ValueError("ciphertext too short")
    dec = Cipher(algorithms.AES(key), modes.CTR(blob[:16])).decryptor()
    return dec.update(blob[16:]) + dec.finalize()


def hash_password(password: str, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode(), salt, PBKDF2_ROUNDS)


def check_password(password: str, salt: bytes, digest: bytes) -> bool:
    return hmac.compare_digest(hash_password(password, salt), digest)


# -- Schnorr signatures ---------------------------------------------------

@dataclass(frozen=True)
class SigningKey:
    sk: int
    vk: Point


def _order(curve: Curve) -> int:
    if curve.order is None:
        raise ParameterError("signatures need the group order (order_hint)")
    return curve.order


def _challenge(curve: Curve, r_bytes: bytes, vk: Point, message: bytes) -> int:
    h = hashlib.sha256(encode_fields(r_bytes, point_to_bytes(curve, vk), message))
    return int.from_bytes(h.digest(), "big") % _order(curve)


def sig_keygen(curve: Curve, rng: Prg) -> SigningKey:
    n = _order(curve)
    sk = rng.randrange(1, n)
    return SigningKey(sk, curve.scalar_mul(sk, curve.gen))


def sig_sign(curve: Curve, key: SigningKey, message: bytes, rng: Prg) -> bytes:
    n = _order(curve)
    k = rng.randrange(1, n)
    r_bytes = point_to_bytes(curve, curve.scalar_mul(k, curve.gen))
    s = (k + _challenge(curve, r_bytes, key.vk, message) * key.sk) % n
    return r_bytes + s.to_bytes((n.bit_length() + 7) // 8, "big")


def sig_verify(curve: Curve, vk: Point, message: bytes, sig: bytes) -> bool:
    try:
        n = _order(curve)
        plen = curve.field.byte_len + 1
        if vk is None or not curve.contains(vk) or len(sig) != plen + (n.bit_length() + 7) // 8:
            return False
        r_bytes, s = sig[:plen], int.from_bytes(sig[plen:], "big")
        if not 0 <= s < n:
            return False
        r = point_from_bytes(curve, r_bytes)
        e = _challenge(curve, r_bytes, vk, message)
        return curve.scalar_mul(s, curve.gen) == curve.add(r, curve.scalar_mul(e, vk))
    except (NotOnCurve, ValueError):
        return False


# -- Certificates -------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    subject: str
    subject_vk: Point
    issuer_sig: bytes

    def signed_bytes(self, curve: Curve) -> bytes:
        return cert_body(curve, self.subject, self.subject_vk)

    def to_dict(self, curve: Curve) -> dict:
        return {"subject": self.subject,
                "subject_vk": point_to_bytes(curve, self.subject_vk).hex(),
                "issuer_sig": self.issuer_sig.hex()}

    @classmethod
    def from_dict(cls, curve: Curve, d: dict) -> "Certificate":
        return cls(d["subject"], point_from_bytes(curve, bytes.fromhex(d["subject_vk"])),
                   bytes.fromhex(d["issuer_sig"]))


def cert_body(curve: Curve, subject: str, vk: Point) -> bytes:
    return encode_fields("cert", subject, point_to_bytes(curve, vk))


def cert_issue(curve: Curve, root: SigningKey, subject: str, subject_vk: Point,
               rng: Prg) -> Certificate:
    return Certificate(subject, subject_vk,
                       sig_sign(curve, root, cert_body(curve, subject, subject_vk), rng))


def cert_verify(curve: Curve, root_vk: Point, cert: Certificate,
                subject: Optional[str] = None) -> bool:
    if subject is not None and cert.subject != subject:
        return False
    return sig_verify(curve, root_vk, cert.signed_bytes(curve), cert.issuer_sig)
