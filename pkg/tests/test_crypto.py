import hashlib
import hmac
from dataclasses import replace

import pytest

from distress_nonce import crypto
from distress_nonce.errors import DegenerateShare, InvalidSeed, ParameterError
from distress_nonce.field_curve import Curve, CurveParams
from distress_nonce.rng import Prg


def test_encode_fields_is_length_prefixed():
    assert crypto.encode_fields(b"ab", "c", 0) == (b"\x00\x00\x00\x02ab" b"\x00\x00\x00\x01c"
                                                    b"\x00\x00\x00\x01\x00")
    assert crypto.encode_fields(b"a", b"bc") != crypto.encode_fields(b"ab", b"c")


def test_point_bytes_round_trip(prod):
    c = prod.curve
    p = c.scalar_mul(12345, c.gen)
    raw = crypto.point_to_bytes(c, p)
    assert len(raw) == 17
    assert crypto.point_from_bytes(c, raw) == p


def test_dh_symmetry(toy, prod):
    for prof in (toy, prod):
        c, rng = prof.curve, Prg(f"dh-{prof.name}")
        for _ in range(1000 if prof is toy else 200):
            a, b = crypto.dh_keygen(c, rng), crypto.dh_keygen(c, rng)
            assert crypto.dh_combine(c, a, b.share) == crypto.dh_combine(c, b, a.share)


def test_dh_fixed_exponents(toy, oracle, gen_orbit):
    c = toy.curve
    a = crypto.DhKeyShare(2, oracle.mul(2, c.gen, gen_orbit))
    g3 = oracle.mul(3, c.gen, gen_orbit)
    g6 = c.gen
    for _ in range(5):
        g6 = oracle.add(g6, c.gen)
    assert crypto.dh_combine(c, a, g3) == crypto.point_to_bytes(c, g6)


def test_dh_degenerate(toy):
    c = toy.curve
    mine = crypto.dh_keygen(c, Prg(1))
    with pytest.raises(DegenerateShare):
        crypto.dh_combine(c, mine, None)
    with pytest.raises(DegenerateShare):
        crypto.dh_combine(c, mine, (c.gen[0], (c.gen[1] + 1) % c.q))


def test_kdf_determinism_and_labels():
    seed = b"\x01" * 17
    k1, k2 = crypto.kdf(seed, "alice", 16), crypto.kdf(seed, "alice", 16)
    assert k1 == k2
    assert k1.enc_key != k1.mac_key
    assert crypto.kdf(seed, "bob", 16) != k1
    assert len(crypto.kdf(seed, "x", 32).enc_key) == 32
    with pytest.raises(InvalidSeed):
        crypto.kdf(b"", "alice")


def test_kdf_matches_rfc5869_with_zero_salt():
    seed = bytes(range(20))
    prk = hmac.digest(bytes(32), seed, "sha256")
    okm = hmac.digest(prk, b"alice/mac\x01", "sha256")
    assert crypto.kdf(seed, "alice").mac_key == okm


def test_kdf_avalanche():
    rng = Prg("avalanche")
    total = 0
    for _ in range(1000):
        seed = rng.bytes(32)
        bit = rng.randbelow(256)
        flipped = (int.from_bytes(seed, "big") ^ (1 << bit)).to_bytes(32, "big")
        a = int.from_bytes(crypto.kdf(seed, "alice").mac_key, "big")
        b = int.from_bytes(crypto.kdf(flipped, "alice").mac_key, "big")
        dist = bin(a ^ b).count("1")
        assert dist >= 0.3 * 256
        total += dist
    assert abs(total / 1000 / 256 - 0.5) < 0.02


def test_mac_round_trip_and_tamper():
    rng = Prg("mac")
    key = rng.bytes(32)
    for _ in range(1000):
        msg = rng.bytes(24)
        tag = crypto.mac_sign(key, msg)
        assert crypto.mac_verify(key, msg, tag)
        bit = rng.randbelow(len(msg) * 8)
        bad = (int.from_bytes(msg, "big") ^ (1 << bit)).to_bytes(len(msg), "big")
        assert not crypto.mac_verify(key, bad, tag)


def test_mac_truncation():
    key, msg = b"k" * 32, b"message"
    full = int.from_bytes(hmac.digest(key, msg, "sha256"), "big")
    t63 = crypto.mac_sign(key, msg, 63)
    assert t63 == full >> (256 - 63)
    assert crypto.mac_verify(key, msg, t63, 63)
    assert not crypto.mac_verify(key, msg, t63 ^ 1, 63)
    assert not crypto.mac_verify(key, msg, 1 << 70, 63)
    assert not crypto.mac_verify(key, msg, "junk", 63)
    with pytest.raises(ValueError):
        crypto.mac_sign(key, msg, 257)


def test_symmetric_round_trip():
    rng = Prg("sym")
    key = rng.bytes(16)
    blob = crypto.sym_encrypt(key, b"instruction", rng)
    assert crypto.sym_decrypt(key, blob) == b"instruction"
    assert crypto.sym_encrypt(key, b"instruction", rng) != blob
    with pytest.raises(ValueError):
        crypto.sym_decrypt(key, b"short")


def test_password_hash():
    salt = b"s" * 16
    d = crypto.hash_password("pw", salt)
    assert crypto.check_password("pw", salt, d)
    assert not crypto.check_password("pW", salt, d)
    assert d == hashlib.pbkdf2_hmac("sha256", b"pw", salt, crypto.PBKDF2_ROUNDS)


def test_signatures(toy, prod):
    for prof in (toy, prod):
        c, rng = prof.curve, Prg(f"sig-{prof.name}")
        key, other = crypto.sig_keygen(c, rng), crypto.sig_keygen(c, rng)
        for i in range(50):
            msg = crypto.encode_fields(b"g^b", "B", bytes([i]))
            sig = crypto.sig_sign(c, key, msg, rng)
            assert crypto.sig_verify(c, key.vk, msg, sig)
            assert not crypto.sig_verify(c, key.vk, msg + b"x", sig)
            assert not crypto.sig_verify(c, other.vk, msg, sig)
            assert not crypto.sig_verify(c, key.vk, msg, sig[:-1])
            assert not crypto.sig_verify(c, None, msg, sig)


def test_signature_altered_tuple(prod):
    c, rng = prod.curve, Prg("tuple")
    key = crypto.sig_keygen(c, rng)
    pk1 = crypto.point_to_bytes(c, c.scalar_mul(3, c.gen))
    pk2 = crypto.point_to_bytes(c, c.scalar_mul(4, c.gen))
    sig = crypto.sig_sign(c, key, crypto.encode_fields(b"share", "B", pk1), rng)
    assert not crypto.sig_verify(c, key.vk, crypto.encode_fields(b"share", "B", pk2), sig)


def test_signatures_need_order(toy):
    p = toy.curve_params
    c = Curve(CurveParams(p.q, p.a, p.b, p.gen, None, p.pad_bits, "no-order"))
    with pytest.raises(ParameterError):
        crypto.sig_keygen(c, Prg(0))


def test_certificates(prod):
    c, rng = prod.curve, Prg("cert")
    root, rogue = crypto.sig_keygen(c, rng), crypto.sig_keygen(c, rng)
    subj = crypto.sig_keygen(c, rng)
    cert = crypto.cert_issue(c, root, "shop.example", subj.vk, rng)
    assert crypto.cert_verify(c, root.vk, cert)
    assert crypto.cert_verify(c, root.vk, cert, "shop.example")
    assert not crypto.cert_verify(c, root.vk, cert, "other.example")
    assert not crypto.cert_verify(c, root.vk, replace(cert, subject_vk=rogue.vk))
    assert not crypto.cert_verify(c, root.vk, replace(cert, subject="evil.example"))
    forged = crypto.cert_issue(c, rogue, "shop.example", subj.vk, rng)
    assert not crypto.cert_verify(c, root.vk, forged)
    assert crypto.Certificate.from_dict(c, cert.to_dict(c)) == cert
