import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from distress_nonce import meceg
from distress_nonce.codec import BitLayout, DistressPayload, NonceCodec
from distress_nonce.errors import ContractViolation, LayoutViolation
from distress_nonce.field_curve import OpCounter
from distress_nonce.harness import stats
from distress_nonce.rng import Prg

GOLDEN = json.loads((Path(__file__).parent / "golden" / "toy_vectors.json").read_text())


@pytest.fixture(scope="module")
def prod_keys(prod):
    return meceg.keygen(prod.curve, Prg("codec-keys"))


def test_pack_example():
    lay = BitLayout(2, 3, 3, 0)
    assert lay.pack(0b101, 0b011) == 0b11101011 == 235
    assert lay.unpack(235) == DistressPayload(0b101, 0b011)
    assert lay.pack(0, 0) == 0b11 << 6


def test_pack_rejects_oversized_fields():
    lay = BitLayout(2, 3, 3, 0)
    with pytest.raises(LayoutViolation):
        lay.pack(8, 0)
    with pytest.raises(LayoutViolation):
        lay.pack(0, -1)


def test_unpack_needs_full_marker():
    lay = BitLayout(2, 3, 3, 0)
    assert lay.unpack(0b10101011) is None
    assert lay.unpack(0) is None


def test_layout_problems(prod, toy):
    assert prod.layout.problems(127) == []
    assert prod.layout.payload_bits == 119 and prod.layout.bit_len == 127
    assert toy.layout.problems(13, toy=True) == []
    assert BitLayout(4, 50, 65, 8).problems(127)  # m_d too small outside toy
    assert BitLayout(24, 32, 62, 8).problems(127)  # does not fill the field
    with pytest.raises(LayoutViolation):
        NonceCodec(prod.curve, BitLayout(24, 32, 62, 8))


def test_exhaustive_toy_payloads(toy):
    c, codec = toy.curve, toy.codec
    rng = Prg("toy-exhaustive")
    kp = meceg.keygen(c, rng)
    lay = toy.layout
    for i in range(1 << lay.m_i):
        for t in range(1 << lay.m_t):
            p = DistressPayload(i, t)
            assert codec.decode(codec.encode(p, kp.pk, rng), kp.sk) == p


def test_production_round_trip(prod, prod_keys):
    codec, rng = prod.codec, Prg("prod-rt")
    for _ in range(10_000):
        p = DistressPayload(rng.randbits(32), rng.randbits(63))
        w = codec.encode(p, prod_keys.pk, rng)
        assert len(w) == 32
        assert codec.decode(w, prod_keys.sk) == p


@pytest.mark.parametrize("vec", GOLDEN["encode"], ids=lambda v: f"id{v['id']}-tag{v['tag']}")
def test_golden_toy_wire(toy, vec):
    c, codec = toy.curve, toy.codec
    kp = meceg.keygen(c, Prg(0), sk=vec["sk"])
    p = DistressPayload(vec["id"], vec["tag"])
    assert codec.message_point(p) == tuple(vec["m_point"])
    w = codec.encode(p, kp.pk, Prg(0), k=vec["k"])
    assert w.hex() == vec["wire"]
    assert len(w) * 8 >= 28 and int.from_bytes(w, "big") < 1 << 28
    assert codec.decode(w, kp.sk) == p


def test_encodes_differ(prod, prod_keys):
    rng = Prg("differ")
    p = DistressPayload(1, 2)
    assert prod.codec.encode(p, prod_keys.pk, rng) != prod.codec.encode(p, prod_keys.pk, rng)


def test_structured_wire_without_marker(toy):
    c, codec = toy.curve, toy.codec
    rng = Prg("no-marker")
    kp = meceg.keygen(c, rng)
    m = c.embed_message(0b0111000000, 3)  # marker bits 0111, not 1111
    w = meceg.serialize(c, meceg.encrypt(c, kp.pk, m, rng))
    assert meceg.has_structure(c, w)
    assert codec.decode(w, kp.sk) is None


def test_decode_counts(prod, prod_keys):
    codec, c = prod.codec, prod.curve
    rng = Prg("counts")
    good = codec.encode(DistressPayload(1, 1), prod_keys.pk, rng)
    n = OpCounter()
    codec.decode(good, prod_keys.sk, n)
    assert n.scalar_muls == 1
    bad = (c.q << 129).to_bytes(32, "big")
    codec.decode(bad, prod_keys.sk, n)
    codec.decode(b"short", prod_keys.sk, n)
    assert n.scalar_muls == 1


@settings(max_examples=300, deadline=None)
@given(st.binary(min_size=32, max_size=32))
def test_decode_is_total(prod, prod_keys, w):
    r = prod.codec.decode(w, prod_keys.sk)
    assert r is None or isinstance(r, DistressPayload)


@settings(max_examples=300, deadline=None)
@given(st.binary(min_size=0, max_size=40))
def test_decode_total_on_any_length(toy, w):
    assert toy.codec.decode(w, 5) is None or len(w) == 4


def test_prg_nonce_shape(prod, toy):
    rng = Prg("shape")
    assert len(prod.codec.prg_nonce(rng)) == 32
    assert len(toy.codec.prg_nonce(rng)) == 4
    assert all(int.from_bytes(toy.codec.prg_nonce(rng), "big") < 1 << 28 for _ in range(100))


def test_prg_bit_frequencies(prod):
    rng = Prg("bits")
    n = 100_000
    ones = [0] * 256
    for _ in range(n):
        v = int.from_bytes(prod.codec.prg_nonce(rng), "big")
        for i in range(256):
            ones[i] += (v >> i) & 1
    assert all(0.49 <= k / n <= 0.51 for k in ones)


def test_f_n(prod, prod_keys):
    codec, rng = prod.codec, Prg("fn")
    p = DistressPayload(9, 9)
    w = codec.f_n(True, p, prod_keys.pk, rng)
    assert len(w) == 32 and codec.decode(w, prod_keys.sk) == p
    u = codec.f_n(False, None, prod_keys.pk, rng)
    assert len(u) == 32 and codec.decode(u, prod_keys.sk) is None
    with pytest.raises(ContractViolation):
        codec.f_n(True, None, prod_keys.pk, rng)
    with pytest.raises(ContractViolation):
        codec.f_n(False, p, prod_keys.pk, rng)


def test_false_positive_rate_m_d_6(toy):
    prof = toy.with_layout(6, 2, 2)
    exact = stats.exact_false_positive_rate(prof.curve, prof.layout)
    assert abs(exact / 2**-8 - 1) < 0.1
    est = stats.measure_false_positive_rate(prof.codec, 1_000_000, Prg("fp6"))
    assert abs(est.rate - exact) <= 3 * stats.binomial_sigma(exact, est.trials)


def test_false_positive_rate_stress_layout(toy):
    prof = toy.with_layout(1, 4, 5)
    exact = stats.exact_false_positive_rate(prof.curve, prof.layout)
    assert abs(exact / 2**-3 - 1) < 0.05
    est = stats.measure_false_positive_rate(prof.codec, 100_000, Prg("fp1"))
    assert abs(est.rate - exact) <= 3 * stats.binomial_sigma(exact, est.trials)


@pytest.mark.slow
def test_production_false_positives_vanish(prod):
    est = stats.measure_false_positive_rate(prod.codec, 1_000_000, Prg("fp-prod"))
    assert est.hits == 0
    assert stats.zero_count_upper_bound(est.trials) < 3e-6
