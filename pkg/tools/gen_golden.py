"""Freeze toy-profile golden vectors computed by the brute-force oracle.

Run from the repo root: python3 tools/gen_golden.py > tests/golden/toy_vectors.json
Only the oracle in tests/oracle.py and the toy parameter file are used.
"""
import hashlib
import hmac
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))
from oracle import ToyOracle  # noqa: E402

P = json.loads((ROOT / "src/distress_nonce/profiles/toy.json").read_text())
Q, A, B = int(P["q"]), int(P["a"]), int(P["b"])
G = (int(P["gen_x"]), int(P["gen_y"]))
PAD, M_D, M_I, M_T = P["pad_bits"], P["m_d"], P["m_i"], P["m_t"]
BIT_LEN = Q.bit_length()


def pack(id_, tag):
    return ((((1 << M_D) - 1) << M_I | id_) << M_T) | tag


def encode(o, orbit, sk, k, id_, tag):
    pk = o.mul(sk, G, orbit)
    m = o.embed(pack(id_, tag), PAD)
    c1 = o.mul(k, G, orbit)
    c2 = o.add(m, o.mul(k, pk, o.orbit(pk)))
    return pk, m, c1, c2, o.wire(c1, c2, BIT_LEN)


def hkdf_mac_key(seed, label, length):
    # RFC 5869 with an all-zero salt, written out by hand
    prk = hmac.digest(bytes(32), seed, "sha256")
    info = f"{label}/mac".encode()
    out, t, i = b"", b"", 1
    while len(out) < length:
        t = hmac.digest(prk, t + info + bytes([i]), "sha256")
        out += t
        i += 1
    return out[:length]


def main():
    o = ToyOracle(Q, A, B)
    orbit = o.orbit(G)
    vectors = []
    for sk, k, id_, tag in [(5, 7, 0, 0), (1234, 77, 5, 3), (8000, 4321, 7, 7), (2, 3, 1, 6)]:
        pk, m, c1, c2, w = encode(o, orbit, sk, k, id_, tag)
        vectors.append({"sk": sk, "k": k, "id": id_, "tag": tag, "pk": list(pk),
                        "m_point": list(m), "c1": list(c1), "c2": list(c2), "wire": w.hex()})
    # distress nonce: tag = leftmost m_t bits of HMAC(k_AC mac key, encode_fields(id, sqn))
    seed, uid, sqn, sk, k = bytes(range(1, 18)), 5, 1000, 1234, 99
    mac_key = hkdf_mac_key(seed, "alice", 16)

    def field(v):
        raw = v.to_bytes(max(1, (v.bit_length() + 7) // 8), "big")
        return len(raw).to_bytes(4, "big") + raw
    full = int.from_bytes(hmac.digest(mac_key, field(uid) + field(sqn), "sha256"), "big")
    tag = full >> (256 - M_T)
    *_, w = encode(o, orbit, sk, k, uid, tag)
    nonce = {"k_ac_seed": seed.hex(), "id": uid, "sqn": sqn, "sk": sk, "k": k,
             "tag": tag, "wire": w.hex()}
    json.dump({"profile": "toy", "order": len(orbit), "encode": vectors,
               "distress_nonce": nonce}, sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    main()
