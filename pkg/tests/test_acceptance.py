"""Acceptance criteria 1-8, each printed as one PASS/FAIL line."""
import json
import math
import time

import pytest
from click.testing import CliRunner

from distress_nonce import meceg
from distress_nonce.cli import main
from distress_nonce.codec import DistressPayload
from distress_nonce.field_curve import OpCounter, count_points, hasse_bound
from distress_nonce.harness import game, stats
from distress_nonce.rng import Prg

import guarantees


@pytest.fixture
def verdict(capsys):
    def report(num, title, ok, detail=""):
        with capsys.disabled():
            print(f"\nCRITERION {num} {'PASS' if ok else 'FAIL'}: {title} {detail}".rstrip())
        assert ok, detail
    return report


def test_criterion_1_reversibility(prod, toy, verdict):
    start = time.perf_counter()
    failures = 0
    rng = Prg("acceptance-1")
    kp = meceg.keygen(prod.curve, rng.spawn("keygen"))
    for _ in range(100_000):
        p = DistressPayload(rng.randbits(prod.layout.m_i), rng.randbits(prod.layout.m_t))
        w = prod.codec.encode(p, kp.pk, rng)
        failures += len(w) != 32 or prod.codec.decode(w, kp.sk) != p
    tk = meceg.keygen(toy.curve, rng.spawn("toy"))
    lay = toy.layout
    for i in range(1 << lay.m_i):
        for t in range(1 << lay.m_t):
            p = DistressPayload(i, t)
            failures += toy.codec.decode(toy.codec.encode(p, tk.pk, rng), tk.sk) != p
    elapsed = time.perf_counter() - start
    verdict(1, "reversibility", failures == 0 and elapsed < 120,
            f"failures={failures} time={elapsed:.1f}s")


def test_criterion_2_advantage_curve(prod, verdict):
    start = time.perf_counter()
    rows, ok = [], True
    for n in (1, 2, 4, 8, 16):
        est = game.estimate_advantage(prod, n, 100_000, Prg("acceptance-2"))
        exact = game.analytic_advantage(n)
        z = abs(est.advantage - exact) / est.std_err
        ok &= z <= 3
        rows.append(f"n={n}:{est.advantage:.4f}/{exact:.4f}(z={z:.2f})")
    identity = max(abs(game.analytic_advantage(n) - 0.75**n / 2) for n in range(1, 65))
    elapsed = time.perf_counter() - start
    ok &= identity <= 1e-12 and elapsed < 600
    verdict(2, "advantage curve", ok, f"{' '.join(rows)} identity_err={identity:.1e} "
            f"time={elapsed:.0f}s")


def test_criterion_3_structure_frequency(prod, toy, verdict):
    start = time.perf_counter()
    n = 1_000_000
    frac = stats.on_curve_fraction(toy.curve)
    toy_est = stats.measure_ec_structure_rate(toy.curve, n, Prg("acceptance-3-toy"))
    toy_z = abs(toy_est.rate - frac**2) / stats.binomial_sigma(frac**2, n)
    prod_est = stats.measure_ec_structure_rate(prod.curve, n, Prg("acceptance-3"))
    prod_z = abs(prod_est.rate - 0.25) / stats.binomial_sigma(0.25, n)
    elapsed = time.perf_counter() - start
    verdict(3, "ciphertext-structure frequency",
            toy_z <= 3 and prod_z <= 3 and abs(frac - 0.5) < 1e-3 and elapsed < 120,
            f"toy={toy_est.rate:.5f} vs {frac**2:.5f} (z={toy_z:.2f}) "
            f"production={prod_est.rate:.5f} vs 0.25 (z={prod_z:.2f}) time={elapsed:.0f}s")


def test_criterion_4_false_positive_rate(toy, verdict):
    n = 1_000_000
    assert toy.layout.m_d == 4
    est = stats.measure_false_positive_rate(toy.codec, n, Prg("acceptance-4"))
    model = stats.model_false_positive_rate(toy.layout)
    z = abs(est.rate - model) / stats.binomial_sigma(model, n)
    exact = stats.exact_false_positive_rate(toy.curve, toy.layout)
    verdict(4, "false-positive rate", model == 2**-6 and z <= 3,
            f"rate={est.rate:.6f} model={model:.6f} exact={exact:.6f} z={z:.2f}")


def test_criterion_5_overhead(prod, verdict):
    rng = Prg("acceptance-5")
    kp = meceg.keygen(prod.curve, rng.spawn("keygen"))
    codec, curve = prod.codec, prod.curve
    out_of_range = (curve.q << 129).to_bytes(32, "big")
    mismatches = valid = 0
    for i in range(10_000):
        kind = i % 4
        if kind == 0:
            w = codec.encode(DistressPayload(rng.randbits(32), rng.randbits(63)), kp.pk, rng)
        elif kind == 1:
            w = codec.prg_nonce(rng)
        elif kind == 2:
            w = out_of_range if i % 8 == 2 else rng.bytes(rng.randbelow(40))
        else:
            w = bytearray(codec.encode(DistressPayload(1, 1), kp.pk, rng))
            w[rng.randbelow(32)] ^= 1 << rng.randbelow(8)
            w = bytes(w)
        counter = OpCounter()
        codec.decode(w, kp.sk, counter)
        expected = int(game.ec_structure(curve, w))
        valid += expected
        mismatches += counter.scalar_muls != expected
    verdict(5, "one scalar multiplication per valid decode", mismatches == 0,
            f"inputs=10000 structurally_valid={valid} mismatches={mismatches}")


def test_criterion_6_protocol_guarantees(prod, verdict):
    failed = []
    for name, check in guarantees.CHECKS.items():
        try:
            check(prod)
        except AssertionError as exc:
            failed.append(f"{name}: {exc}")
    verdict(6, "protocol guarantee suite", not failed,
            f"checks={len(guarantees.CHECKS)} failed={failed or 0}")


def test_criterion_7_toy_oracles(toy, oracle, verdict):
    start = time.perf_counter()
    c, f = toy.curve, toy.curve.field
    problems = []
    on = sum(c.is_on_curve(x) for x in range(c.q))
    if abs(on / c.q - 0.5) > 2 / math.sqrt(c.q) + 1 / c.q:
        problems.append("on-curve fraction")
    if abs(count_points(c) - c.q - 1) > hasse_bound(c.q):
        problems.append("hasse")
    for v in range(c.q):
        r = f.sqrt(v) if f.is_square(v) else None
        if (v in oracle.roots) != (r is not None) or (r is not None and r * r % c.q != v):
            problems.append(f"sqrt {v}")
    points = oracle.points()
    if len(points) + 1 != c.params.order_hint:
        problems.append("point count")
    problems += [f"compress {p}" for p in points if c.decompress(c.compress(p)) != p]
    pad = c.pad_bits
    for m in range(1 << (c.bit_len - pad)):
        expected = oracle.embed(m, pad)
        if expected is not None and (c.embed_message(m, pad) != expected
                                     or c.extract_message(expected, pad) != m):
            problems.append(f"embed {m}")
    elapsed = time.perf_counter() - start
    verdict(7, "toy field and group oracles", not problems and elapsed < 300,
            f"points={len(points)} problems={problems[:5] or 0} time={elapsed:.1f}s")


def test_criterion_8_determinism(tmp_path, verdict):
    script = tmp_path / "scenario.json"
    script.write_text(json.dumps({
        "profile": "toy",
        "servers": ["shop.example"],
        "clients": ["crowd"],
        "users": [{"usr": "alice", "pwd": "pw", "sites": ["shop.example"]}],
        "steps": [{"at": 1, "op": "hello", "from": "crowd", "to": "shop.example", "count": 50},
                  {"at": 2, "op": "distress", "user": "alice", "site": "shop.example"}],
    }))
    commands = {
        "game": ["game", "--profile", "toy", "--seed", "8", "--trials", "2000",
                 "--n-sweep", "1,4", "--out", "{out}/game.csv"],
        "fp-rate": ["fp-rate", "--profile", "toy", "--seed", "8", "--trials", "50000",
                    "--out", "{out}/fp.json"],
        "simulate": ["simulate", str(script), "--seed", "8", "--out", "{out}/sim"],
    }
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        out.mkdir()
        for args in commands.values():
            res = CliRunner().invoke(main, [a.format(out=out) for a in args])
            assert res.exit_code == 0, res.output
        runs.append({str(p.relative_to(out)): p.read_bytes()
                     for p in sorted(out.rglob("*")) if p.is_file()})
    differ = [name for name in runs[0] if runs[0][name] != runs[1].get(name)]
    verdict(8, "determinism", not differ and runs[0].keys() == runs[1].keys(),
            f"files={len(runs[0])} differing={differ or 0}")
