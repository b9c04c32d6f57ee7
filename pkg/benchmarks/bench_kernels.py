"""Time the compiled and pure-Python field kernels on the production curve.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

from distress_nonce import meceg, profiles
from distress_nonce.codec import DistressPayload
from distress_nonce.kernel import HAVE_COMPILED
from distress_nonce.rng import Prg


def cases(profile):
    curve, codec = profile.curve, profile.codec
    rng = Prg("bench")
    kp = meceg.keygen(curve, rng)
    k = rng.randbelow(curve.order)
    x = rng.randbits(126)
    wire = codec.encode(DistressPayload(7, 7), kp.pk, rng)
    noise = codec.prg_nonce(rng)
    return {
        "scalar_mul": lambda: curve.scalar_mul(k, curve.gen),
        "x_on_curve": lambda: curve.is_on_curve(x),
        "sqrt": lambda: curve.field.sqrt(curve.rhs(3)),
        "encode": lambda: codec.encode(DistressPayload(7, 7), kp.pk, rng),
        "decode(real)": lambda: codec.decode(wire, kp.sk),
        "decode(prg)": lambda: codec.decode(noise, kp.sk),
    }


def bench(backend, repeat):
    out = {}
    for name, fn in cases(profiles.load("production", backend)).items():
        number, _ = timeit.Timer(fn).autorange()
        best = min(timeit.repeat(fn, number=number, repeat=repeat))
        out[name] = best / number
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if HAVE_COMPILED else [])
    results = {b: bench(b, args.repeat) for b in backends}
    print(f"{'operation':<14}" + "".join(f"{b:>14}" for b in backends) + "   speedup")
    for name in results["python"]:
        row = "".join(f"{results[b][name] * 1e6:>12.1f}us" for b in backends)
        ratio = (results["python"][name] / results["cython"][name]) if HAVE_COMPILED else float("nan")
        print(f"{name:<14}{row}{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
