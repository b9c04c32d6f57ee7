import os
import subprocess
import sys

import pytest

from distress_nonce import kernel
from distress_nonce._pykernel import PyKernel
from distress_nonce.rng import Prg

needs_compiled = pytest.mark.skipif(not kernel.HAVE_COMPILED, reason="extension not built")


def test_is_mersenne():
    assert kernel.is_mersenne(8191)
    assert kernel.is_mersenne(2**127 - 1)
    assert not kernel.is_mersenne(8193)
    assert kernel.make_kernel(2**521 - 1, 1, 1).name == "python"  # wider than the C kernel


def test_pure_backend_for_generic_q():
    assert kernel.make_kernel(10007, 1, 1).name == "python"


def test_env_forces_pure_backend():
    code = ("from distress_nonce import profiles;"
            "print(profiles.load('production').curve.backend)")
    env = dict(os.environ, DISTRESS_NONCE_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_compiled_selected_for_mersenne(prod):
    assert prod.curve.backend == "cython"


@needs_compiled
@pytest.mark.parametrize("name", ["toy", "production"])
def test_backends_agree(name, toy, prod):
    prof = {"toy": toy, "production": prod}[name]
    p = prof.curve_params
    fast = kernel.make_kernel(p.q, p.a, p.b, "cython")
    slow = PyKernel(p.q, p.a % p.q, p.b % p.q)
    rng = Prg(f"diff-{name}")
    q, bits = p.q, p.q.bit_length()
    pt = p.gen
    for _ in range(300):
        a, b = rng.randbelow(q), rng.randbelow(q)
        assert fast.mul(a, b) == slow.mul(a, b) == a * b % q
        assert fast.pow(a, b) == slow.pow(a, b) == pow(a, b, q)
        if a:
            assert fast.inv(a) == slow.inv(a)
        assert fast.is_square(a) == slow.is_square(a)
        assert fast.sqrt(a) == slow.sqrt(a)
        assert fast.rhs(a) == slow.rhs(a)
        assert fast.x_on_curve(a) == slow.x_on_curve(a)
        assert fast.decompress(a, b & 1) == slow.decompress(a, b & 1)
        k = rng.randbits(bits + 2)
        r = fast.scalar_mul(k, pt)
        assert r == slow.scalar_mul(k, pt)
        assert fast.point_add(pt, r) == slow.point_add(pt, r)
        assert fast.point_add(pt, pt) == slow.point_add(pt, pt)
        pt = r if r is not None else p.gen


@needs_compiled
def test_compiled_edge_cases(prod):
    p = prod.curve_params
    k = kernel.make_kernel(p.q, p.a, p.b, "cython")
    with pytest.raises(ZeroDivisionError):
        k.inv(0)
    assert k.scalar_mul(0, p.gen) is None
    assert k.scalar_mul(5, None) is None
    assert k.scalar_mul(-1, p.gen) == (p.gen[0], p.q - p.gen[1])
    assert k.point_add(None, None) is None
    assert k.mul(p.q - 1, p.q - 1) == 1
