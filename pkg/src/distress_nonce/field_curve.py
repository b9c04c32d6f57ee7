"""Prime-field arithmetic and short Weierstrass curves y^2 = x^3 + ax + b.

Field elements are plain ints in ``[0, q)``. Points are ``(x, y)`` tuples
and ``None`` is the point at infinity. Hot operations are delegated to a
kernel (compiled for Mersenne primes, pure Python otherwise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import gmpy2

from .errors import (
    CannotCompressIdentity,
    DivisionByZero,
    EmbeddingFailed,
    InvalidFieldElement,
    InvalidPoint,
    NotASquare,
    NotOnCurve,
    ParameterError,
)
from .kernel import make_kernel

Point = Optional[Tuple[int, int]]
INFINITY: Point = None


class CompressedPoint(NamedTuple):
    x: int
    sign_bit: int


@dataclass
class OpCounter:
    """Caller-owned tally of expensive curve operations."""

    scalar_muls: int = 0


@dataclass(frozen=True)
class FieldParams:
    q: int

    @property
    def bit_len(self) -> int:
        return self.q.bit_length()

    def problems(self) -> list[str]:
        out = []
        if self.q < 3 or not gmpy2.is_prime(self.q, 40):
            out.append("q is not prime")
        if self.q % 4 != 3:
            out.append("q is not 3 mod 4")
        return out


class Field:
    """Arithmetic in GF(q)."""

    def __init__(self, q: int, kernel=None):
        self.params = FieldParams(q)
        self.q = q
        self.bit_len = q.bit_length()
        self.byte_len = (self.bit_len + 7) // 8
        self._k = kernel if kernel is not None else make_kernel(q, 0, 0)

    def element(self, v: int) -> int:
        if not 0 <= v < self.q:
            raise InvalidFieldElement(f"{v} is outside [0, {self.q})")
        return v

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return self._k.mul(a % self.q, b % self.q)

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise DivisionByZero("inverse of zero in GF(q)")
        return self._k.inv(a)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self._k.pow(self.inv(a), -e)
        return self._k.pow(a % self.q, e)

    def arith(self, op: str, a: int, b: int = 0) -> int:
        """Dispatch ``op`` in {add, sub, mul, inv, pow}; ``inv`` ignores ``b``."""
        if op == "inv":
            return self.inv(a)
        try:
            fn = {"add": self.add, "sub": self.sub, "mul": self.mul, "pow": self.pow}[op]
        except KeyError:
            raise ValueError(f"unknown field operation {op!r}") from None
        return fn(a, b)

    def is_square(self, v: int) -> bool:
        return self._k.is_square(v)

    def sqrt(self, v: int) -> int:
        """Canonical (numerically smaller) square root of ``v``."""
        r = self._k.sqrt(v)
        if r is None:
            raise NotASquare(f"{v} is not a quadratic residue mod {self.q}")
        return r

    def to_bytes(self, v: int) -> bytes:
        return self.element(v).to_bytes(self.byte_len, "big")

    def from_bytes(self, data: bytes) -> int:
        if len(data) != self.byte_len:
            raise InvalidFieldElement(f"expected {self.byte_len} bytes, got {len(data)}")
        return self.element(int.from_bytes(data, "big"))


@dataclass(frozen=True)
class CurveParams:
    q: int
    a: int
    b: int
    gen: Tuple[int, int]
    order_hint: Optional[int] = None
    pad_bits: int = 8
    name: str = "custom"

    @property
    def field(self) -> FieldParams:
        return FieldParams(self.q)


class Curve:
    """Group operations on E(GF(q)) plus compression and message embedding."""

    def __init__(self, params: CurveParams, backend: Optional[str] = None):
        self.params = params
        self.q = params.q
        self.a = params.a % params.q
        self.b = params.b % params.q
        self.kernel = make_kernel(self.q, self.a, self.b, backend)
        self.field = Field(self.q, self.kernel)
        self.bit_len = self.field.bit_len
        self.gen: Point = tuple(params.gen)
        self.order = params.order_hint
        self.pad_bits = params.pad_bits

    @property
    def backend(self) -> str:
        return self.kernel.name

    def rhs(self, x: int) -> int:
        return self.kernel.rhs(x)

    def is_on_curve(self, x: int) -> bool:
        """True iff ``x`` is the x-coordinate of some curve point."""
        return self.kernel.x_on_curve(x)

    def contains(self, p: Point) -> bool:
        if p is None:
            return True
        x, y = p
        if not (0 <= x < self.q and 0 <= y < self.q):
            return False
        return y * y % self.q == self.rhs(x)

    def neg(self, p: Point) -> Point:
        if p is None:
            return None
        return (p[0], (self.q - p[1]) % self.q)

    def add(self, p: Point, r: Point) -> Point:
        return self.kernel.point_add(p, r)

    def sub(self, p: Point, r: Point) -> Point:
        return self.kernel.point_add(p, self.neg(r))

    def scalar_mul(self, k: int, p: Point, counter: Optional[OpCounter] = None) -> Point:
        if counter is not None:
            counter.scalar_muls += 1
        return self.kernel.scalar_mul(k, p)

    def compress(self, p: Point) -> CompressedPoint:
        if p is None:
            raise CannotCompressIdentity("the point at infinity has no x-coordinate")
        x, y = p
        return CompressedPoint(x, 0 if y <= self.q - y else 1)

    def decompress(self, c: CompressedPoint) -> Point:
        x = self.field.element(c.x)
        p = self.kernel.decompress(x, c.sign_bit)
        if p is None:
            raise NotOnCurve(f"x = {x} is not on the curve")
        return p

    def embed_message(self, m: int, pad_bits: Optional[int] = None) -> Point:
        """Try-and-increment embedding: x = (m << pad_bits) + t, smallest valid t."""
        pad = self.pad_bits if pad_bits is None else pad_bits
        if pad < 0 or not 0 <= m < 1 << (self.bit_len - pad):
            raise ValueError(f"message {m} does not fit in {self.bit_len - pad} bits")
        base = m << pad
        for t in range(1 << pad):
            x = base + t
            if x >= self.q:
                break
            p = self.kernel.decompress(x, 0)
            if p is not None:
                return p
        raise EmbeddingFailed(f"no curve point for message {m} with {pad} pad bits")

    def extract_message(self, p: Point, pad_bits: Optional[int] = None) -> int:
        if p is None:
            raise InvalidPoint("cannot extract a message from the point at infinity")
        pad = self.pad_bits if pad_bits is None else pad_bits
        return p[0] >> pad

    def problems(self) -> list[str]:
        """Human-readable list of violated parameter invariants (empty if valid)."""
        out = self.params.field.problems()
        q, a, b = self.q, self.a, self.b
        if (4 * a**3 + 27 * b**2) % q == 0:
            out.append("curve is singular (4a^3 + 27b^2 = 0)")
        if not self.contains(self.gen):
            out.append("generator is not on the curve")
        if self.order is not None and not out:
            if self.scalar_mul(self.order, self.gen) is not None:
                out.append("order_hint * gen is not the identity")
        if not 0 <= self.pad_bits < self.bit_len:
            out.append("pad_bits out of range")
        return out

    def validate(self) -> "Curve":
        bad = self.problems()
        if bad:
            raise ParameterError("; ".join(bad))
        return self


def count_points(curve: Curve) -> int:
    """#E(GF(q)) by brute force over x; only for small q."""
    n = 1
    for x in range(curve.q):
        v = curve.rhs(x)
        if v == 0:
            n += 1
        elif curve.field.is_square(v):
            n += 2
    return n


def scan_toy_curve(q: int, accept=None, start: Tuple[int, int] = (1, 1)) -> CurveParams:
    """Deterministically scan (a, b) for a prime-order curve over a small field.

    Candidates are visited in order of increasing a, then b. ``accept`` is an
    optional extra predicate on the candidate :class:`Curve` and its order.
    The generator is the point with the smallest x and canonical y; with a
    prime group order every finite point generates the whole group.
    """
    if q > 1 << 20:
        raise ValueError("toy scan is brute force; q is too large")
    a0, b0 = start
    for a in range(a0, q):
        for b in range(b0 if a == a0 else 1, q):
            if (4 * a**3 + 27 * b**2) % q == 0:
                continue
            probe = Curve(CurveParams(q, a, b, (0, 0)))
            order = count_points(probe)
            if order == q or not gmpy2.is_prime(order):
                continue
            x = next(x for x in range(q) if probe.is_on_curve(x) and probe.rhs(x))
            gen = (x, probe.field.sqrt(probe.rhs(x)))
            params = CurveParams(q, a, b, gen, order, 3, "toy")
            if accept is None or accept(Curve(params), order):
                return params
    raise ParameterError(f"no acceptable curve over GF({q})")


def hasse_bound(q: int) -> float:
    return 2 * math.sqrt(q)
