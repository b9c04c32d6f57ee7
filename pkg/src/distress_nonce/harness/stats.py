"""False-positive and on-curve frequencies, measured and exact."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .. import meceg
from ..codec import BitLayout, NonceCodec
from ..errors import ParameterError
from ..field_curve import Curve, count_points
from ..rng import Prg
from .game import ec_structure

EXHAUSTIVE_LIMIT = 1 << 20


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def zero_count_upper_bound(n: int, alpha: float = 0.05) -> float:
    """Exact one-sided upper confidence bound on p after 0 hits in n trials (about 3/n)."""
    return 1 - alpha ** (1 / n)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


@dataclass(frozen=True)
class RateEstimate:
    trials: int
    hits: int
    rate: float
    low: float
    high: float


def _estimate(hits: int, trials: int, z: float) -> RateEstimate:
    low, high = wilson_interval(hits, trials, z)
    return RateEstimate(trials, hits, hits / trials, low, high)


def model_false_positive_rate(layout: BitLayout) -> float:
    """Marker bits match by chance (2^-m_d) on the quarter of wires that decrypt."""
    return 2.0 ** -(layout.m_d + 2)


def measure_false_positive_rate(codec: NonceCodec, trials: int, rng: Prg,
                                sk: Optional[int] = None, z: float = 1.96) -> RateEstimate:
    """Fraction of PRG nonces that a webserver would decode as distress."""
    if sk is None:
        sk = meceg.keygen(codec.curve, rng.spawn("keygen")).sk
    stream = rng.spawn("nonces")
    hits = sum(codec.decode(codec.prg_nonce(stream), sk) is not None for _ in range(trials))
    return _estimate(hits, trials, z)


def _require_small(curve: Curve) -> None:
    if curve.q > EXHAUSTIVE_LIMIT:
        raise ParameterError("exhaustive counts need a toy-sized field")


def marked_point_count(curve: Curve, layout: BitLayout) -> int:
    """Finite points whose extracted message carries the distress marker."""
    _require_small(curve)
    k = 0
    for x in range(curve.q):
        if layout.unpack(x >> layout.pad_bits) is None:
            continue
        v = curve.rhs(x)
        if v == 0:
            k += 1
        elif curve.field.is_square(v):
            k += 2
    return k


def exact_false_positive_rate(curve: Curve, layout: BitLayout) -> float:
    """Exact decode-as-distress probability of a uniform wire (prime-order curves).

    For a fixed finite c1, m = c2 - sk*c1 runs over every point except
    -sk*c1 as c2 runs over the finite points, so the marked hits total
    K*(#E - 2) over all valid wires, independent of sk.
    """
    _require_small(curve)
    order = count_points(curve)
    if curve.params.order_hint not in (None, order) or not _is_prime(order):
        raise ParameterError("exact model assumes a prime-order curve")
    k = marked_point_count(curve, layout)
    return k * (order - 2) / 2 ** (2 * curve.bit_len + 2)


def _is_prime(n: int) -> bool:
    return n > 1 and all(n % d for d in range(2, math.isqrt(n) + 1))


def on_curve_fraction(curve: Curve) -> float:
    """Share of bit_len-bit x values that are field elements with a curve point."""
    _require_small(curve)
    hits = sum(curve.is_on_curve(x) for x in range(curve.q))
    return hits / 2**curve.bit_len


def measure_ec_structure_rate(curve: Curve, trials: int, rng: Prg,
                              z: float = 1.96) -> RateEstimate:
    """Fraction of uniform wires passing the ciphertext-structure test."""
    nbits = meceg.wire_bits(curve)
    nbytes = meceg.wire_bytes(curve)
    hits = sum(ec_structure(curve, rng.randbits(nbits).to_bytes(nbytes, "big"))
               for _ in range(trials))
    return _estimate(hits, trials, z)
