"""The IndDistress experiment and the ciphertext-structure distinguisher."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from .. import meceg, profiles
from ..codec import DistressPayload, NonceCodec
from ..field_curve import Curve, Point
from ..profiles import Profile
from ..rng import Prg

MIN_TRIALS = 1000


@dataclass
class GameTranscript:
    n: int
    b: int
    nonces: list[bytes]
    x_list: list[bytes] = field(default_factory=list)
    b_guess: Optional[int] = None
    j: Optional[int] = None  # challenger-private: position of the distress nonce


@dataclass(frozen=True)
class AdvantageEstimate:
    n: int
    trials: int
    p_hat_b0: float
    p_hat_b1: float
    advantage: float
    std_err: float


def fixed_payload(codec: NonceCodec) -> DistressPayload:
    """The valid payload every b=1 challenge carries."""
    return DistressPayload(1 % (1 << codec.layout.m_i), 1 % (1 << codec.layout.m_t))


def run_challenger(codec: NonceCodec, n: int, b: int, pk: Point, rng: Prg,
                   x_list: Optional[Sequence[bytes]] = None) -> GameTranscript:
    """Build the n challenge nonces; with b=1 one of them, at a uniform position, is real."""
    if n < 1:
        raise ValueError("n must be at least 1")
    nonces = [codec.prg_nonce(rng) for _ in range(n - b)]
    j = None
    if b:
        j = rng.randbelow(n)
        nonces.insert(j, codec.encode(fixed_payload(codec), pk, rng))
    xs = list(x_list) if x_list is not None else [b""] * n
    return GameTranscript(n, b, nonces, xs, j=j)


def ec_structure(curve: Curve, w: bytes) -> bool:
    """Both x slots are in range and on the curve; false for anything malformed."""
    try:
        return meceg.has_structure(curve, w)
    except ValueError:
        return False


def appendix_b_adversary(curve: Curve, t: GameTranscript, coin: Prg) -> int:
    """Flip a coin if any nonce looks like a ciphertext, otherwise guess 0."""
    if any(ec_structure(curve, w) for w in t.nonces):
        return coin.coin()
    return 0


def analytic_advantage_exact(n: int) -> Fraction:
    if n < 1:
        raise ValueError("n must be at least 1")
    quarter = Fraction(1, 4)
    series = sum(comb(n, i) * (-1) ** (i + 1) * quarter**i for i in range(1, n + 1))
    return abs(Fraction(1, 2) - series / 2)


def analytic_advantage(n: int) -> float:
    return float(analytic_advantage_exact(n))


def closed_form_advantage(n: int) -> float:
    return 0.75**n / 2


def _trial_guess(codec: NonceCodec, curve: Curve, rng: Prg, n: int, b: int) -> int:
    keys = meceg.keygen(curve, rng.spawn("keygen"))
    t = run_challenger(codec, n, b, keys.pk, rng.spawn("challenger"))
    t.b_guess = appendix_b_adversary(curve, t, rng.spawn("adversary"))
    return t.b_guess


def _count_ones(profile_doc: dict, backend: Optional[str], seed: bytes, n: int, b: int,
                start: int, stop: int) -> int:
    profile = profiles.from_dict(profile_doc, backend)
    codec, curve, root = profile.codec, profile.curve, Prg(seed)
    return sum(_trial_guess(codec, curve, root.spawn(n, b, i), n, b) for i in range(start, stop))


def estimate_advantage(profile: Profile, n: int, trials: int, rng: Prg,
                       workers: int = 1) -> AdvantageEstimate:
    """Monte-Carlo advantage of the structure distinguisher, trials/2 games per bit.

    Trial i of bit b draws from the stream ``rng.spawn(n, b, i)``, so results do
    not depend on ``workers`` or on scheduling.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials")
    half = trials // 2
    doc, seed = profiles.to_dict(profile), rng.seed
    chunks = max(1, workers) * 4
    bounds = [(half * k // chunks, half * (k + 1) // chunks) for k in range(chunks)]
    ones = {}
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            for b in (0, 1):
                futs = [pool.submit(_count_ones, doc, profile.backend, seed, n, b, lo, hi) for lo, hi in bounds]
                ones[b] = sum(f.result() for f in futs)
    else:
        codec, curve = profile.codec, profile.curve
        for b in (0, 1):
            ones[b] = sum(_trial_guess(codec, curve, rng.spawn(n, b, i), n, b) for i in range(half))
    p0, p1 = ones[0] / half, ones[1] / half
    se = math.sqrt(p0 * (1 - p0) / half + p1 * (1 - p1) / half)
    return AdvantageEstimate(n, 2 * half, p0, p1, abs(p1 - p0), se)
