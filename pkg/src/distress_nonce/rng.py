"""Seedable cryptographic PRG (ChaCha20 keystream) with derived substreams."""
from __future__ import annotations

import hashlib
import os
from typing import MutableSequence, Union

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

Seed = Union[int, str, bytes]

_CHUNK = 1 << 14


def _seed_bytes(seed: Seed) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, str):
        return seed.encode()
    if isinstance(seed, int):
        return b"int:" + str(seed).encode()
    raise TypeError(f"unsupported seed type {type(seed).__name__}")


class Prg:
    """Deterministic random source; two instances with equal seeds agree forever."""

    def __init__(self, seed: Seed):
        self._seed = _seed_bytes(seed)
        key = hashlib.sha256(b"distress-nonce/prg\x00" + self._seed).digest()
        self._enc = Cipher(algorithms.ChaCha20(key, bytes(16)), mode=None).encryptor()
        self._buf = b""
        self._pos = 0

    @property
    def seed(self) -> bytes:
        return self._seed

    @classmethod
    def from_os(cls) -> "Prg":
        return cls(os.urandom(32))

    def spawn(self, *labels: Seed) -> "Prg":
        """Independent stream derived from this seed and ``labels`` (not from state)."""
        h = hashlib.sha256(self._seed)
        for label in labels:
            part = _seed_bytes(label)
            h.update(len(part).to_bytes(4, "big") + part)
        return Prg(h.digest())

    def bytes(self, n: int) -> bytes:
        if self._pos + n > len(self._buf):
            need = max(_CHUNK, n)
            self._buf = self._buf[self._pos:] + self._enc.update(bytes(need))
            self._pos = 0
        out = self._buf[self._pos:self._pos + n]
        self._pos += n
        return out

    def randbits(self, k: int) -> int:
        if k <= 0:
            return 0
        v = int.from_bytes(self.bytes((k + 7) // 8), "big")
        return v >> (-k % 8)

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        k = n.bit_length()
        while True:
            v = self.randbits(k)
            if v < n:
                return v

    def randrange(self, lo: int, hi: int) -> int:
        return lo + self.randbelow(hi - lo)

    def coin(self) -> int:
        return self.bytes(1)[0] & 1

    def shuffle(self, seq: MutableSequence) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]
