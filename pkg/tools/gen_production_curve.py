"""Offline generator for the production curve over GF(2^127 - 1).

Needs PARI (``pip install cypari``) for point counting; the package itself
never imports it. Searches b = SHA-256(label || counter) mod q with a = -3
until the group order is prime, then takes the generator from the smallest
on-curve x.
"""
import hashlib
import json
import sys

from cypari import pari

Q = 2**127 - 1
LABEL = b"distress-nonce/production-curve/v1"


def main():
    pari.allocatemem(2 * 10**9)
    a = Q - 3
    counter = 0
    while True:
        digest = hashlib.sha256(LABEL + counter.to_bytes(4, "big")).digest()
        b = int.from_bytes(digest, "big") % Q
        if (4 * pow(a, 3, Q) + 27 * b * b) % Q:
            order = int(pari(f"ellcard(ellinit([{a},{b}],{Q}))"))
            if pari(f"isprime({order})"):
                break
        counter += 1
    x = 0
    while True:
        rhs = (x**3 + a * x + b) % Q
        if rhs and pow(rhs, (Q - 1) // 2, Q) == 1:
            y = pow(rhs, (Q + 1) // 4, Q)
            y = min(y, Q - y)
            break
        x += 1
    json.dump({"name": "production", "q": str(Q), "a": str(a), "b": str(b),
               "gen_x": str(x), "gen_y": str(y), "order_hint": str(order),
               "pad_bits": 8, "seed_counter": counter},
              sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    main()
