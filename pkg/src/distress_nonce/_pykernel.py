"""Pure-Python field/curve kernel for any prime q = 3 (mod 4).

Mirrors the compiled kernel operation for operation (Jacobian coordinates,
left-to-right double-and-add) so the two can be cross-checked directly.
Points are ``(x, y)`` tuples; ``None`` is the point at infinity.
"""


class PyKernel:
    name = "python"

    def __init__(self, q, a, b):
        self.q = q
        self.a = a % q
        self.b = b % q
        self._sqrt_exp = (q + 1) // 4
        self._euler_exp = (q - 1) // 2

    def mul(self, x, y):
        return x * y % self.q

    def pow(self, x, e):
        return pow(x, e, self.q)

    def inv(self, x):
        if x % self.q == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.q)

    def is_square(self, v):
        return v % self.q == 0 or pow(v, self._euler_exp, self.q) == 1

    def sqrt(self, v):
        q = self.q
        r = pow(v, self._sqrt_exp, q)
        if r * r % q != v % q:
            return None
        return min(r, q - r) if r else 0

    def rhs(self, x):
        return ((x * x + self.a) * x + self.b) % self.q

    def x_on_curve(self, x):
        return self.is_square(self.rhs(x))

    def decompress(self, x, sign):
        r = self.sqrt(self.rhs(x))
        if r is None:
            return None
        return (x, self.q - r if sign and r else r)

    def _double(self, X, Y, Z):
        q = self.q
        if Z == 0 or Y == 0:
            return 1, 1, 0
        XX = X * X % q
        YY = Y * Y % q
        YYYY = YY * YY % q
        ZZ = Z * Z % q
        S = 4 * X * YY % q
        M = (3 * XX + self.a * ZZ * ZZ) % q
        X3 = (M * M - 2 * S) % q
        Y3 = (M * (S - X3) - 8 * YYYY) % q
        Z3 = 2 * Y * Z % q
        return X3, Y3, Z3

    def _add(self, P, R):
        q = self.q
        X1, Y1, Z1 = P
        X2, Y2, Z2 = R
        if Z1 == 0:
            return R
        if Z2 == 0:
            return P
        Z1Z1 = Z1 * Z1 % q
        Z2Z2 = Z2 * Z2 % q
        U1 = X1 * Z2Z2 % q
        U2 = X2 * Z1Z1 % q
        S1 = Y1 * Z2 * Z2Z2 % q
        S2 = Y2 * Z1 * Z1Z1 % q
        H = (U2 - U1) % q
        r = (S2 - S1) % q
        if H == 0:
            return self._double(X1, Y1, Z1) if r == 0 else (1, 1, 0)
        HH = H * H % q
        HHH = H * HH % q
        V = U1 * HH % q
        X3 = (r * r - HHH - 2 * V) % q
        Y3 = (r * (V - X3) - S1 * HHH) % q
        Z3 = Z1 * Z2 * H % q
        return X3, Y3, Z3

    def _affine(self, P):
        X, Y, Z = P
        if Z == 0:
            return None
        q = self.q
        zi = pow(Z, -1, q)
        zi2 = zi * zi % q
        return (X * zi2 % q, Y * zi2 * zi % q)

    def point_add(self, p, r):
        if p is None:
            return r
        if r is None:
            return p
        return self._affine(self._add((p[0], p[1], 1), (r[0], r[1], 1)))

    def scalar_mul(self, k, p):
        if p is None or k == 0:
            return None
        if k < 0:
            k = -k
            p = (p[0], (self.q - p[1]) % self.q)
        base = (p[0], p[1], 1)
        acc = (1, 1, 0)
        for bit in bin(k)[2:]:
            acc = self._double(*acc)
            if bit == "1":
                acc = self._add(acc, base)
        return self._affine(acc)
