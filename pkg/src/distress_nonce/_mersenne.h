/* Arithmetic over GF(2^k - 1), k <= 127, and short Weierstrass curve
 * operations in Jacobian coordinates. Values are kept fully reduced. */
#ifndef DISTRESS_NONCE_MERSENNE_H
#define DISTRESS_NONCE_MERSENNE_H

#include <stdint.h>
#include <stddef.h>

typedef unsigned __int128 u128;
typedef uint64_t u64;

typedef struct {
    u128 q;
    u128 a;
    u128 b;
    int k;
} mctx;

typedef struct {
    u128 X, Y, Z; /* Z == 0 is the point at infinity */
} jpt;

static inline u128 mk128(u64 hi, u64 lo) { return ((u128)hi << 64) | lo; }
static inline u64 hi64(u128 v) { return (u64)(v >> 64); }
static inline u64 lo64(u128 v) { return (u64)v; }

static inline u128 m_fold(const mctx *c, u128 s)
{
    while (s >> c->k)
        s = (s & c->q) + (s >> c->k);
    return s == c->q ? 0 : s;
}

static inline u128 m_add(const mctx *c, u128 x, u128 y)
{
    u128 s = x + y;
    return s >= c->q ? s - c->q : s;
}

static inline u128 m_sub(const mctx *c, u128 x, u128 y)
{
    return x >= y ? x - y : x + (c->q - y);
}

static inline u128 m_mul(const mctx *c, u128 x, u128 y)
{
    if (c->k <= 63)
        return m_fold(c, x * y);
    u64 x0 = (u64)x, x1 = (u64)(x >> 64), y0 = (u64)y, y1 = (u64)(y >> 64);
    u128 p00 = (u128)x0 * y0, p01 = (u128)x0 * y1;
    u128 p10 = (u128)x1 * y0, p11 = (u128)x1 * y1;
    u128 mid = p01 + p10; /* x1, y1 < 2^63 so no overflow */
    u128 lo = p00 + (mid << 64);
    u128 hi = p11 + (mid >> 64) + (lo < p00);
    u128 s = (lo & c->q) + ((lo >> c->k) | (hi << (128 - c->k)));
    return m_fold(c, s);
}

static inline u128 m_pow(const mctx *c, u128 x, u128 e)
{
    u128 r = 1;
    int i = 127;
    while (i > 0 && !((e >> i) & 1))
        i--;
    for (; i >= 0; i--) {
        r = m_mul(c, r, r);
        if ((e >> i) & 1)
            r = m_mul(c, r, x);
    }
    return r == c->q ? 0 : r;
}

static inline u128 m_inv(const mctx *c, u128 x) { return m_pow(c, x, c->q - 2); }

static inline int m_is_square(const mctx *c, u128 v)
{
    return v == 0 || m_pow(c, v, (c->q - 1) >> 1) == 1;
}

/* Returns 1 and the canonical (smaller) root in *out, or 0 for a non-residue. */
static inline int m_sqrt(const mctx *c, u128 v, u128 *out)
{
    u128 r = m_pow(c, v, (c->q + 1) >> 2);
    if (m_mul(c, r, r) != v)
        return 0;
    u128 other = r ? c->q - r : 0;
    *out = other < r ? other : r;
    return 1;
}

static inline u128 m_rhs(const mctx *c, u128 x)
{
    u128 x2 = m_mul(c, x, x);
    return m_add(c, m_mul(c, m_add(c, x2, c->a), x), c->b);
}

static inline int m_decompress(const mctx *c, u128 x, int sign, u128 *y)
{
    u128 r;
    if (!m_sqrt(c, m_rhs(c, x), &r))
        return 0;
    *y = (sign && r) ? c->q - r : r;
    return 1;
}

static inline void j_double(const mctx *c, const jpt *p, jpt *out)
{
    if (p->Z == 0 || p->Y == 0) {
        out->X = 1; out->Y = 1; out->Z = 0;
        return;
    }
    u128 XX = m_mul(c, p->X, p->X);
    u128 YY = m_mul(c, p->Y, p->Y);
    u128 YYYY = m_mul(c, YY, YY);
    u128 ZZ = m_mul(c, p->Z, p->Z);
    u128 S = m_mul(c, p->X, YY);
    S = m_add(c, S, S);
    S = m_add(c, S, S);
    u128 M = m_add(c, m_add(c, m_add(c, XX, XX), XX), m_mul(c, c->a, m_mul(c, ZZ, ZZ)));
    u128 Y8 = m_add(c, YYYY, YYYY);
    Y8 = m_add(c, Y8, Y8);
    Y8 = m_add(c, Y8, Y8);
    u128 X3 = m_sub(c, m_mul(c, M, M), m_add(c, S, S));
    u128 Y3 = m_sub(c, m_mul(c, M, m_sub(c, S, X3)), Y8);
    u128 Z3 = m_mul(c, m_add(c, p->Y, p->Y), p->Z);
    out->X = X3; out->Y = Y3; out->Z = Z3;
}

static inline void j_add(const mctx *c, const jpt *p, const jpt *r, jpt *out)
{
    if (p->Z == 0) { *out = *r; return; }
    if (r->Z == 0) { *out = *p; return; }
    u128 Z1Z1 = m_mul(c, p->Z, p->Z);
    u128 Z2Z2 = m_mul(c, r->Z, r->Z);
    u128 U1 = m_mul(c, p->X, Z2Z2);
    u128 U2 = m_mul(c, r->X, Z1Z1);
    u128 S1 = m_mul(c, p->Y, m_mul(c, r->Z, Z2Z2));
    u128 S2 = m_mul(c, r->Y, m_mul(c, p->Z, Z1Z1));
    u128 H = m_sub(c, U2, U1);
    u128 R = m_sub(c, S2, S1);
    if (H == 0) {
        if (R == 0) {
            j_double(c, p, out);
        } else {
            out->X = 1; out->Y = 1; out->Z = 0;
        }
        return;
    }
    u128 HH = m_mul(c, H, H);
    u128 HHH = m_mul(c, H, HH);
    u128 V = m_mul(c, U1, HH);
    u128 X3 = m_sub(c, m_sub(c, m_mul(c, R, R), HHH), m_add(c, V, V));
    u128 Y3 = m_sub(c, m_mul(c, R, m_sub(c, V, X3)), m_mul(c, S1, HHH));
    u128 Z3 = m_mul(c, m_mul(c, p->Z, r->Z), H);
    out->X = X3; out->Y = Y3; out->Z = Z3;
}

/* Affine result; returns 0 for the point at infinity. */
static inline int j_to_affine(const mctx *c, const jpt *p, u128 *x, u128 *y)
{
    if (p->Z == 0)
        return 0;
    u128 zi = m_inv(c, p->Z);
    u128 zi2 = m_mul(c, zi, zi);
    *x = m_mul(c, p->X, zi2);
    *y = m_mul(c, p->Y, m_mul(c, zi2, zi));
    return 1;
}

/* Left-to-right double-and-add over a big-endian scalar. */
static inline void j_scalar_mul(const mctx *c, const unsigned char *k, size_t klen,
                                const jpt *p, jpt *out)
{
    jpt acc = {1, 1, 0}, tmp;
    size_t i;
    int bit;
    for (i = 0; i < klen; i++) {
        for (bit = 7; bit >= 0; bit--) {
            j_double(c, &acc, &tmp);
            acc = tmp;
            if ((k[i] >> bit) & 1) {
                j_add(c, &acc, p, &tmp);
                acc = tmp;
            }
        }
    }
    *out = acc;
}

#endif
