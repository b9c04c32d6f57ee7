# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled field/curve kernel for Mersenne primes q = 2^k - 1, k <= 127."""

cdef extern from "_mersenne.h":
    ctypedef unsigned long long u64
    ctypedef unsigned long long u128
    ctypedef struct mctx:
        u128 q
        u128 a
        u128 b
        int k
    ctypedef struct jpt:
        u128 X
        u128 Y
        u128 Z
    u128 mk128(u64 hi, u64 lo)
    u64 hi64(u128 v)
    u64 lo64(u128 v)
    u128 m_add(const mctx *c, u128 x, u128 y)
    u128 m_sub(const mctx *c, u128 x, u128 y)
    u128 m_mul(const mctx *c, u128 x, u128 y)
    u128 m_pow(const mctx *c, u128 x, u128 e)
    u128 m_inv(const mctx *c, u128 x)
    int m_is_square(const mctx *c, u128 v)
    int m_sqrt(const mctx *c, u128 v, u128 *out)
    u128 m_rhs(const mctx *c, u128 x)
    int m_decompress(const mctx *c, u128 x, int sign, u128 *y)
    void j_add(const mctx *c, const jpt *p, const jpt *r, jpt *out)
    int j_to_affine(const mctx *c, const jpt *p, u128 *x, u128 *y)
    void j_scalar_mul(const mctx *c, const unsigned char *k, size_t klen,
                      const jpt *p, jpt *out)

DEF MASK64 = 0xFFFFFFFFFFFFFFFF


cdef inline u128 _in(object v):
    return mk128(<u64>(v >> 64), <u64>(v & MASK64))


cdef inline object _out(u128 v):
    return (<object>hi64(v) << 64) | <object>lo64(v)


cdef class MersenneKernel:
    """Same interface as :class:`distress_nonce._pykernel.PyKernel`."""

    cdef mctx ctx
    cdef readonly object q, a, b
    name = "cython"

    def __init__(self, q, a, b):
        k = int(q).bit_length()
        if q != (1 << k) - 1 or k > 127 or k < 2:
            raise ValueError("compiled kernel needs q = 2^k - 1 with 2 <= k <= 127")
        self.q, self.a, self.b = q, a % q, b % q
        self.ctx.k = k
        self.ctx.q = _in(q)
        self.ctx.a = _in(self.a)
        self.ctx.b = _in(self.b)

    cpdef object mul(self, x, y):
        return _out(m_mul(&self.ctx, _in(x), _in(y)))

    cpdef object pow(self, x, e):
        if e < 0:
            return self.pow(self.inv(x), -e)
        if e >> 128:
            e = e % (self.q - 1) if x % self.q else e
        return _out(m_pow(&self.ctx, _in(x), _in(e)))

    cpdef object inv(self, x):
        if x % self.q == 0:
            raise ZeroDivisionError("inverse of zero")
        return _out(m_inv(&self.ctx, _in(x)))

    cpdef bint is_square(self, v):
        return m_is_square(&self.ctx, _in(v))

    cpdef object sqrt(self, v):
        cdef u128 r
        if not m_sqrt(&self.ctx, _in(v), &r):
            return None
        return _out(r)

    cpdef object rhs(self, x):
        return _out(m_rhs(&self.ctx, _in(x)))

    cpdef bint x_on_curve(self, x):
        return m_is_square(&self.ctx, m_rhs(&self.ctx, _in(x)))

    cpdef object decompress(self, x, int sign):
        cdef u128 y
        if not m_decompress(&self.ctx, _in(x), sign, &y):
            return None
        return (x, _out(y))

    cpdef object point_add(self, p, r):
        cdef jpt jp, jr, jo
        cdef u128 x, y
        if p is None:
            return r
        if r is None:
            return p
        jp.X = _in(p[0]); jp.Y = _in(p[1]); jp.Z = 1
        jr.X = _in(r[0]); jr.Y = _in(r[1]); jr.Z = 1
        j_add(&self.ctx, &jp, &jr, &jo)
        if not j_to_affine(&self.ctx, &jo, &x, &y):
            return None
        return (_out(x), _out(y))

    cpdef object scalar_mul(self, k, p):
        cdef jpt jp, jo
        cdef u128 x, y
        cdef bytes kb
        if p is None or k == 0:
            return None
        if k < 0:
            k = -k
            p = (p[0], (self.q - p[1]) % self.q)
        kb = k.to_bytes((k.bit_length() + 7) // 8, "big")
        jp.X = _in(p[0]); jp.Y = _in(p[1]); jp.Z = 1
        j_scalar_mul(&self.ctx, kb, len(kb), &jp, &jo)
        if not j_to_affine(&self.ctx, &jo, &x, &y):
            return None
        return (_out(x), _out(y))
