# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``abeshare._kernels.reference``.

Same tower, same point formulas, same Miller loop and final exponentiation,
but the base field lives in 4x64-bit Montgomery form (CIOS multiplication)
so the inner loops run on machine words instead of Python ints.  Python
objects only appear at the API boundary; exported names and semantics are
identical to the reference module, and tests/test_kernels.py pins the two
implementations against each other on random inputs.
"""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"


BN_U = 4965661367192848881

FQ = 21888242871839275222246405745257275088696311157297823662689037894645226208583
GROUP_ORDER = 21888242871839275222246405745257275088548364400416034343698204186575808495617

CURVE_B = 3

FQ2_ZERO = (0, 0)
FQ2_ONE = (1, 0)
FQ6_ZERO = (FQ2_ZERO, FQ2_ZERO, FQ2_ZERO)
FQ6_ONE = (FQ2_ONE, FQ2_ZERO, FQ2_ZERO)
FQ12_ONE = (FQ6_ONE, FQ6_ZERO)
FQ12_ZERO = (FQ6_ZERO, FQ6_ZERO)
GT_ONE = FQ12_ONE

G1_GEN = (1, 2, 1)
G1_INF = (0, 1, 0)
G2_GEN = (
    (10857046999023057135944570762232829481370756359578518086990519993285655852781,
     11559732032986387107991004021392285783925812861821192530917403151452391805634),
    (8495653923123431417604973247489272438418190587263600148770280649306958101930,
     4082367875863433681332203403145435568316851327593401208105741076214120093531),
    FQ2_ONE,
)
G2_INF = (FQ2_ZERO, FQ2_ONE, FQ2_ZERO)


def _naf_of(k):
    out = []
    while k > 0:
        if k & 1:
            d = 2 - (k & 3)
            k -= d
        else:
            d = 0
        out.append(d)
        k >>= 1
    return out


ATE_LOOP_NAF = list(reversed(_naf_of(6 * BN_U + 2)))[1:]


# ---------------------------------------------------------------------------
# Fp limbs (little-endian uint64[4], Montgomery form with R = 2^256)
# ---------------------------------------------------------------------------

cdef uint64_t PL[4]
cdef uint64_t NPRIME = 0
cdef uint64_t R2L[4]          # R^2 mod p, plain limbs
cdef uint64_t ONE_M[4]        # 1 in Montgomery form
cdef uint64_t PLAIN_ONE[4]

cdef int _ATE_NAF_LEN = 0
cdef int _ATE_NAF[130]

_MASK64 = (1 << 64) - 1


cdef void _int_to_limbs(object v, uint64_t* out):
    out[0] = <uint64_t>(v & _MASK64)
    out[1] = <uint64_t>((v >> 64) & _MASK64)
    out[2] = <uint64_t>((v >> 128) & _MASK64)
    out[3] = <uint64_t>((v >> 192) & _MASK64)


cdef object _limbs_to_int(const uint64_t* a):
    return ((<object>a[3]) << 192) | ((<object>a[2]) << 128) | ((<object>a[1]) << 64) | (<object>a[0])


cdef inline bint _geq_p(const uint64_t* t):
    if t[3] != PL[3]:
        return t[3] > PL[3]
    if t[2] != PL[2]:
        return t[2] > PL[2]
    if t[1] != PL[1]:
        return t[1] > PL[1]
    return t[0] >= PL[0]


cdef inline void _sub_p(uint64_t* t):
    cdef u128 bw = 0
    cdef u128 cur
    cur = <u128>t[0] - PL[0]
    t[0] = <uint64_t>cur
    bw = (cur >> 64) & 1
    cur = <u128>t[1] - PL[1] - bw
    t[1] = <uint64_t>cur
    bw = (cur >> 64) & 1
    cur = <u128>t[2] - PL[2] - bw
    t[2] = <uint64_t>cur
    bw = (cur >> 64) & 1
    cur = <u128>t[3] - PL[3] - bw
    t[3] = <uint64_t>cur


cdef inline void fq_add_c(uint64_t* out, const uint64_t* a, const uint64_t* b):
    cdef u128 acc = <u128>a[0] + b[0]
    out[0] = <uint64_t>acc
    acc = (acc >> 64) + a[1] + b[1]
    out[1] = <uint64_t>acc
    acc = (acc >> 64) + a[2] + b[2]
    out[2] = <uint64_t>acc
    acc = (acc >> 64) + a[3] + b[3]
    out[3] = <uint64_t>acc
    if _geq_p(out):
        _sub_p(out)


cdef inline void fq_sub_c(uint64_t* out, const uint64_t* a, const uint64_t* b):
    cdef u128 cur
    cdef uint64_t bw
    cur = <u128>a[0] - b[0]
    out[0] = <uint64_t>cur
    bw = <uint64_t>((cur >> 64) & 1)
    cur = <u128>a[1] - b[1] - bw
    out[1] = <uint64_t>cur
    bw = <uint64_t>((cur >> 64) & 1)
    cur = <u128>a[2] - b[2] - bw
    out[2] = <uint64_t>cur
    bw = <uint64_t>((cur >> 64) & 1)
    cur = <u128>a[3] - b[3] - bw
    out[3] = <uint64_t>cur
    bw = <uint64_t>((cur >> 64) & 1)
    if bw:
        cur = <u128>out[0] + PL[0]
        out[0] = <uint64_t>cur
        cur = (cur >> 64) + out[1] + PL[1]
        out[1] = <uint64_t>cur
        cur = (cur >> 64) + out[2] + PL[2]
        out[2] = <uint64_t>cur
        cur = (cur >> 64) + out[3] + PL[3]
        out[3] = <uint64_t>cur


cdef inline bint fq_is_zero_c(const uint64_t* a):
    return a[0] == 0 and a[1] == 0 and a[2] == 0 and a[3] == 0


cdef inline void fq_neg_c(uint64_t* out, const uint64_t* a):
    if fq_is_zero_c(a):
        out[0] = 0; out[1] = 0; out[2] = 0; out[3] = 0
        return
    cdef u128 cur
    cdef uint64_t bw
    cur = <u128>PL[0] - a[0]
    out[0] = <uint64_t>cur
    bw = <uint64_t>((cur >> 64) & 1)
    cur = <u128>PL[1] - a[1] - bw
    out[1] = <uint64_t>cur
    bw = <uint64_t>((cur >> 64) & 1)
    cur = <u128>PL[2] - a[2] - bw
    out[2] = <uint64_t>cur
    bw = <uint64_t>((cur >> 64) & 1)
    cur = <u128>PL[3] - a[3] - bw
    out[3] = <uint64_t>cur


cdef void fq_mul_c(uint64_t* out, const uint64_t* a, const uint64_t* b):
    # CIOS Montgomery multiplication, 4 limbs
    cdef uint64_t t0 = 0, t1 = 0, t2 = 0, t3 = 0, t4 = 0, t5 = 0
    cdef uint64_t ai, m, carry
    cdef u128 cur
    cdef int i
    for i in range(4):
        ai = a[i]
        cur = <u128>ai * b[0] + t0
        t0 = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
        cur = <u128>ai * b[1] + t1 + carry
        t1 = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
        cur = <u128>ai * b[2] + t2 + carry
        t2 = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
        cur = <u128>ai * b[3] + t3 + carry
        t3 = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
        cur = <u128>t4 + carry
        t4 = <uint64_t>cur
        t5 = t5 + <uint64_t>(cur >> 64)

        m = t0 * NPRIME
        cur = <u128>m * PL[0] + t0
        carry = <uint64_t>(cur >> 64)
        cur = <u128>m * PL[1] + t1 + carry
        t0 = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
        cur = <u128>m * PL[2] + t2 + carry
        t1 = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
        cur = <u128>m * PL[3] + t3 + carry
        t2 = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
        cur = <u128>t4 + carry
        t3 = <uint64_t>cur
        carry = <uint64_t>(cur >> 64)
        t4 = t5 + carry
        t5 = 0
    out[0] = t0
    out[1] = t1
    out[2] = t2
    out[3] = t3
    if t4 != 0 or _geq_p(out):
        _sub_p(out)


cdef inline void fq_dbl_c(uint64_t* out, const uint64_t* a):
    fq_add_c(out, a, a)


cdef inline void fq_cpy(uint64_t* out, const uint64_t* a):
    out[0] = a[0]; out[1] = a[1]; out[2] = a[2]; out[3] = a[3]


cdef inline bint fq_eq_c(const uint64_t* a, const uint64_t* b):
    return a[0] == b[0] and a[1] == b[1] and a[2] == b[2] and a[3] == b[3]


cdef void _fq_to_mont(uint64_t* out, object v):
    cdef uint64_t tmp[4]
    _int_to_limbs(v % FQ, tmp)
    fq_mul_c(out, tmp, R2L)


cdef object _fq_from_mont(const uint64_t* a):
    cdef uint64_t tmp[4]
    fq_mul_c(tmp, a, PLAIN_ONE)
    return _limbs_to_int(tmp)


cdef void fq_inv_c(uint64_t* out, const uint64_t* a):
    _fq_to_mont(out, pow(_fq_from_mont(a), -1, FQ))


# ---------------------------------------------------------------------------
# Fp2: uint64[8] = (c0, c1)
# ---------------------------------------------------------------------------

cdef inline void f2_add(uint64_t* out, const uint64_t* a, const uint64_t* b):
    fq_add_c(out, a, b)
    fq_add_c(out + 4, a + 4, b + 4)


cdef inline void f2_sub(uint64_t* out, const uint64_t* a, const uint64_t* b):
    fq_sub_c(out, a, b)
    fq_sub_c(out + 4, a + 4, b + 4)


cdef inline void f2_dbl(uint64_t* out, const uint64_t* a):
    fq_add_c(out, a, a)
    fq_add_c(out + 4, a + 4, a + 4)


cdef inline void f2_neg(uint64_t* out, const uint64_t* a):
    fq_neg_c(out, a)
    fq_neg_c(out + 4, a + 4)


cdef inline void f2_conj(uint64_t* out, const uint64_t* a):
    fq_cpy(out, a)
    fq_neg_c(out + 4, a + 4)


cdef inline void f2_cpy(uint64_t* out, const uint64_t* a):
    memcpy(out, a, 8 * sizeof(uint64_t))


cdef inline bint f2_is_zero(const uint64_t* a):
    return fq_is_zero_c(a) and fq_is_zero_c(a + 4)


cdef inline bint f2_eq(const uint64_t* a, const uint64_t* b):
    return fq_eq_c(a, b) and fq_eq_c(a + 4, b + 4)


cdef void f2_mul(uint64_t* out, const uint64_t* a, const uint64_t* b):
    cdef uint64_t t0[4]
    cdef uint64_t t1[4]
    cdef uint64_t sa[4]
    cdef uint64_t sb[4]
    cdef uint64_t c0[4]
    fq_mul_c(t0, a, b)
    fq_mul_c(t1, a + 4, b + 4)
    fq_add_c(sa, a, a + 4)
    fq_add_c(sb, b, b + 4)
    fq_sub_c(c0, t0, t1)
    fq_mul_c(sa, sa, sb)
    fq_sub_c(sa, sa, t0)
    fq_sub_c(out + 4, sa, t1)
    fq_cpy(out, c0)


cdef void f2_sqr(uint64_t* out, const uint64_t* a):
    cdef uint64_t s[4]
    cdef uint64_t d[4]
    cdef uint64_t m[4]
    fq_add_c(s, a, a + 4)
    fq_sub_c(d, a, a + 4)
    fq_mul_c(m, a, a + 4)
    fq_mul_c(out, s, d)
    fq_add_c(out + 4, m, m)


cdef inline void f2_mul_fq(uint64_t* out, const uint64_t* a, const uint64_t* k):
    fq_mul_c(out, a, k)
    fq_mul_c(out + 4, a + 4, k)


cdef void f2_mul_xi(uint64_t* out, const uint64_t* a):
    # (9*c0 - c1, c0 + 9*c1)
    cdef uint64_t n0[4]
    cdef uint64_t n1[4]
    cdef uint64_t t[4]
    fq_dbl_c(t, a)
    fq_dbl_c(t, t)
    fq_dbl_c(t, t)
    fq_add_c(n0, t, a)           # 9*c0
    fq_dbl_c(t, a + 4)
    fq_dbl_c(t, t)
    fq_dbl_c(t, t)
    fq_add_c(n1, t, a + 4)       # 9*c1
    fq_sub_c(n0, n0, a + 4)
    fq_add_c(out + 4, n1, a)
    fq_cpy(out, n0)


cdef void f2_inv(uint64_t* out, const uint64_t* a):
    cdef uint64_t t0[4]
    cdef uint64_t t1[4]
    fq_mul_c(t0, a, a)
    fq_mul_c(t1, a + 4, a + 4)
    fq_add_c(t0, t0, t1)
    fq_inv_c(t0, t0)
    fq_mul_c(out, a, t0)
    fq_mul_c(t1, a + 4, t0)
    fq_neg_c(out + 4, t1)


cdef void f2_exp_limbs(uint64_t* out, const uint64_t* a, const uint64_t* k, int nbits):
    cdef uint64_t acc[8]
    cdef uint64_t base[8]
    cdef int i
    f2_cpy(base, a)
    memset(acc, 0, 8 * sizeof(uint64_t))
    fq_cpy(acc, ONE_M)
    for i in range(nbits - 1, -1, -1):
        f2_sqr(acc, acc)
        if (k[i >> 6] >> (i & 63)) & 1:
            f2_mul(acc, acc, base)
    f2_cpy(out, acc)


# Frobenius / twist constants (Montgomery), filled in at init
cdef uint64_t FROB1C[5 * 8]
cdef uint64_t FROB2C[5 * 8]
cdef uint64_t TWISTB_C[8]


# ---------------------------------------------------------------------------
# Fp6: uint64[24]
# ---------------------------------------------------------------------------

cdef inline void f6_add(uint64_t* out, const uint64_t* a, const uint64_t* b):
    f2_add(out, a, b)
    f2_add(out + 8, a + 8, b + 8)
    f2_add(out + 16, a + 16, b + 16)


cdef inline void f6_sub(uint64_t* out, const uint64_t* a, const uint64_t* b):
    f2_sub(out, a, b)
    f2_sub(out + 8, a + 8, b + 8)
    f2_sub(out + 16, a + 16, b + 16)


cdef inline void f6_neg(uint64_t* out, const uint64_t* a):
    f2_neg(out, a)
    f2_neg(out + 8, a + 8)
    f2_neg(out + 16, a + 16)


cdef inline void f6_cpy(uint64_t* out, const uint64_t* a):
    memcpy(out, a, 24 * sizeof(uint64_t))


cdef void f6_mul(uint64_t* out, const uint64_t* a, const uint64_t* b):
    cdef uint64_t v0[8]
    cdef uint64_t v1[8]
    cdef uint64_t v2[8]
    cdef uint64_t t0[8]
    cdef uint64_t t1[8]
    cdef uint64_t c0[8]
    cdef uint64_t c1[8]
    cdef uint64_t c2[8]
    f2_mul(v0, a, b)
    f2_mul(v1, a + 8, b + 8)
    f2_mul(v2, a + 16, b + 16)

    f2_add(t0, a + 8, a + 16)
    f2_add(t1, b + 8, b + 16)
    f2_mul(t0, t0, t1)
    f2_sub(t0, t0, v1)
    f2_sub(t0, t0, v2)
    f2_mul_xi(t0, t0)
    f2_add(c0, v0, t0)

    f2_add(t0, a, a + 8)
    f2_add(t1, b, b + 8)
    f2_mul(t0, t0, t1)
    f2_sub(t0, t0, v0)
    f2_sub(t0, t0, v1)
    f2_mul_xi(t1, v2)
    f2_add(c1, t0, t1)

    f2_add(t0, a, a + 16)
    f2_add(t1, b, b + 16)
    f2_mul(t0, t0, t1)
    f2_sub(t0, t0, v0)
    f2_sub(t0, t0, v2)
    f2_add(c2, t0, v1)

    f2_cpy(out, c0)
    f2_cpy(out + 8, c1)
    f2_cpy(out + 16, c2)


cdef void f6_sqr(uint64_t* out, const uint64_t* a):
    cdef uint64_t s0[8]
    cdef uint64_t s1[8]
    cdef uint64_t s2[8]
    cdef uint64_t s3[8]
    cdef uint64_t s4[8]
    cdef uint64_t t[8]
    f2_sqr(s0, a)
    f2_mul(s1, a, a + 8)
    f2_dbl(s1, s1)
    f2_sub(t, a, a + 8)
    f2_add(t, t, a + 16)
    f2_sqr(s2, t)
    f2_mul(s3, a + 8, a + 16)
    f2_dbl(s3, s3)
    f2_sqr(s4, a + 16)

    f2_mul_xi(t, s3)
    f2_add(out, s0, t)
    f2_mul_xi(t, s4)
    cdef uint64_t c1[8]
    f2_add(c1, s1, t)
    f2_add(t, s1, s2)
    f2_add(t, t, s3)
    f2_sub(t, t, s0)
    f2_sub(t, t, s4)
    f2_cpy(out + 8, c1)
    f2_cpy(out + 16, t)


cdef inline void f6_mul_v(uint64_t* out, const uint64_t* a):
    cdef uint64_t t[8]
    f2_mul_xi(t, a + 16)
    f2_cpy(out + 16, a + 8)
    f2_cpy(out + 8, a)
    f2_cpy(out, t)


cdef inline void f6_mul_f2(uint64_t* out, const uint64_t* a, const uint64_t* k):
    f2_mul(out, a, k)
    f2_mul(out + 8, a + 8, k)
    f2_mul(out + 16, a + 16, k)


cdef void f6_mul_sparse2(uint64_t* out, const uint64_t* a, const uint64_t* s0, const uint64_t* s1):
    # multiply by s0 + s1*v
    cdef uint64_t t0[8]
    cdef uint64_t t1[8]
    cdef uint64_t c0[8]
    cdef uint64_t c1[8]
    cdef uint64_t c2[8]
    f2_mul(t0, a, s0)
    f2_mul(t1, a + 16, s1)
    f2_mul_xi(t1, t1)
    f2_add(c0, t0, t1)
    f2_mul(t0, a, s1)
    f2_mul(t1, a + 8, s0)
    f2_add(c1, t0, t1)
    f2_mul(t0, a + 8, s1)
    f2_mul(t1, a + 16, s0)
    f2_add(c2, t0, t1)
    f2_cpy(out, c0)
    f2_cpy(out + 8, c1)
    f2_cpy(out + 16, c2)


cdef void f6_inv(uint64_t* out, const uint64_t* a):
    cdef uint64_t c0[8]
    cdef uint64_t c1[8]
    cdef uint64_t c2[8]
    cdef uint64_t t0[8]
    cdef uint64_t t1[8]
    f2_sqr(t0, a)
    f2_mul(t1, a + 8, a + 16)
    f2_mul_xi(t1, t1)
    f2_sub(c0, t0, t1)
    f2_sqr(t0, a + 16)
    f2_mul_xi(t0, t0)
    f2_mul(t1, a, a + 8)
    f2_sub(c1, t0, t1)
    f2_sqr(t0, a + 8)
    f2_mul(t1, a, a + 16)
    f2_sub(c2, t0, t1)

    f2_mul(t0, a + 16, c1)
    f2_mul(t1, a + 8, c2)
    f2_add(t0, t0, t1)
    f2_mul_xi(t0, t0)
    f2_mul(t1, a, c0)
    f2_add(t0, t0, t1)
    f2_inv(t0, t0)
    f2_mul(out, c0, t0)
    f2_mul(out + 8, c1, t0)
    f2_mul(out + 16, c2, t0)


# ---------------------------------------------------------------------------
# Fp12: uint64[48]
# ---------------------------------------------------------------------------

cdef inline void f12_cpy(uint64_t* out, const uint64_t* a):
    memcpy(out, a, 48 * sizeof(uint64_t))


cdef void f12_set_one(uint64_t* out):
    memset(out, 0, 48 * sizeof(uint64_t))
    fq_cpy(out, ONE_M)


cdef bint f12_is_one(const uint64_t* a):
    cdef int i
    if not fq_eq_c(a, ONE_M):
        return False
    for i in range(4, 48):
        if a[i] != 0:
            return False
    return True


cdef void f12_mul(uint64_t* out, const uint64_t* a, const uint64_t* b):
    cdef uint64_t v0[24]
    cdef uint64_t v1[24]
    cdef uint64_t t0[24]
    cdef uint64_t t1[24]
    f6_mul(v0, a, b)
    f6_mul(v1, a + 24, b + 24)
    f6_add(t0, a, a + 24)
    f6_add(t1, b, b + 24)
    f6_mul(t0, t0, t1)
    f6_sub(t0, t0, v0)
    f6_sub(t0, t0, v1)
    f6_mul_v(t1, v1)
    f6_add(out, v0, t1)
    f6_cpy(out + 24, t0)


cdef void f12_sqr(uint64_t* out, const uint64_t* a):
    cdef uint64_t v0[24]
    cdef uint64_t t[24]
    cdef uint64_t c0[24]
    f6_mul(v0, a, a + 24)
    f6_mul_v(t, a + 24)
    f6_add(t, t, a)
    f6_add(c0, a, a + 24)
    f6_mul(c0, c0, t)
    f6_sub(c0, c0, v0)
    f6_mul_v(t, v0)
    f6_sub(c0, c0, t)
    f6_cpy(out, c0)
    f6_add(out + 24, v0, v0)


cdef inline void f12_conj(uint64_t* out, const uint64_t* a):
    f6_cpy(out, a)
    f6_neg(out + 24, a + 24)


cdef void f12_inv(uint64_t* out, const uint64_t* a):
    cdef uint64_t t0[24]
    cdef uint64_t t1[24]
    f6_sqr(t0, a)
    f6_sqr(t1, a + 24)
    f6_mul_v(t1, t1)
    f6_sub(t0, t0, t1)
    f6_inv(t0, t0)
    f6_mul(out, a, t0)
    f6_mul(t1, a + 24, t0)
    f6_neg(out + 24, t1)


cdef void f12_frob(uint64_t* out, const uint64_t* a):
    cdef uint64_t t[8]
    f2_conj(out, a)
    f2_conj(t, a + 8)
    f2_mul(out + 8, t, FROB1C + 1 * 8)
    f2_conj(t, a + 16)
    f2_mul(out + 16, t, FROB1C + 3 * 8)
    f2_conj(t, a + 24)
    f2_mul(out + 24, t, FROB1C + 0 * 8)
    f2_conj(t, a + 32)
    f2_mul(out + 32, t, FROB1C + 2 * 8)
    f2_conj(t, a + 40)
    f2_mul(out + 40, t, FROB1C + 4 * 8)


cdef void f12_frob2(uint64_t* out, const uint64_t* a):
    f2_cpy(out, a)
    f2_mul(out + 8, a + 8, FROB2C + 1 * 8)
    f2_mul(out + 16, a + 16, FROB2C + 3 * 8)
    f2_mul(out + 24, a + 24, FROB2C + 0 * 8)
    f2_mul(out + 32, a + 32, FROB2C + 2 * 8)
    f2_mul(out + 40, a + 40, FROB2C + 4 * 8)


cdef void f12_mul_line(uint64_t* f, const uint64_t* la, const uint64_t* lb, const uint64_t* lc):
    # multiply in place by the sparse line lc + (lb + la*v)*w
    cdef uint64_t t0[24]
    cdef uint64_t t1[24]
    cdef uint64_t t2[24]
    cdef uint64_t s[8]
    f6_mul_f2(t0, f, lc)
    f6_mul_sparse2(t1, f + 24, lb, la)
    f2_add(s, lb, lc)
    f6_add(t2, f, f + 24)
    f6_mul_sparse2(t2, t2, s, la)
    f6_sub(t2, t2, t0)
    f6_sub(t2, t2, t1)
    f6_mul_v(t1, t1)
    f6_add(f, t0, t1)
    f6_cpy(f + 24, t2)


cdef void f12_exp_limbs(uint64_t* out, const uint64_t* a, const uint64_t* k, int nbits):
    cdef uint64_t acc[48]
    cdef uint64_t base[48]
    cdef int i
    f12_cpy(base, a)
    f12_set_one(acc)
    for i in range(nbits - 1, -1, -1):
        f12_sqr(acc, acc)
        if (k[i >> 6] >> (i & 63)) & 1:
            f12_mul(acc, acc, base)
    f12_cpy(out, acc)


cdef uint64_t BN_U_LIMBS[4]


# ---------------------------------------------------------------------------
# Boundary conversions
# ---------------------------------------------------------------------------

cdef void _py_to_f2(object a, uint64_t* out):
    _fq_to_mont(out, a[0])
    _fq_to_mont(out + 4, a[1])


cdef object _f2_to_py(const uint64_t* a):
    return (_fq_from_mont(a), _fq_from_mont(a + 4))


cdef void _py_to_f6(object a, uint64_t* out):
    _py_to_f2(a[0], out)
    _py_to_f2(a[1], out + 8)
    _py_to_f2(a[2], out + 16)


cdef object _f6_to_py(const uint64_t* a):
    return (_f2_to_py(a), _f2_to_py(a + 8), _f2_to_py(a + 16))


cdef void _py_to_f12(object a, uint64_t* out):
    _py_to_f6(a[0], out)
    _py_to_f6(a[1], out + 24)


cdef object _f12_to_py(const uint64_t* a):
    return (_f6_to_py(a), _f6_to_py(a + 24))


# G1 point: uint64[12] Jacobian; infinity <=> z == 0
cdef void _py_to_p1(object a, uint64_t* out):
    _fq_to_mont(out, a[0])
    _fq_to_mont(out + 4, a[1])
    _fq_to_mont(out + 8, a[2])


cdef object _p1_to_py(const uint64_t* a):
    if fq_is_zero_c(a + 8):
        return G1_INF
    return (_fq_from_mont(a), _fq_from_mont(a + 4), _fq_from_mont(a + 8))


# G2 point: uint64[24] Jacobian over Fp2
cdef void _py_to_p2(object a, uint64_t* out):
    _py_to_f2(a[0], out)
    _py_to_f2(a[1], out + 8)
    _py_to_f2(a[2], out + 16)


cdef object _p2_to_py(const uint64_t* a):
    if f2_is_zero(a + 16):
        return G2_INF
    return (_f2_to_py(a), _f2_to_py(a + 8), _f2_to_py(a + 16))


# ---------------------------------------------------------------------------
# G1 point arithmetic
# ---------------------------------------------------------------------------

cdef void p1_dbl(uint64_t* out, const uint64_t* a):
    cdef uint64_t A[4]
    cdef uint64_t B[4]
    cdef uint64_t C[4]
    cdef uint64_t D[4]
    cdef uint64_t E[4]
    cdef uint64_t F[4]
    cdef uint64_t t[4]
    cdef uint64_t x3[4]
    cdef uint64_t y3[4]
    cdef uint64_t z3[4]
    if fq_is_zero_c(a + 8):
        fq_cpy(out, a); fq_cpy(out + 4, a + 4); fq_cpy(out + 8, a + 8)
        return
    fq_mul_c(A, a, a)
    fq_mul_c(B, a + 4, a + 4)
    fq_mul_c(C, B, B)
    fq_add_c(t, a, B)
    fq_mul_c(t, t, t)
    fq_sub_c(t, t, A)
    fq_sub_c(t, t, C)
    fq_dbl_c(D, t)
    fq_dbl_c(E, A)
    fq_add_c(E, E, A)
    fq_mul_c(F, E, E)
    fq_dbl_c(t, D)
    fq_sub_c(x3, F, t)
    fq_dbl_c(t, C)
    fq_dbl_c(t, t)
    fq_dbl_c(t, t)
    fq_sub_c(y3, D, x3)
    fq_mul_c(y3, E, y3)
    fq_sub_c(y3, y3, t)
    fq_mul_c(z3, a + 4, a + 8)
    fq_dbl_c(z3, z3)
    fq_cpy(out, x3)
    fq_cpy(out + 4, y3)
    fq_cpy(out + 8, z3)


cdef void p1_add(uint64_t* out, const uint64_t* a, const uint64_t* b):
    if fq_is_zero_c(a + 8):
        fq_cpy(out, b); fq_cpy(out + 4, b + 4); fq_cpy(out + 8, b + 8)
        return
    if fq_is_zero_c(b + 8):
        fq_cpy(out, a); fq_cpy(out + 4, a + 4); fq_cpy(out + 8, a + 8)
        return
    cdef uint64_t z1z1[4]
    cdef uint64_t z2z2[4]
    cdef uint64_t u1[4]
    cdef uint64_t u2[4]
    cdef uint64_t s1[4]
    cdef uint64_t s2[4]
    cdef uint64_t h[4]
    cdef uint64_t r[4]
    cdef uint64_t i_[4]
    cdef uint64_t j[4]
    cdef uint64_t V[4]
    cdef uint64_t t[4]
    cdef uint64_t x3[4]
    cdef uint64_t y3[4]
    cdef uint64_t z3[4]
    fq_mul_c(z1z1, a + 8, a + 8)
    fq_mul_c(z2z2, b + 8, b + 8)
    fq_mul_c(u1, a, z2z2)
    fq_mul_c(u2, b, z1z1)
    fq_mul_c(s1, a + 4, b + 8)
    fq_mul_c(s1, s1, z2z2)
    fq_mul_c(s2, b + 4, a + 8)
    fq_mul_c(s2, s2, z1z1)
    fq_sub_c(h, u2, u1)
    fq_sub_c(r, s2, s1)
    if fq_is_zero_c(h):
        if fq_is_zero_c(r):
            p1_dbl(out, a)
            return
        memset(out, 0, 12 * sizeof(uint64_t))
        return
    fq_dbl_c(r, r)
    fq_mul_c(i_, h, h)
    fq_dbl_c(i_, i_)
    fq_dbl_c(i_, i_)
    fq_mul_c(j, h, i_)
    fq_mul_c(V, u1, i_)
    fq_mul_c(x3, r, r)
    fq_sub_c(x3, x3, j)
    fq_dbl_c(t, V)
    fq_sub_c(x3, x3, t)
    fq_sub_c(y3, V, x3)
    fq_mul_c(y3, r, y3)
    fq_mul_c(t, s1, j)
    fq_dbl_c(t, t)
    fq_sub_c(y3, y3, t)
    fq_add_c(z3, a + 8, b + 8)
    fq_mul_c(z3, z3, z3)
    fq_sub_c(z3, z3, z1z1)
    fq_sub_c(z3, z3, z2z2)
    fq_mul_c(z3, z3, h)
    fq_cpy(out, x3)
    fq_cpy(out + 4, y3)
    fq_cpy(out + 8, z3)


cdef void p1_mul_limbs(uint64_t* out, const uint64_t* a, const uint64_t* k, int nbits):
    cdef uint64_t acc[12]
    cdef int i
    memset(acc, 0, 12 * sizeof(uint64_t))
    for i in range(nbits - 1, -1, -1):
        p1_dbl(acc, acc)
        if (k[i >> 6] >> (i & 63)) & 1:
            p1_add(acc, acc, a)
    memcpy(out, acc, 12 * sizeof(uint64_t))


# ---------------------------------------------------------------------------
# G2 point arithmetic
# ---------------------------------------------------------------------------

cdef void p2_dbl(uint64_t* out, const uint64_t* a):
    cdef uint64_t A[8]
    cdef uint64_t B[8]
    cdef uint64_t C[8]
    cdef uint64_t D[8]
    cdef uint64_t E[8]
    cdef uint64_t F[8]
    cdef uint64_t t[8]
    cdef uint64_t x3[8]
    cdef uint64_t y3[8]
    cdef uint64_t z3[8]
    if f2_is_zero(a + 16):
        memcpy(out, a, 24 * sizeof(uint64_t))
        return
    f2_sqr(A, a)
    f2_sqr(B, a + 8)
    f2_sqr(C, B)
    f2_add(t, a, B)
    f2_sqr(t, t)
    f2_sub(t, t, A)
    f2_sub(t, t, C)
    f2_dbl(D, t)
    f2_dbl(E, A)
    f2_add(E, E, A)
    f2_sqr(F, E)
    f2_dbl(t, D)
    f2_sub(x3, F, t)
    f2_dbl(t, C)
    f2_dbl(t, t)
    f2_dbl(t, t)
    f2_sub(y3, D, x3)
    f2_mul(y3, E, y3)
    f2_sub(y3, y3, t)
    f2_mul(z3, a + 8, a + 16)
    f2_dbl(z3, z3)
    f2_cpy(out, x3)
    f2_cpy(out + 8, y3)
    f2_cpy(out + 16, z3)


cdef void p2_add(uint64_t* out, const uint64_t* a, const uint64_t* b):
    if f2_is_zero(a + 16):
        memcpy(out, b, 24 * sizeof(uint64_t))
        return
    if f2_is_zero(b + 16):
        memcpy(out, a, 24 * sizeof(uint64_t))
        return
    cdef uint64_t z1z1[8]
    cdef uint64_t z2z2[8]
    cdef uint64_t u1[8]
    cdef uint64_t u2[8]
    cdef uint64_t s1[8]
    cdef uint64_t s2[8]
    cdef uint64_t h[8]
    cdef uint64_t r[8]
    cdef uint64_t i_[8]
    cdef uint64_t j[8]
    cdef uint64_t V[8]
    cdef uint64_t t[8]
    cdef uint64_t x3[8]
    cdef uint64_t y3[8]
    cdef uint64_t z3[8]
    f2_sqr(z1z1, a + 16)
    f2_sqr(z2z2, b + 16)
    f2_mul(u1, a, z2z2)
    f2_mul(u2, b, z1z1)
    f2_mul(s1, a + 8, b + 16)
    f2_mul(s1, s1, z2z2)
    f2_mul(s2, b + 8, a + 16)
    f2_mul(s2, s2, z1z1)
    f2_sub(h, u2, u1)
    f2_sub(r, s2, s1)
    if f2_is_zero(h):
        if f2_is_zero(r):
            p2_dbl(out, a)
            return
        memset(out, 0, 24 * sizeof(uint64_t))
        return
    f2_dbl(r, r)
    f2_sqr(i_, h)
    f2_dbl(i_, i_)
    f2_dbl(i_, i_)
    f2_mul(j, h, i_)
    f2_mul(V, u1, i_)
    f2_sqr(x3, r)
    f2_sub(x3, x3, j)
    f2_dbl(t, V)
    f2_sub(x3, x3, t)
    f2_sub(y3, V, x3)
    f2_mul(y3, r, y3)
    f2_mul(t, s1, j)
    f2_dbl(t, t)
    f2_sub(y3, y3, t)
    f2_add(z3, a + 16, b + 16)
    f2_sqr(z3, z3)
    f2_sub(z3, z3, z1z1)
    f2_sub(z3, z3, z2z2)
    f2_mul(z3, z3, h)
    f2_cpy(out, x3)
    f2_cpy(out + 8, y3)
    f2_cpy(out + 16, z3)


cdef void p2_mul_limbs(uint64_t* out, const uint64_t* a, const uint64_t* k, int nbits):
    cdef uint64_t acc[24]
    cdef int i
    memset(acc, 0, 24 * sizeof(uint64_t))
    for i in range(nbits - 1, -1, -1):
        p2_dbl(acc, acc)
        if (k[i >> 6] >> (i & 63)) & 1:
            p2_add(acc, acc, a)
    memcpy(out, acc, 24 * sizeof(uint64_t))


cdef void p2_to_affine_c(uint64_t* out_xy, const uint64_t* a):
    # caller guarantees a is not infinity; writes x,y (16 limbs)
    cdef uint64_t zi[8]
    cdef uint64_t zi2[8]
    f2_inv(zi, a + 16)
    f2_sqr(zi2, zi)
    f2_mul(out_xy, a, zi2)
    f2_mul(zi2, zi2, zi)
    f2_mul(out_xy + 8, a + 8, zi2)


# ---------------------------------------------------------------------------
# Optimal ate pairing
# ---------------------------------------------------------------------------

cdef void _line_dbl_c(uint64_t* la, uint64_t* lb, uint64_t* lc, uint64_t* T,
                      const uint64_t* qx, const uint64_t* qy):
    cdef uint64_t r_t[8]
    cdef uint64_t A[8]
    cdef uint64_t B[8]
    cdef uint64_t C[8]
    cdef uint64_t D[8]
    cdef uint64_t E[8]
    cdef uint64_t F[8]
    cdef uint64_t c8[8]
    cdef uint64_t x3[8]
    cdef uint64_t y3[8]
    cdef uint64_t z3[8]
    cdef uint64_t t[8]
    f2_sqr(r_t, T + 16)
    f2_sqr(A, T)
    f2_sqr(B, T + 8)
    f2_sqr(C, B)
    f2_add(D, T, B)
    f2_sqr(D, D)
    f2_sub(D, D, A)
    f2_sub(D, D, C)
    f2_dbl(D, D)
    f2_dbl(E, A)
    f2_add(E, E, A)
    f2_sqr(F, E)
    f2_dbl(c8, C)
    f2_dbl(c8, c8)
    f2_dbl(c8, c8)
    f2_dbl(t, D)
    f2_sub(x3, F, t)
    f2_sub(y3, D, x3)
    f2_mul(y3, E, y3)
    f2_sub(y3, y3, c8)
    f2_add(z3, T + 8, T + 16)
    f2_sqr(z3, z3)
    f2_sub(z3, z3, B)
    f2_sub(z3, z3, r_t)

    f2_add(la, T, E)
    f2_sqr(la, la)
    f2_sub(la, la, A)
    f2_sub(la, la, F)
    f2_dbl(t, B)
    f2_dbl(t, t)
    f2_sub(la, la, t)

    f2_mul(t, E, r_t)
    f2_dbl(t, t)
    f2_neg(t, t)
    f2_mul_fq(lb, t, qx)

    f2_mul(lc, z3, r_t)
    f2_dbl(lc, lc)
    f2_mul_fq(lc, lc, qy)

    f2_cpy(T, x3)
    f2_cpy(T + 8, y3)
    f2_cpy(T + 16, z3)


cdef void _line_add_c(uint64_t* la, uint64_t* lb, uint64_t* lc, uint64_t* T,
                      const uint64_t* px, const uint64_t* py, const uint64_t* py2,
                      const uint64_t* qx, const uint64_t* qy):
    cdef uint64_t r_t[8]
    cdef uint64_t B[8]
    cdef uint64_t D[8]
    cdef uint64_t H[8]
    cdef uint64_t I[8]
    cdef uint64_t E[8]
    cdef uint64_t J[8]
    cdef uint64_t L1[8]
    cdef uint64_t V[8]
    cdef uint64_t t[8]
    cdef uint64_t t2[8]
    cdef uint64_t x3[8]
    cdef uint64_t y3[8]
    cdef uint64_t z3[8]
    f2_sqr(r_t, T + 16)
    f2_mul(B, px, r_t)
    f2_add(D, py, T + 16)
    f2_sqr(D, D)
    f2_sub(D, D, py2)
    f2_sub(D, D, r_t)
    f2_mul(D, D, r_t)
    f2_sub(H, B, T)
    f2_sqr(I, H)
    f2_dbl(E, I)
    f2_dbl(E, E)
    f2_mul(J, H, E)
    f2_sub(L1, D, T + 8)
    f2_sub(L1, L1, T + 8)
    f2_mul(V, T, E)
    f2_sqr(x3, L1)
    f2_sub(x3, x3, J)
    f2_dbl(t, V)
    f2_sub(x3, x3, t)
    f2_add(z3, T + 16, H)
    f2_sqr(z3, z3)
    f2_sub(z3, z3, r_t)
    f2_sub(z3, z3, I)
    f2_sub(t, V, x3)
    f2_mul(t, t, L1)
    f2_mul(t2, T + 8, J)
    f2_dbl(t2, t2)
    f2_sub(y3, t, t2)

    f2_add(t, py, z3)
    f2_sqr(t, t)
    f2_sub(t, t, py2)
    f2_sqr(t2, z3)
    f2_sub(t, t, t2)
    f2_mul(t2, L1, px)
    f2_dbl(t2, t2)
    f2_sub(la, t2, t)

    f2_mul_fq(lc, z3, qy)
    f2_dbl(lc, lc)

    f2_neg(t, L1)
    f2_mul_fq(lb, t, qx)
    f2_dbl(lb, lb)

    f2_cpy(T, x3)
    f2_cpy(T + 8, y3)
    f2_cpy(T + 16, z3)


# per-pair state stride (limbs): qx 4, qy 4, Qx 8, Qy 8, mQy 8, qy2 8, mqy2 8, T 24
cdef int _PAIR_STRIDE = 72


cdef void _miller_c(uint64_t* f, uint64_t* st, int npairs):
    cdef uint64_t la[8]
    cdef uint64_t lb[8]
    cdef uint64_t lc[8]
    cdef uint64_t q1[24]
    cdef uint64_t q2[24]
    cdef uint64_t py2[8]
    cdef uint64_t* s
    cdef int i, k, digit
    f12_set_one(f)
    for i in range(_ATE_NAF_LEN):
        digit = _ATE_NAF[i]
        f12_sqr(f, f)
        for k in range(npairs):
            s = st + k * _PAIR_STRIDE
            _line_dbl_c(la, lb, lc, s + 48, s, s + 4)
            f12_mul_line(f, la, lb, lc)
            if digit == 1:
                _line_add_c(la, lb, lc, s + 48, s + 8, s + 16, s + 32, s, s + 4)
                f12_mul_line(f, la, lb, lc)
            elif digit == -1:
                _line_add_c(la, lb, lc, s + 48, s + 8, s + 24, s + 40, s, s + 4)
                f12_mul_line(f, la, lb, lc)

    for k in range(npairs):
        s = st + k * _PAIR_STRIDE
        # q1 = pi_p(Q): (conj(x)*xi^((p-1)/3), conj(y)*xi^((p-1)/2))
        f2_conj(q1, s + 8)
        f2_mul(q1, q1, FROB1C + 1 * 8)
        f2_conj(q1 + 8, s + 16)
        f2_mul(q1 + 8, q1 + 8, FROB1C + 2 * 8)
        # q2 = -pi_{p^2}(Q): (x * Re(xi^((p^2-1)/3)), y)
        f2_mul_fq(q2, s + 8, FROB2C + 1 * 8)
        f2_cpy(q2 + 8, s + 16)
        f2_sqr(py2, q1 + 8)
        _line_add_c(la, lb, lc, s + 48, q1, q1 + 8, py2, s, s + 4)
        f12_mul_line(f, la, lb, lc)
        f2_sqr(py2, q2 + 8)
        _line_add_c(la, lb, lc, s + 48, q2, q2 + 8, py2, s, s + 4)
        f12_mul_line(f, la, lb, lc)


cdef void _final_exp_c(uint64_t* out, const uint64_t* f):
    cdef uint64_t t1[48]
    cdef uint64_t t0[48]
    cdef uint64_t tmp[48]
    cdef uint64_t fp1[48]
    cdef uint64_t fp2[48]
    cdef uint64_t fp3[48]
    cdef uint64_t fu1[48]
    cdef uint64_t fu2[48]
    cdef uint64_t fu3[48]
    cdef uint64_t y0[48]
    cdef uint64_t y1[48]
    cdef uint64_t y2[48]
    cdef uint64_t y3[48]
    cdef uint64_t y4[48]
    cdef uint64_t y5[48]
    cdef uint64_t y6[48]
    f12_conj(t1, f)
    f12_inv(tmp, f)
    f12_mul(t1, t1, tmp)
    f12_frob2(tmp, t1)
    f12_mul(t1, t1, tmp)

    f12_frob(fp1, t1)
    f12_frob2(fp2, t1)
    f12_frob(fp3, fp2)
    f12_exp_limbs(fu1, t1, BN_U_LIMBS, 63)
    f12_exp_limbs(fu2, fu1, BN_U_LIMBS, 63)
    f12_exp_limbs(fu3, fu2, BN_U_LIMBS, 63)
    f12_frob(y3, fu1)
    f12_conj(y3, y3)
    f12_frob(tmp, fu2)          # fu2p
    f12_frob(y6, fu3)           # fu3p
    f12_frob2(y2, fu2)
    f12_mul(y0, fp1, fp2)
    f12_mul(y0, y0, fp3)
    f12_conj(y1, t1)
    f12_conj(y5, fu2)
    f12_mul(y4, fu1, tmp)
    f12_conj(y4, y4)
    f12_mul(y6, fu3, y6)
    f12_conj(y6, y6)

    f12_sqr(t0, y6)
    f12_mul(t0, t0, y4)
    f12_mul(t0, t0, y5)
    f12_mul(t1, y3, y5)
    f12_mul(t1, t1, t0)
    f12_mul(t0, t0, y2)
    f12_sqr(t1, t1)
    f12_mul(t1, t1, t0)
    f12_sqr(t1, t1)
    f12_mul(t0, t1, y1)
    f12_mul(t1, t1, y0)
    f12_sqr(t0, t0)
    f12_mul(out, t0, t1)


cdef int _prepare_pairs(object pairs, uint64_t** st_out) except -1:
    # converts [(p, q), ...] into the packed per-pair state; skips infinities
    cdef list live = []
    for pin, qin in pairs:
        if pin[2] == 0 or qin[2] == (0, 0):
            continue
        live.append((pin, qin))
    cdef int n = len(live)
    if n == 0:
        st_out[0] = NULL
        return 0
    cdef uint64_t* st = <uint64_t*>malloc(n * _PAIR_STRIDE * sizeof(uint64_t))
    if st == NULL:
        raise MemoryError()
    cdef uint64_t p1buf[12]
    cdef uint64_t p2buf[24]
    cdef uint64_t zi[4]
    cdef uint64_t zi2[4]
    cdef uint64_t* s
    cdef int k = 0
    for pin, qin in live:
        s = st + k * _PAIR_STRIDE
        # G1 point to affine
        _py_to_p1(pin, p1buf)
        fq_inv_c(zi, p1buf + 8)
        fq_mul_c(zi2, zi, zi)
        fq_mul_c(s, p1buf, zi2)          # qx
        fq_mul_c(zi2, zi2, zi)
        fq_mul_c(s + 4, p1buf + 4, zi2)  # qy
        # G2 point to affine
        _py_to_p2(qin, p2buf)
        p2_to_affine_c(s + 8, p2buf)     # Qx at +8, Qy at +16
        f2_neg(s + 24, s + 16)           # mQy
        f2_sqr(s + 32, s + 16)           # qy2
        f2_sqr(s + 40, s + 24)           # mqy2
        # T = Q (affine as Jacobian)
        f2_cpy(s + 48, s + 8)
        f2_cpy(s + 56, s + 16)
        memset(s + 64, 0, 8 * sizeof(uint64_t))
        fq_cpy(s + 64, ONE_M)
        k += 1
    st_out[0] = st
    return n


# ---------------------------------------------------------------------------
# Public API (mirrors reference.py)
# ---------------------------------------------------------------------------

def fq_inv(a):
    return pow(a, -1, FQ)


def fq_sqrt(a):
    r = pow(a, (FQ + 1) // 4, FQ)
    if r * r % FQ != a % FQ:
        return None
    return r


def scalar_inv(a):
    return pow(a, -1, GROUP_ORDER)


def fq2_add(a, b):
    cdef uint64_t x[8]
    cdef uint64_t y[8]
    _py_to_f2(a, x)
    _py_to_f2(b, y)
    f2_add(x, x, y)
    return _f2_to_py(x)


def fq2_sub(a, b):
    cdef uint64_t x[8]
    cdef uint64_t y[8]
    _py_to_f2(a, x)
    _py_to_f2(b, y)
    f2_sub(x, x, y)
    return _f2_to_py(x)


def fq2_neg(a):
    cdef uint64_t x[8]
    _py_to_f2(a, x)
    f2_neg(x, x)
    return _f2_to_py(x)


def fq2_conj(a):
    cdef uint64_t x[8]
    _py_to_f2(a, x)
    f2_conj(x, x)
    return _f2_to_py(x)


def fq2_mul(a, b):
    cdef uint64_t x[8]
    cdef uint64_t y[8]
    _py_to_f2(a, x)
    _py_to_f2(b, y)
    f2_mul(x, x, y)
    return _f2_to_py(x)


def fq2_mul_scalar(a, k):
    cdef uint64_t x[8]
    cdef uint64_t s[4]
    _py_to_f2(a, x)
    _fq_to_mont(s, k)
    f2_mul_fq(x, x, s)
    return _f2_to_py(x)


def fq2_sqr(a):
    cdef uint64_t x[8]
    _py_to_f2(a, x)
    f2_sqr(x, x)
    return _f2_to_py(x)


def fq2_mul_xi(a):
    cdef uint64_t x[8]
    _py_to_f2(a, x)
    f2_mul_xi(x, x)
    return _f2_to_py(x)


def fq2_inv(a):
    cdef uint64_t x[8]
    _py_to_f2(a, x)
    f2_inv(x, x)
    return _f2_to_py(x)


def fq2_exp(a, k):
    cdef uint64_t x[8]
    cdef uint64_t kl[8]
    if k == 0:
        return FQ2_ONE
    nbits = k.bit_length()
    if nbits > 512:
        raise ValueError("exponent too large")
    _py_to_f2(a, x)
    for i in range(8):
        kl[i] = <uint64_t>((k >> (64 * i)) & _MASK64)
    f2_exp_limbs(x, x, kl, nbits)
    return _f2_to_py(x)


def fq2_sqrt(a):
    if a == FQ2_ZERO:
        return FQ2_ZERO
    a1 = fq2_exp(a, (FQ - 3) // 4)
    alpha = fq2_mul(fq2_sqr(a1), a)
    x0 = fq2_mul(a1, a)
    if alpha == (FQ - 1, 0):
        x = (-x0[1] % FQ, x0[0])
    else:
        b = fq2_exp(fq2_add(FQ2_ONE, alpha), (FQ - 1) // 2)
        x = fq2_mul(b, x0)
    if fq2_sqr(x) != (a[0] % FQ, a[1] % FQ):
        return None
    return x


XI = (9, 1)


def _fq2_exp_py(a, k):
    # used only below at module init, before the C tables exist
    out = FQ2_ONE
    for c in bin(k)[2:]:
        out = _fq2_mul_py(out, out)
        if c == "1":
            out = _fq2_mul_py(out, a)
    return out


def _fq2_mul_py(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = a0 * b0
    t1 = a1 * b1
    return ((t0 - t1) % FQ, ((a0 + a1) * (b0 + b1) - t0 - t1) % FQ)


def _fq2_conj_py(a):
    return (a[0], -a[1] % FQ)


FROB_XI1 = tuple(_fq2_exp_py(XI, k * (FQ - 1) // 6) for k in range(1, 6))
FROB_XI2 = tuple(_fq2_mul_py(x, _fq2_conj_py(x)) for x in FROB_XI1)

_inv_xi_norm = pow((9 * 9 + 1) % FQ, -1, FQ)
TWIST_B = (9 * CURVE_B * _inv_xi_norm % FQ, -CURVE_B * _inv_xi_norm % FQ)


def fq6_add(a, b):
    cdef uint64_t x[24]
    cdef uint64_t y[24]
    _py_to_f6(a, x)
    _py_to_f6(b, y)
    f6_add(x, x, y)
    return _f6_to_py(x)


def fq6_sub(a, b):
    cdef uint64_t x[24]
    cdef uint64_t y[24]
    _py_to_f6(a, x)
    _py_to_f6(b, y)
    f6_sub(x, x, y)
    return _f6_to_py(x)


def fq6_neg(a):
    cdef uint64_t x[24]
    _py_to_f6(a, x)
    f6_neg(x, x)
    return _f6_to_py(x)


def fq6_mul(a, b):
    cdef uint64_t x[24]
    cdef uint64_t y[24]
    _py_to_f6(a, x)
    _py_to_f6(b, y)
    f6_mul(x, x, y)
    return _f6_to_py(x)


def fq6_mul_fq2(a, k):
    cdef uint64_t x[24]
    cdef uint64_t s[8]
    _py_to_f6(a, x)
    _py_to_f2(k, s)
    f6_mul_f2(x, x, s)
    return _f6_to_py(x)


def fq6_mul_sparse2(a, s0, s1):
    cdef uint64_t x[24]
    cdef uint64_t c0[8]
    cdef uint64_t c1[8]
    _py_to_f6(a, x)
    _py_to_f2(s0, c0)
    _py_to_f2(s1, c1)
    f6_mul_sparse2(x, x, c0, c1)
    return _f6_to_py(x)


def fq6_sqr(a):
    cdef uint64_t x[24]
    _py_to_f6(a, x)
    f6_sqr(x, x)
    return _f6_to_py(x)


def fq6_mul_v(a):
    cdef uint64_t x[24]
    _py_to_f6(a, x)
    f6_mul_v(x, x)
    return _f6_to_py(x)


def fq6_inv(a):
    cdef uint64_t x[24]
    _py_to_f6(a, x)
    f6_inv(x, x)
    return _f6_to_py(x)


def fq12_mul(a, b):
    cdef uint64_t x[48]
    cdef uint64_t y[48]
    _py_to_f12(a, x)
    _py_to_f12(b, y)
    f12_mul(x, x, y)
    return _f12_to_py(x)


def fq12_sqr(a):
    cdef uint64_t x[48]
    _py_to_f12(a, x)
    f12_sqr(x, x)
    return _f12_to_py(x)


def fq12_conj(a):
    cdef uint64_t x[48]
    _py_to_f12(a, x)
    f12_conj(x, x)
    return _f12_to_py(x)


def fq12_inv(a):
    cdef uint64_t x[48]
    _py_to_f12(a, x)
    f12_inv(x, x)
    return _f12_to_py(x)


def fq12_exp(a, k):
    cdef uint64_t x[48]
    cdef uint64_t kl[8]
    if k == 0:
        return FQ12_ONE
    nbits = k.bit_length()
    if nbits > 512:
        raise ValueError("exponent too large")
    _py_to_f12(a, x)
    for i in range(8):
        kl[i] = <uint64_t>((k >> (64 * i)) & _MASK64)
    f12_exp_limbs(x, x, kl, nbits)
    return _f12_to_py(x)


def fq12_frobenius(a):
    cdef uint64_t x[48]
    cdef uint64_t y[48]
    _py_to_f12(a, x)
    f12_frob(y, x)
    return _f12_to_py(y)


def fq12_frobenius_p2(a):
    cdef uint64_t x[48]
    cdef uint64_t y[48]
    _py_to_f12(a, x)
    f12_frob2(y, x)
    return _f12_to_py(y)


def fq12_mul_line(f, la, lb, lc):
    cdef uint64_t x[48]
    cdef uint64_t a[8]
    cdef uint64_t b[8]
    cdef uint64_t c[8]
    _py_to_f12(f, x)
    _py_to_f2(la, a)
    _py_to_f2(lb, b)
    _py_to_f2(lc, c)
    f12_mul_line(x, a, b, c)
    return _f12_to_py(x)


# --- G1 ---

def g1_is_inf(a):
    return a[2] == 0


def g1_neg(a):
    return (a[0], -a[1] % FQ, a[2])


def g1_double(a):
    cdef uint64_t x[12]
    _py_to_p1(a, x)
    p1_dbl(x, x)
    return _p1_to_py(x)


def g1_add(a, b):
    cdef uint64_t x[12]
    cdef uint64_t y[12]
    _py_to_p1(a, x)
    _py_to_p1(b, y)
    p1_add(x, x, y)
    return _p1_to_py(x)


def g1_mul(a, k):
    k %= GROUP_ORDER
    if k == 0 or a[2] == 0:
        return G1_INF
    cdef uint64_t x[12]
    cdef uint64_t kl[4]
    _py_to_p1(a, x)
    _int_to_limbs(k, kl)
    p1_mul_limbs(x, x, kl, k.bit_length())
    return _p1_to_py(x)


def g1_to_affine(a):
    if a[2] == 0:
        return None
    zinv = pow(a[2], -1, FQ)
    zinv2 = zinv * zinv % FQ
    return (a[0] * zinv2 % FQ, a[1] * zinv2 % FQ * zinv % FQ)


def g1_from_affine(xy):
    if xy is None:
        return G1_INF
    return (xy[0], xy[1], 1)


def g1_eq(a, b):
    if a[2] == 0 or b[2] == 0:
        return a[2] == 0 and b[2] == 0
    z1z1 = a[2] * a[2] % FQ
    z2z2 = b[2] * b[2] % FQ
    if a[0] * z2z2 % FQ != b[0] * z1z1 % FQ:
        return False
    return a[1] * b[2] * z2z2 % FQ == b[1] * a[2] * z1z1 % FQ


def g1_is_on_curve(a):
    if a[2] == 0:
        return True
    x, y = g1_to_affine(a)
    return (y * y - x * x * x - CURVE_B) % FQ == 0


def g1_multi_exp(points, scalars):
    pairs = [(p, s % GROUP_ORDER) for p, s in zip(points, scalars) if p[2] != 0 and s % GROUP_ORDER != 0]
    cdef int n = len(pairs)
    if n == 0:
        return G1_INF
    cdef uint64_t* pts = <uint64_t*>malloc(n * 12 * sizeof(uint64_t))
    cdef uint64_t* ks = <uint64_t*>malloc(n * 4 * sizeof(uint64_t))
    if pts == NULL or ks == NULL:
        if pts != NULL:
            free(pts)
        if ks != NULL:
            free(ks)
        raise MemoryError()
    cdef int nbits = 0
    cdef int i, j
    cdef uint64_t acc[12]
    try:
        for i, (p, s) in enumerate(pairs):
            _py_to_p1(p, pts + i * 12)
            _int_to_limbs(s, ks + i * 4)
            if s.bit_length() > nbits:
                nbits = s.bit_length()
        memset(acc, 0, 12 * sizeof(uint64_t))
        for j in range(nbits - 1, -1, -1):
            p1_dbl(acc, acc)
            for i in range(n):
                if (ks[i * 4 + (j >> 6)] >> (j & 63)) & 1:
                    p1_add(acc, acc, pts + i * 12)
        return _p1_to_py(acc)
    finally:
        free(pts)
        free(ks)


# --- G2 ---

def g2_is_inf(a):
    return a[2] == FQ2_ZERO


def g2_neg(a):
    return (a[0], (-a[1][0] % FQ, -a[1][1] % FQ), a[2])


def g2_double(a):
    cdef uint64_t x[24]
    _py_to_p2(a, x)
    p2_dbl(x, x)
    return _p2_to_py(x)


def g2_add(a, b):
    cdef uint64_t x[24]
    cdef uint64_t y[24]
    _py_to_p2(a, x)
    _py_to_p2(b, y)
    p2_add(x, x, y)
    return _p2_to_py(x)


def g2_mul(a, k):
    k %= GROUP_ORDER
    if k == 0 or a[2] == FQ2_ZERO:
        return G2_INF
    cdef uint64_t x[24]
    cdef uint64_t kl[4]
    _py_to_p2(a, x)
    _int_to_limbs(k, kl)
    p2_mul_limbs(x, x, kl, k.bit_length())
    return _p2_to_py(x)


def g2_to_affine(a):
    if a[2] == FQ2_ZERO:
        return None
    cdef uint64_t x[24]
    cdef uint64_t xy[16]
    _py_to_p2(a, x)
    p2_to_affine_c(xy, x)
    return (_f2_to_py(xy), _f2_to_py(xy + 8))


def g2_from_affine(xy):
    if xy is None:
        return G2_INF
    return (xy[0], xy[1], FQ2_ONE)


def g2_eq(a, b):
    cdef uint64_t x[24]
    cdef uint64_t y[24]
    if a[2] == FQ2_ZERO or b[2] == FQ2_ZERO:
        return a[2] == FQ2_ZERO and b[2] == FQ2_ZERO
    cdef uint64_t z1z1[8]
    cdef uint64_t z2z2[8]
    cdef uint64_t t0[8]
    cdef uint64_t t1[8]
    _py_to_p2(a, x)
    _py_to_p2(b, y)
    f2_sqr(z1z1, x + 16)
    f2_sqr(z2z2, y + 16)
    f2_mul(t0, x, z2z2)
    f2_mul(t1, y, z1z1)
    if not f2_eq(t0, t1):
        return False
    f2_mul(t0, x + 8, y + 16)
    f2_mul(t0, t0, z2z2)
    f2_mul(t1, y + 8, x + 16)
    f2_mul(t1, t1, z1z1)
    return bool(f2_eq(t0, t1))


def g2_is_on_curve(a):
    if a[2] == FQ2_ZERO:
        return True
    cdef uint64_t x[24]
    cdef uint64_t xy[16]
    cdef uint64_t t0[8]
    cdef uint64_t t1[8]
    _py_to_p2(a, x)
    p2_to_affine_c(xy, x)
    f2_sqr(t0, xy + 8)
    f2_sqr(t1, xy)
    f2_mul(t1, t1, xy)
    f2_sub(t0, t0, t1)
    f2_sub(t0, t0, TWISTB_C)
    return bool(f2_is_zero(t0))


def g2_in_subgroup(a):
    # scalar must NOT be reduced mod r here: the point may have a larger order
    if not g2_is_on_curve(a):
        return False
    if a[2] == FQ2_ZERO:
        return True
    cdef uint64_t x[24]
    cdef uint64_t kl[4]
    _py_to_p2(a, x)
    _int_to_limbs(GROUP_ORDER, kl)
    p2_mul_limbs(x, x, kl, GROUP_ORDER.bit_length())
    return bool(f2_is_zero(x + 16))


# --- pairing ---

def miller_loop(pairs):
    """Shared Miller loop over [(g1_point, g2_point), ...]; no final exp."""
    cdef uint64_t* st = NULL
    cdef uint64_t f[48]
    cdef int n = _prepare_pairs(pairs, &st)
    if n == 0:
        return FQ12_ONE
    try:
        _miller_c(f, st, n)
        return _f12_to_py(f)
    finally:
        free(st)


def final_exp(f):
    """Map a Miller-loop output to the order-r pairing group (Alg. 31, eprint 2010/354)."""
    cdef uint64_t x[48]
    _py_to_f12(f, x)
    _final_exp_c(x, x)
    return _f12_to_py(x)


def pairing(p, q):
    return multi_pairing([(p, q)])


def multi_pairing(pairs):
    cdef uint64_t* st = NULL
    cdef uint64_t f[48]
    cdef int n = _prepare_pairs(pairs, &st)
    if n == 0:
        return FQ12_ONE
    try:
        _miller_c(f, st, n)
        _final_exp_c(f, f)
        return _f12_to_py(f)
    finally:
        free(st)


def pairing_check(pairs):
    """EIP-197 style boolean check: prod e(P_i, Q_i) == 1."""
    cdef uint64_t* st = NULL
    cdef uint64_t f[48]
    cdef int n = _prepare_pairs(pairs, &st)
    if n == 0:
        return True
    try:
        _miller_c(f, st, n)
        _final_exp_c(f, f)
        return bool(f12_is_one(f))
    finally:
        free(st)


# --- GT ---

def gt_mul(a, b):
    return fq12_mul(a, b)


def gt_inv(a):
    return fq12_conj(a)


def gt_exp(a, k):
    k %= GROUP_ORDER
    if k == 0:
        return FQ12_ONE
    return fq12_exp(a, k)


# ---------------------------------------------------------------------------
# Module init: constants, then fixed-base tables
# ---------------------------------------------------------------------------

def _init_constants():
    global NPRIME, _ATE_NAF_LEN
    cdef int i
    _int_to_limbs(FQ, PL)
    _int_to_limbs(pow(2, 512, FQ), R2L)
    _int_to_limbs(1, PLAIN_ONE)
    NPRIME = <uint64_t>((-pow(FQ, -1, 1 << 64)) % (1 << 64))
    _fq_to_mont(ONE_M, 1)
    _int_to_limbs(BN_U, BN_U_LIMBS)
    for i, x in enumerate(FROB_XI1):
        _py_to_f2(x, FROB1C + i * 8)
    for i, x in enumerate(FROB_XI2):
        _py_to_f2(x, FROB2C + i * 8)
    _py_to_f2(TWIST_B, TWISTB_C)
    naf = ATE_LOOP_NAF
    _ATE_NAF_LEN = len(naf)
    for i in range(_ATE_NAF_LEN):
        _ATE_NAF[i] = <int>naf[i]


_init_constants()

_NBITS = GROUP_ORDER.bit_length()

# fixed-base tables: affine 2^i multiples of each generator, Montgomery form
cdef uint64_t G1TBL[254 * 8]
cdef uint64_t G2TBL[254 * 16]
cdef uint64_t GTTBL[254 * 48]


def _build_tables():
    cdef uint64_t cur1[12]
    cdef uint64_t cur2[24]
    cdef uint64_t zi[4]
    cdef uint64_t zi2[4]
    cdef uint64_t acc[48]
    cdef int i
    _py_to_p1(G1_GEN, cur1)
    for i in range(_NBITS):
        fq_inv_c(zi, cur1 + 8)
        fq_mul_c(zi2, zi, zi)
        fq_mul_c(G1TBL + i * 8, cur1, zi2)
        fq_mul_c(zi2, zi2, zi)
        fq_mul_c(G1TBL + i * 8 + 4, cur1 + 4, zi2)
        p1_dbl(cur1, cur1)
    _py_to_p2(G2_GEN, cur2)
    for i in range(_NBITS):
        p2_to_affine_c(G2TBL + i * 16, cur2)
        p2_dbl(cur2, cur2)
    # GT generator table
    gt = multi_pairing([(G1_GEN, G2_GEN)])
    _py_to_f12(gt, acc)
    for i in range(_NBITS):
        f12_cpy(GTTBL + i * 48, acc)
        f12_sqr(acc, acc)
    return gt


GT_GEN = _build_tables()


def g1_gen_exp(k):
    k %= GROUP_ORDER
    cdef uint64_t acc[12]
    cdef uint64_t e[12]
    cdef uint64_t kl[4]
    cdef int i = 0
    memset(acc, 0, 12 * sizeof(uint64_t))
    _int_to_limbs(k, kl)
    cdef int nbits = k.bit_length()
    for i in range(nbits):
        if (kl[i >> 6] >> (i & 63)) & 1:
            f2_cpy(e, G1TBL + i * 8)     # copy affine x,y (8 limbs)
            fq_cpy(e + 8, ONE_M)
            p1_add(acc, acc, e)
    return _p1_to_py(acc)


def g2_gen_exp(k):
    k %= GROUP_ORDER
    cdef uint64_t acc[24]
    cdef uint64_t e[24]
    cdef uint64_t kl[4]
    cdef int i = 0
    memset(acc, 0, 24 * sizeof(uint64_t))
    _int_to_limbs(k, kl)
    cdef int nbits = k.bit_length()
    for i in range(nbits):
        if (kl[i >> 6] >> (i & 63)) & 1:
            memcpy(e, G2TBL + i * 16, 16 * sizeof(uint64_t))
            memset(e + 16, 0, 8 * sizeof(uint64_t))
            fq_cpy(e + 16, ONE_M)
            p2_add(acc, acc, e)
    return _p2_to_py(acc)


def gt_gen_exp(k):
    k %= GROUP_ORDER
    cdef uint64_t acc[48]
    cdef uint64_t kl[4]
    cdef int i = 0
    f12_set_one(acc)
    _int_to_limbs(k, kl)
    cdef int nbits = k.bit_length()
    for i in range(nbits):
        if (kl[i >> 6] >> (i & 63)) & 1:
            f12_mul(acc, acc, GTTBL + i * 48)
    return _f12_to_py(acc)


BACKEND_NAME = "fastcore"
