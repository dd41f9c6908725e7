"""Pure-Python arithmetic kernel for the BN254 ("bn128" / EIP-196) pairing curve.

Everything here is a free function over plain ints and tuples so the module
can be mirrored one-for-one by the compiled kernel in ``fastcore.pyx``:

* scalars and base-field elements are ``int``
* Fp2 elements are pairs ``(c0, c1)`` meaning ``c0 + c1*i`` with ``i^2 = -1``
* Fp6 elements are triples of Fp2 over ``v`` with ``v^3 = xi``, ``xi = 9 + i``
* Fp12 elements are pairs of Fp6 over ``w`` with ``w^2 = v``
* G1 points are Jacobian triples ``(X, Y, Z)`` of ints, ``Z == 0`` at infinity
* G2 points are Jacobian triples of Fp2 on the sextic twist ``y^2 = x^3 + 3/xi``

The optimal-ate Miller loop, line functions and final exponentiation follow
the classic layout of the dclxvi / golang-bn256 lineage (line-coefficient
formulas and Algorithm 31 of eprint 2010/354), instantiated with the
EIP-196/197 parameter set.  ``miller_loop`` accepts a whole list of point
pairs so product-of-pairings checks share one squaring chain and one final
exponentiation.
"""

# BN parameter x, with p = 36x^4 + 36x^3 + 24x^2 + 6x + 1.
BN_U = 4965661367192848881

FQ = 21888242871839275222246405745257275088696311157297823662689037894645226208583
GROUP_ORDER = 21888242871839275222246405745257275088548364400416034343698204186575808495617

CURVE_B = 3

_P = FQ  # local alias, the hot paths spell it out


def _bits_of(k):
    return [int(c) for c in bin(k)[2:]]


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


# NAF digits of 6x+2 for the Miller loop, most significant first, top digit
# consumed by the loop initialisation T = Q.
ATE_LOOP_NAF = list(reversed(_naf_of(6 * BN_U + 2)))[1:]


# ---------------------------------------------------------------------------
# Fp
# ---------------------------------------------------------------------------

def fq_inv(a):
    return pow(a, -1, _P)


def fq_sqrt(a):
    # p = 3 mod 4
    r = pow(a, (_P + 1) // 4, _P)
    if r * r % _P != a % _P:
        return None
    return r


def scalar_inv(a):
    return pow(a, -1, GROUP_ORDER)


# ---------------------------------------------------------------------------
# Fp2 = Fp[i] / (i^2 + 1)
# ---------------------------------------------------------------------------

FQ2_ZERO = (0, 0)
FQ2_ONE = (1, 0)


def fq2_add(a, b):
    return ((a[0] + b[0]) % _P, (a[1] + b[1]) % _P)


def fq2_sub(a, b):
    return ((a[0] - b[0]) % _P, (a[1] - b[1]) % _P)


def fq2_neg(a):
    return (-a[0] % _P, -a[1] % _P)


def fq2_conj(a):
    return (a[0], -a[1] % _P)


def fq2_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = a0 * b0
    t1 = a1 * b1
    return ((t0 - t1) % _P, ((a0 + a1) * (b0 + b1) - t0 - t1) % _P)


def fq2_mul_scalar(a, k):
    return (a[0] * k % _P, a[1] * k % _P)


def fq2_sqr(a):
    a0, a1 = a
    return ((a0 - a1) * (a0 + a1) % _P, 2 * a0 * a1 % _P)


def fq2_mul_xi(a):
    # multiply by xi = 9 + i
    a0, a1 = a
    return ((9 * a0 - a1) % _P, (a0 + 9 * a1) % _P)


def fq2_inv(a):
    a0, a1 = a
    t = fq_inv((a0 * a0 + a1 * a1) % _P)
    return (a0 * t % _P, -a1 * t % _P)


def fq2_exp(a, k):
    result = FQ2_ONE
    for bit in _bits_of(k):
        result = fq2_sqr(result)
        if bit:
            result = fq2_mul(result, a)
    return result


def fq2_sqrt(a):
    # complex method for p = 3 mod 4 (Adj-Rodriguez-Henriquez, alg. 9)
    if a == FQ2_ZERO:
        return FQ2_ZERO
    a1 = fq2_exp(a, (_P - 3) // 4)
    alpha = fq2_mul(fq2_sqr(a1), a)
    x0 = fq2_mul(a1, a)
    if alpha == (_P - 1, 0):
        x = (-x0[1] % _P, x0[0])
    else:
        b = fq2_exp(fq2_add(FQ2_ONE, alpha), (_P - 1) // 2)
        x = fq2_mul(b, x0)
    if fq2_sqr(x) != (a[0] % _P, a[1] % _P):
        return None
    return x


XI = (9, 1)

# Frobenius constants xi^(k*(p-1)/6) and their norms xi^(k*(p^2-1)/6).
FROB_XI1 = tuple(fq2_exp(XI, k * (_P - 1) // 6) for k in range(1, 6))
FROB_XI2 = tuple(fq2_mul(x, fq2_conj(x)) for x in FROB_XI1)

TWIST_B = fq2_mul(fq2_inv(XI), (CURVE_B, 0))


# ---------------------------------------------------------------------------
# Fp6 = Fp2[v] / (v^3 - xi)
# ---------------------------------------------------------------------------

FQ6_ZERO = (FQ2_ZERO, FQ2_ZERO, FQ2_ZERO)
FQ6_ONE = (FQ2_ONE, FQ2_ZERO, FQ2_ZERO)


def fq6_add(a, b):
    return (fq2_add(a[0], b[0]), fq2_add(a[1], b[1]), fq2_add(a[2], b[2]))


def fq6_sub(a, b):
    return (fq2_sub(a[0], b[0]), fq2_sub(a[1], b[1]), fq2_sub(a[2], b[2]))


def fq6_neg(a):
    return (fq2_neg(a[0]), fq2_neg(a[1]), fq2_neg(a[2]))


def fq6_mul(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    v0 = fq2_mul(a0, b0)
    v1 = fq2_mul(a1, b1)
    v2 = fq2_mul(a2, b2)
    c0 = fq2_add(v0, fq2_mul_xi(fq2_sub(fq2_sub(fq2_mul(fq2_add(a1, a2), fq2_add(b1, b2)), v1), v2)))
    c1 = fq2_add(fq2_sub(fq2_sub(fq2_mul(fq2_add(a0, a1), fq2_add(b0, b1)), v0), v1), fq2_mul_xi(v2))
    c2 = fq2_add(fq2_sub(fq2_sub(fq2_mul(fq2_add(a0, a2), fq2_add(b0, b2)), v0), v2), v1)
    return (c0, c1, c2)


def fq6_mul_fq2(a, k):
    return (fq2_mul(a[0], k), fq2_mul(a[1], k), fq2_mul(a[2], k))


def fq6_mul_sparse2(a, s0, s1):
    # multiply by s0 + s1*v
    a0, a1, a2 = a
    return (
        fq2_add(fq2_mul(a0, s0), fq2_mul_xi(fq2_mul(a2, s1))),
        fq2_add(fq2_mul(a0, s1), fq2_mul(a1, s0)),
        fq2_add(fq2_mul(a1, s1), fq2_mul(a2, s0)),
    )


def fq6_sqr(a):
    a0, a1, a2 = a
    s0 = fq2_sqr(a0)
    s1 = fq2_mul(a0, a1)
    s1 = fq2_add(s1, s1)
    s2 = fq2_sqr(fq2_add(fq2_sub(a0, a1), a2))
    s3 = fq2_mul(a1, a2)
    s3 = fq2_add(s3, s3)
    s4 = fq2_sqr(a2)
    c0 = fq2_add(s0, fq2_mul_xi(s3))
    c1 = fq2_add(s1, fq2_mul_xi(s4))
    c2 = fq2_sub(fq2_sub(fq2_add(fq2_add(s1, s2), s3), s0), s4)
    return (c0, c1, c2)


def fq6_mul_v(a):
    # multiply by v
    return (fq2_mul_xi(a[2]), a[0], a[1])


def fq6_inv(a):
    a0, a1, a2 = a
    c0 = fq2_sub(fq2_sqr(a0), fq2_mul_xi(fq2_mul(a1, a2)))
    c1 = fq2_sub(fq2_mul_xi(fq2_sqr(a2)), fq2_mul(a0, a1))
    c2 = fq2_sub(fq2_sqr(a1), fq2_mul(a0, a2))
    f = fq2_add(fq2_mul(a0, c0), fq2_mul_xi(fq2_add(fq2_mul(a2, c1), fq2_mul(a1, c2))))
    f = fq2_inv(f)
    return (fq2_mul(c0, f), fq2_mul(c1, f), fq2_mul(c2, f))


# ---------------------------------------------------------------------------
# Fp12 = Fp6[w] / (w^2 - v)
# ---------------------------------------------------------------------------

FQ12_ONE = (FQ6_ONE, FQ6_ZERO)
FQ12_ZERO = (FQ6_ZERO, FQ6_ZERO)


def fq12_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    v0 = fq6_mul(a0, b0)
    v1 = fq6_mul(a1, b1)
    c1 = fq6_sub(fq6_sub(fq6_mul(fq6_add(a0, a1), fq6_add(b0, b1)), v0), v1)
    return (fq6_add(v0, fq6_mul_v(v1)), c1)


def fq12_sqr(a):
    a0, a1 = a
    v0 = fq6_mul(a0, a1)
    t = fq6_add(fq6_mul_v(a1), a0)
    c0 = fq6_sub(fq6_sub(fq6_mul(fq6_add(a0, a1), t), v0), fq6_mul_v(v0))
    return (c0, fq6_add(v0, v0))


def fq12_conj(a):
    return (a[0], fq6_neg(a[1]))


def fq12_inv(a):
    a0, a1 = a
    t = fq6_inv(fq6_sub(fq6_sqr(a0), fq6_mul_v(fq6_sqr(a1))))
    return (fq6_mul(a0, t), fq6_neg(fq6_mul(a1, t)))


def fq12_exp(a, k):
    if k == 0:
        return FQ12_ONE
    result = FQ12_ONE
    for bit in _bits_of(k):
        result = fq12_sqr(result)
        if bit:
            result = fq12_mul(result, a)
    return result


def fq12_frobenius(a):
    (a00, a01, a02), (a10, a11, a12) = a
    return (
        (fq2_conj(a00), fq2_mul(fq2_conj(a01), FROB_XI1[1]), fq2_mul(fq2_conj(a02), FROB_XI1[3])),
        (fq2_mul(fq2_conj(a10), FROB_XI1[0]), fq2_mul(fq2_conj(a11), FROB_XI1[2]), fq2_mul(fq2_conj(a12), FROB_XI1[4])),
    )


def fq12_frobenius_p2(a):
    (a00, a01, a02), (a10, a11, a12) = a
    return (
        (a00, fq2_mul(a01, FROB_XI2[1]), fq2_mul(a02, FROB_XI2[3])),
        (fq2_mul(a10, FROB_XI2[0]), fq2_mul(a11, FROB_XI2[2]), fq2_mul(a12, FROB_XI2[4])),
    )


def fq12_mul_line(f, la, lb, lc):
    # multiply by the sparse line lc + (lb + la*v)*w
    f0, f1 = f
    t0 = fq6_mul_fq2(f0, lc)
    t1 = fq6_mul_sparse2(f1, lb, la)
    c1 = fq6_sub(
        fq6_sub(fq6_mul_sparse2(fq6_add(f0, f1), fq2_add(lb, lc), la), t0),
        t1,
    )
    return (fq6_add(t0, fq6_mul_v(t1)), c1)


# ---------------------------------------------------------------------------
# G1: y^2 = x^3 + 3 over Fp, Jacobian coordinates
# ---------------------------------------------------------------------------

G1_GEN = (1, 2, 1)
G1_INF = (0, 1, 0)


def g1_is_inf(a):
    return a[2] == 0


def g1_neg(a):
    return (a[0], -a[1] % _P, a[2])


def g1_double(a):
    x, y, z = a
    if z == 0:
        return a
    A = x * x % _P
    B = y * y % _P
    C = B * B % _P
    t = x + B
    D = 2 * (t * t - A - C) % _P
    E = 3 * A % _P
    F = E * E % _P
    x3 = (F - 2 * D) % _P
    y3 = (E * (D - x3) - 8 * C) % _P
    z3 = 2 * y * z % _P
    return (x3, y3, z3)


def g1_add(a, b):
    if a[2] == 0:
        return b
    if b[2] == 0:
        return a
    z1z1 = a[2] * a[2] % _P
    z2z2 = b[2] * b[2] % _P
    u1 = a[0] * z2z2 % _P
    u2 = b[0] * z1z1 % _P
    s1 = a[1] * b[2] * z2z2 % _P
    s2 = b[1] * a[2] * z1z1 % _P
    h = (u2 - u1) % _P
    r = (s2 - s1) % _P
    if h == 0:
        if r == 0:
            return g1_double(a)
        return G1_INF
    r = 2 * r % _P
    i = h * h % _P
    i = 4 * i % _P
    j = h * i % _P
    V = u1 * i % _P
    x3 = (r * r - j - 2 * V) % _P
    y3 = (r * (V - x3) - 2 * s1 * j) % _P
    t = a[2] + b[2]
    z3 = (t * t - z1z1 - z2z2) * h % _P
    return (x3, y3, z3)


def g1_mul(a, k):
    k %= GROUP_ORDER
    if k == 0 or a[2] == 0:
        return G1_INF
    result = G1_INF
    for bit in _bits_of(k):
        result = g1_double(result)
        if bit:
            result = g1_add(result, a)
    return result


def g1_to_affine(a):
    if a[2] == 0:
        return None
    zinv = fq_inv(a[2])
    zinv2 = zinv * zinv % _P
    return (a[0] * zinv2 % _P, a[1] * zinv2 % _P * zinv % _P)


def g1_from_affine(xy):
    if xy is None:
        return G1_INF
    return (xy[0], xy[1], 1)


def g1_eq(a, b):
    if a[2] == 0 or b[2] == 0:
        return a[2] == 0 and b[2] == 0
    z1z1 = a[2] * a[2] % _P
    z2z2 = b[2] * b[2] % _P
    if a[0] * z2z2 % _P != b[0] * z1z1 % _P:
        return False
    return a[1] * b[2] * z2z2 % _P == b[1] * a[2] * z1z1 % _P


def g1_is_on_curve(a):
    if a[2] == 0:
        return True
    aff = g1_to_affine(a)
    x, y = aff
    return (y * y - x * x * x - CURVE_B) % _P == 0


def g1_multi_exp(points, scalars):
    # Strauss interleaving: one shared doubling chain
    pairs = [(p, s % GROUP_ORDER) for p, s in zip(points, scalars) if p[2] != 0 and s % GROUP_ORDER != 0]
    if not pairs:
        return G1_INF
    nbits = max(s.bit_length() for _, s in pairs)
    acc = G1_INF
    for i in range(nbits - 1, -1, -1):
        acc = g1_double(acc)
        for p, s in pairs:
            if (s >> i) & 1:
                acc = g1_add(acc, p)
    return acc


# ---------------------------------------------------------------------------
# G2: y^2 = x^3 + 3/xi over Fp2 (sextic twist), Jacobian coordinates
# ---------------------------------------------------------------------------

G2_GEN = (
    (10857046999023057135944570762232829481370756359578518086990519993285655852781,
     11559732032986387107991004021392285783925812861821192530917403151452391805634),
    (8495653923123431417604973247489272438418190587263600148770280649306958101930,
     4082367875863433681332203403145435568316851327593401208105741076214120093531),
    FQ2_ONE,
)
G2_INF = (FQ2_ZERO, FQ2_ONE, FQ2_ZERO)


def g2_is_inf(a):
    return a[2] == FQ2_ZERO


def g2_neg(a):
    return (a[0], fq2_neg(a[1]), a[2])


def g2_double(a):
    x, y, z = a
    if z == FQ2_ZERO:
        return a
    A = fq2_sqr(x)
    B = fq2_sqr(y)
    C = fq2_sqr(B)
    t = fq2_sqr(fq2_add(x, B))
    D = fq2_sub(fq2_sub(t, A), C)
    D = fq2_add(D, D)
    E = fq2_add(fq2_add(A, A), A)
    F = fq2_sqr(E)
    x3 = fq2_sub(F, fq2_add(D, D))
    c8 = fq2_add(C, C)
    c8 = fq2_add(c8, c8)
    c8 = fq2_add(c8, c8)
    y3 = fq2_sub(fq2_mul(E, fq2_sub(D, x3)), c8)
    z3 = fq2_mul(y, z)
    z3 = fq2_add(z3, z3)
    return (x3, y3, z3)


def g2_add(a, b):
    if a[2] == FQ2_ZERO:
        return b
    if b[2] == FQ2_ZERO:
        return a
    z1z1 = fq2_sqr(a[2])
    z2z2 = fq2_sqr(b[2])
    u1 = fq2_mul(a[0], z2z2)
    u2 = fq2_mul(b[0], z1z1)
    s1 = fq2_mul(fq2_mul(a[1], b[2]), z2z2)
    s2 = fq2_mul(fq2_mul(b[1], a[2]), z1z1)
    h = fq2_sub(u2, u1)
    r = fq2_sub(s2, s1)
    if h == FQ2_ZERO:
        if r == FQ2_ZERO:
            return g2_double(a)
        return G2_INF
    r = fq2_add(r, r)
    i = fq2_sqr(h)
    i = fq2_add(i, i)
    i = fq2_add(i, i)
    j = fq2_mul(h, i)
    V = fq2_mul(u1, i)
    x3 = fq2_sub(fq2_sub(fq2_sqr(r), j), fq2_add(V, V))
    t = fq2_mul(s1, j)
    y3 = fq2_sub(fq2_mul(r, fq2_sub(V, x3)), fq2_add(t, t))
    z3 = fq2_mul(fq2_sub(fq2_sub(fq2_sqr(fq2_add(a[2], b[2])), z1z1), z2z2), h)
    return (x3, y3, z3)


def g2_mul(a, k):
    k %= GROUP_ORDER
    if k == 0 or a[2] == FQ2_ZERO:
        return G2_INF
    result = G2_INF
    for bit in _bits_of(k):
        result = g2_double(result)
        if bit:
            result = g2_add(result, a)
    return result


def g2_to_affine(a):
    if a[2] == FQ2_ZERO:
        return None
    zinv = fq2_inv(a[2])
    zinv2 = fq2_sqr(zinv)
    return (fq2_mul(a[0], zinv2), fq2_mul(fq2_mul(a[1], zinv2), zinv))


def g2_from_affine(xy):
    if xy is None:
        return G2_INF
    return (xy[0], xy[1], FQ2_ONE)


def g2_eq(a, b):
    if a[2] == FQ2_ZERO or b[2] == FQ2_ZERO:
        return a[2] == FQ2_ZERO and b[2] == FQ2_ZERO
    z1z1 = fq2_sqr(a[2])
    z2z2 = fq2_sqr(b[2])
    if fq2_mul(a[0], z2z2) != fq2_mul(b[0], z1z1):
        return False
    return fq2_mul(fq2_mul(a[1], b[2]), z2z2) == fq2_mul(fq2_mul(b[1], a[2]), z1z1)


def g2_is_on_curve(a):
    if a[2] == FQ2_ZERO:
        return True
    aff = g2_to_affine(a)
    x, y = aff
    return fq2_sub(fq2_sub(fq2_sqr(y), fq2_mul(fq2_sqr(x), x)), TWIST_B) == FQ2_ZERO


def g2_in_subgroup(a):
    # scalar must NOT be reduced mod r here: the point may have a larger order
    if not g2_is_on_curve(a):
        return False
    acc = G2_INF
    for bit in _bits_of(GROUP_ORDER):
        acc = g2_double(acc)
        if bit:
            acc = g2_add(acc, a)
    return g2_is_inf(acc)


# ---------------------------------------------------------------------------
# Optimal ate pairing
# ---------------------------------------------------------------------------

def _line_double(r, qx, qy):
    # tangent line at twist point r, evaluated at the G1 point (qx, qy);
    # returns (a, b, c, 2r) with the line lc=c, lb=b, la=a as used by
    # fq12_mul_line
    rx, ry, rz = r
    r_t = fq2_sqr(rz)
    A = fq2_sqr(rx)
    B = fq2_sqr(ry)
    C = fq2_sqr(B)
    D = fq2_sqr(fq2_add(rx, B))
    D = fq2_sub(fq2_sub(D, A), C)
    D = fq2_add(D, D)
    E = fq2_add(fq2_add(A, A), A)
    F = fq2_sqr(E)
    c8 = fq2_add(C, C)
    c8 = fq2_add(c8, c8)
    c8 = fq2_add(c8, c8)
    x3 = fq2_sub(F, fq2_add(D, D))
    y3 = fq2_sub(fq2_mul(E, fq2_sub(D, x3)), c8)
    z3 = fq2_sqr(fq2_add(ry, rz))
    z3 = fq2_sub(fq2_sub(z3, B), r_t)

    a = fq2_sqr(fq2_add(rx, E))
    b4 = fq2_add(B, B)
    b4 = fq2_add(b4, b4)
    a = fq2_sub(fq2_sub(fq2_sub(a, A), F), b4)

    t = fq2_mul(E, r_t)
    t = fq2_add(t, t)
    b = fq2_mul_scalar(fq2_neg(t), qx)

    c = fq2_mul(z3, r_t)
    c = fq2_add(c, c)
    c = fq2_mul_scalar(c, qy)

    return (a, b, c, (x3, y3, z3))


def _line_add(r, p, qx, qy, p_y2):
    # chord line through twist points r and p, evaluated at (qx, qy);
    # p must be affine (z == 1) and p_y2 = p.y^2 precomputed
    rx, ry, rz = r
    px, py = p[0], p[1]
    r_t = fq2_sqr(rz)
    B = fq2_mul(px, r_t)
    D = fq2_sqr(fq2_add(py, rz))
    D = fq2_sub(fq2_sub(D, p_y2), r_t)
    D = fq2_mul(D, r_t)
    H = fq2_sub(B, rx)
    I = fq2_sqr(H)
    E = fq2_add(I, I)
    E = fq2_add(E, E)
    J = fq2_mul(H, E)
    L1 = fq2_sub(D, ry)
    L1 = fq2_sub(L1, ry)
    V = fq2_mul(rx, E)
    x3 = fq2_sub(fq2_sub(fq2_sqr(L1), J), fq2_add(V, V))
    z3 = fq2_sqr(fq2_add(rz, H))
    z3 = fq2_sub(fq2_sub(z3, r_t), I)
    t = fq2_mul(fq2_sub(V, x3), L1)
    t2 = fq2_mul(ry, J)
    t2 = fq2_add(t2, t2)
    y3 = fq2_sub(t, t2)

    t = fq2_sqr(fq2_add(py, z3))
    t = fq2_sub(fq2_sub(t, p_y2), fq2_sqr(z3))
    t2 = fq2_mul(L1, px)
    t2 = fq2_add(t2, t2)
    a = fq2_sub(t2, t)

    c = fq2_mul_scalar(z3, qy)
    c = fq2_add(c, c)

    b = fq2_mul_scalar(fq2_neg(L1), qx)
    b = fq2_add(b, b)

    return (a, b, c, (x3, y3, z3))


def miller_loop(pairs):
    """Shared Miller loop over [(g1_point, g2_point), ...]; no final exp."""
    prepared = []
    for p, q in pairs:
        if p[2] == 0 or g2_is_inf(q):
            continue
        paff = g1_to_affine(p)
        qaff = g2_from_affine(g2_to_affine(q))
        prepared.append((paff[0], paff[1], qaff))
    if not prepared:
        return FQ12_ONE

    state = []
    for qx, qy, q in prepared:
        mq = g2_neg(q)
        state.append([qx, qy, q, mq, fq2_sqr(q[1]), fq2_sqr(mq[1]), q])

    f = FQ12_ONE
    for digit in ATE_LOOP_NAF:
        f = fq12_sqr(f)
        for s in state:
            a, b, c, t = _line_double(s[6], s[0], s[1])
            f = fq12_mul_line(f, a, b, c)
            if digit == 1:
                a, b, c, t = _line_add(t, s[2], s[0], s[1], s[4])
                f = fq12_mul_line(f, a, b, c)
            elif digit == -1:
                a, b, c, t = _line_add(t, s[3], s[0], s[1], s[5])
                f = fq12_mul_line(f, a, b, c)
            s[6] = t

    # Frobenius correction steps: Q1 = pi_p(Q), -Q2 = pi_{p^2}(Q) folded in
    for s in state:
        qx, qy, q = s[0], s[1], s[2]
        q1 = (
            fq2_mul(fq2_conj(q[0]), FROB_XI1[1]),
            fq2_mul(fq2_conj(q[1]), FROB_XI1[2]),
            FQ2_ONE,
        )
        q2 = (
            fq2_mul_scalar(q[0], FROB_XI2[1][0]),
            q[1],
            FQ2_ONE,
        )
        a, b, c, t = _line_add(s[6], q1, qx, qy, fq2_sqr(q1[1]))
        f = fq12_mul_line(f, a, b, c)
        a, b, c, t = _line_add(t, q2, qx, qy, fq2_sqr(q2[1]))
        f = fq12_mul_line(f, a, b, c)
    return f


def final_exp(f):
    """Map a Miller-loop output to the order-r pairing group (Alg. 31, eprint 2010/354)."""
    t1 = fq12_conj(f)
    t1 = fq12_mul(t1, fq12_inv(f))
    t1 = fq12_mul(t1, fq12_frobenius_p2(t1))

    fp1 = fq12_frobenius(t1)
    fp2 = fq12_frobenius_p2(t1)
    fp3 = fq12_frobenius(fp2)
    fu1 = fq12_exp(t1, BN_U)
    fu2 = fq12_exp(fu1, BN_U)
    fu3 = fq12_exp(fu2, BN_U)
    y3 = fq12_conj(fq12_frobenius(fu1))
    fu2p = fq12_frobenius(fu2)
    fu3p = fq12_frobenius(fu3)
    y2 = fq12_frobenius_p2(fu2)
    y0 = fq12_mul(fq12_mul(fp1, fp2), fp3)
    y1 = fq12_conj(t1)
    y5 = fq12_conj(fu2)
    y4 = fq12_conj(fq12_mul(fu1, fu2p))
    y6 = fq12_conj(fq12_mul(fu3, fu3p))

    t0 = fq12_mul(fq12_mul(fq12_sqr(y6), y4), y5)
    t1 = fq12_mul(fq12_mul(y3, y5), t0)
    t0 = fq12_mul(t0, y2)
    t1 = fq12_mul(fq12_sqr(t1), t0)
    t1 = fq12_sqr(t1)
    t0 = fq12_mul(t1, y1)
    t1 = fq12_mul(t1, y0)
    t0 = fq12_sqr(t0)
    return fq12_mul(t0, t1)


def pairing(p, q):
    return final_exp(miller_loop([(p, q)]))


def multi_pairing(pairs):
    return final_exp(miller_loop(pairs))


def pairing_check(pairs):
    """EIP-197 style boolean check: prod e(P_i, Q_i) == 1."""
    return final_exp(miller_loop(pairs)) == FQ12_ONE


# ---------------------------------------------------------------------------
# GT = order-r subgroup of Fp12*
# ---------------------------------------------------------------------------

GT_ONE = FQ12_ONE


def gt_mul(a, b):
    return fq12_mul(a, b)


def gt_inv(a):
    # GT elements are unitary: the conjugate is the inverse
    return fq12_conj(a)


def gt_exp(a, k):
    k %= GROUP_ORDER
    if k == 0:
        return FQ12_ONE
    return fq12_exp(a, k)


# ---------------------------------------------------------------------------
# Fixed-base tables for the three generators
# ---------------------------------------------------------------------------

def _batch_fq_inv(values):
    # Montgomery trick
    n = len(values)
    prefix = [1] * (n + 1)
    for i, v in enumerate(values):
        prefix[i + 1] = prefix[i] * v % _P
    inv = fq_inv(prefix[n])
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = prefix[i] * inv % _P
        inv = inv * values[i] % _P
    return out


def _build_g1_table(base, nbits):
    jac = []
    cur = base
    for _ in range(nbits):
        jac.append(cur)
        cur = g1_double(cur)
    zs = [p[2] for p in jac]
    zinvs = _batch_fq_inv(zs)
    table = []
    for (x, y, _), zi in zip(jac, zinvs):
        zi2 = zi * zi % _P
        table.append((x * zi2 % _P, y * zi2 % _P * zi % _P, 1))
    return table


def _build_g2_table(base, nbits):
    table = []
    cur = base
    for _ in range(nbits):
        aff = g2_to_affine(cur)
        table.append((aff[0], aff[1], FQ2_ONE))
        cur = g2_double(cur)
    return table


_NBITS = GROUP_ORDER.bit_length()
_G1_GEN_TABLE = _build_g1_table(G1_GEN, _NBITS)
_G2_GEN_TABLE = _build_g2_table(G2_GEN, _NBITS)

GT_GEN = pairing(G1_GEN, G2_GEN)

_GT_GEN_TABLE = []
_cur = GT_GEN
for _ in range(_NBITS):
    _GT_GEN_TABLE.append(_cur)
    _cur = fq12_sqr(_cur)
del _cur


def g1_gen_exp(k):
    k %= GROUP_ORDER
    acc = G1_INF
    i = 0
    while k:
        if k & 1:
            acc = g1_add(acc, _G1_GEN_TABLE[i])
        k >>= 1
        i += 1
    return acc


def g2_gen_exp(k):
    k %= GROUP_ORDER
    acc = G2_INF
    i = 0
    while k:
        if k & 1:
            acc = g2_add(acc, _G2_GEN_TABLE[i])
        k >>= 1
        i += 1
    return acc


def gt_gen_exp(k):
    k %= GROUP_ORDER
    acc = FQ12_ONE
    i = 0
    while k:
        if k & 1:
            acc = fq12_mul(acc, _GT_GEN_TABLE[i])
        k >>= 1
        i += 1
    return acc


BACKEND_NAME = "reference"
