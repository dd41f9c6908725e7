"""Bilinear-group substrate over BN254 ("bn128", the EIP-196/197 curve).

Wraps the kernel backend (compiled or pure Python, selected at import) in
small immutable element types with canonical encodings, and provides the
protocol-level primitives built on them:

* ``hash_to_g1`` — domain-separated hashing onto G1 (Fouque-Tibouchi map,
  two evaluations added, field elements from expand_message_xmd/SHA-256)
* ``fiat_shamir`` — transcript hashing to a scalar challenge
* ``kdf`` — extract-and-expand derivation from a GT element to a byte stream

Encodings are fixed-width and bit-exact: 32-byte big-endian scalars,
compressed 33/65-byte points for G1/G2, 384-byte GT elements.  Everything
here is pure and safe to share across threads.
"""

from __future__ import annotations

import functools
import hashlib
import hmac
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

from abeshare._kernels import kernel as _k
from abeshare._kernels import BACKEND_NAME

__all__ = [
    "GROUP_ORDER",
    "FIELD_MODULUS",
    "CURVE_ID",
    "BACKEND_NAME",
    "AlgebraError",
    "DecodeError",
    "Scalar",
    "G1Elem",
    "G2Elem",
    "GTElem",
    "GroupContext",
    "HashToGroupConfig",
    "pairing",
    "multi_pairing",
    "pairing_check",
    "g1_multi_exp",
    "hash_to_g1",
    "expand_message_xmd",
    "fiat_shamir",
    "kdf",
    "rand_scalar",
    "rand_gt",
    "scalar_to_bytes",
    "scalar_from_bytes",
    "default_rng",
]

GROUP_ORDER = _k.GROUP_ORDER
FIELD_MODULUS = _k.FQ
CURVE_ID = "bn254"

# scalars are plain ints in [0, GROUP_ORDER)
Scalar = int

_SCALAR_LEN = 32
_FQ_LEN = 32


class AlgebraError(ValueError):
    """Invalid group-level operation or argument."""


class DecodeError(AlgebraError):
    """Byte string is not a canonical encoding of a group element."""


_SYS_RNG = random.SystemRandom()


def default_rng() -> random.Random:
    return _SYS_RNG


def rand_scalar(rng: random.Random | None = None) -> int:
    return (rng or _SYS_RNG).randrange(GROUP_ORDER)


def scalar_to_bytes(s: int) -> bytes:
    return (s % GROUP_ORDER).to_bytes(_SCALAR_LEN, "big")


def scalar_from_bytes(raw: bytes) -> int:
    if len(raw) != _SCALAR_LEN:
        raise DecodeError(f"scalar must be {_SCALAR_LEN} bytes, got {len(raw)}")
    v = int.from_bytes(raw, "big")
    if v >= GROUP_ORDER:
        raise DecodeError("scalar out of range")
    return v


def _fq_to_bytes(v: int) -> bytes:
    return v.to_bytes(_FQ_LEN, "big")


def _fq_from_bytes(raw: bytes) -> int:
    v = int.from_bytes(raw, "big")
    if v >= FIELD_MODULUS:
        raise DecodeError("field element out of range")
    return v


class G1Elem:
    """Element of G1, normalized to affine form on construction."""

    __slots__ = ("_pt",)

    def __init__(self, jacobian):
        aff = _k.g1_to_affine(jacobian)
        self._pt = _k.G1_INF if aff is None else (aff[0], aff[1], 1)

    @classmethod
    def generator(cls) -> "G1Elem":
        return _G1_GEN_WRAP

    @classmethod
    def identity(cls) -> "G1Elem":
        return _G1_ID_WRAP

    def is_identity(self) -> bool:
        return self._pt[2] == 0

    def __mul__(self, other: "G1Elem") -> "G1Elem":
        if not isinstance(other, G1Elem):
            return NotImplemented
        return G1Elem(_k.g1_add(self._pt, other._pt))

    def __truediv__(self, other: "G1Elem") -> "G1Elem":
        if not isinstance(other, G1Elem):
            return NotImplemented
        return G1Elem(_k.g1_add(self._pt, _k.g1_neg(other._pt)))

    def __pow__(self, k: int) -> "G1Elem":
        if self._pt == _k.G1_GEN:
            return G1Elem(_k.g1_gen_exp(k % GROUP_ORDER))
        return G1Elem(_k.g1_mul(self._pt, k % GROUP_ORDER))

    def inverse(self) -> "G1Elem":
        return G1Elem(_k.g1_neg(self._pt))

    def __eq__(self, other) -> bool:
        return isinstance(other, G1Elem) and self._pt == other._pt

    def __hash__(self):
        return hash(("G1", self._pt))

    def __repr__(self):
        return f"G1Elem({self.encode().hex()[:16]}…)"

    def encode(self) -> bytes:
        if self._pt[2] == 0:
            return b"\x00" * (1 + _FQ_LEN)
        x, y, _ = self._pt
        prefix = b"\x03" if y & 1 else b"\x02"
        return prefix + _fq_to_bytes(x)

    @classmethod
    def decode(cls, raw: bytes) -> "G1Elem":
        if len(raw) != 1 + _FQ_LEN:
            raise DecodeError(f"G1 encoding must be {1 + _FQ_LEN} bytes")
        if raw[0] == 0:
            if any(raw[1:]):
                raise DecodeError("non-canonical G1 identity")
            return cls(_k.G1_INF)
        if raw[0] not in (2, 3):
            raise DecodeError("bad G1 prefix")
        x = _fq_from_bytes(raw[1:])
        y2 = (x * x % FIELD_MODULUS * x + _k.CURVE_B) % FIELD_MODULUS
        y = _k.fq_sqrt(y2)
        if y is None:
            raise DecodeError("x is not on the curve")
        if (y & 1) != (raw[0] == 3):
            y = FIELD_MODULUS - y
        return cls((x, y, 1))


def _fq2_sgn0(v) -> int:
    # RFC 9380 sign convention for Fp2
    if v[0] != 0:
        return v[0] & 1
    return v[1] & 1


class G2Elem:
    """Element of the order-r subgroup of the sextic twist (G2)."""

    __slots__ = ("_pt",)

    def __init__(self, jacobian):
        aff = _k.g2_to_affine(jacobian)
        self._pt = _k.G2_INF if aff is None else (aff[0], aff[1], _k.FQ2_ONE)

    @classmethod
    def generator(cls) -> "G2Elem":
        return _G2_GEN_WRAP

    @classmethod
    def identity(cls) -> "G2Elem":
        return _G2_ID_WRAP

    def is_identity(self) -> bool:
        return self._pt[2] == _k.FQ2_ZERO

    def __mul__(self, other: "G2Elem") -> "G2Elem":
        if not isinstance(other, G2Elem):
            return NotImplemented
        return G2Elem(_k.g2_add(self._pt, other._pt))

    def __truediv__(self, other: "G2Elem") -> "G2Elem":
        if not isinstance(other, G2Elem):
            return NotImplemented
        return G2Elem(_k.g2_add(self._pt, _k.g2_neg(other._pt)))

    def __pow__(self, k: int) -> "G2Elem":
        if self._pt == _k.G2_GEN:
            return G2Elem(_k.g2_gen_exp(k % GROUP_ORDER))
        return G2Elem(_k.g2_mul(self._pt, k % GROUP_ORDER))

    def inverse(self) -> "G2Elem":
        return G2Elem(_k.g2_neg(self._pt))

    def __eq__(self, other) -> bool:
        return isinstance(other, G2Elem) and self._pt == other._pt

    def __hash__(self):
        return hash(("G2", self._pt))

    def __repr__(self):
        return f"G2Elem({self.encode().hex()[:16]}…)"

    def encode(self) -> bytes:
        if self.is_identity():
            return b"\x00" * (1 + 2 * _FQ_LEN)
        x, y, _ = self._pt
        prefix = b"\x03" if _fq2_sgn0(y) else b"\x02"
        return prefix + _fq_to_bytes(x[0]) + _fq_to_bytes(x[1])

    @classmethod
    def decode(cls, raw: bytes) -> "G2Elem":
        if len(raw) != 1 + 2 * _FQ_LEN:
            raise DecodeError(f"G2 encoding must be {1 + 2 * _FQ_LEN} bytes")
        if raw[0] == 0:
            if any(raw[1:]):
                raise DecodeError("non-canonical G2 identity")
            return cls(_k.G2_INF)
        if raw[0] not in (2, 3):
            raise DecodeError("bad G2 prefix")
        x = (_fq_from_bytes(raw[1:33]), _fq_from_bytes(raw[33:]))
        y2 = _k.fq2_add(_k.fq2_mul(_k.fq2_sqr(x), x), _k.TWIST_B)
        y = _k.fq2_sqrt(y2)
        if y is None:
            raise DecodeError("x is not on the twist")
        if _fq2_sgn0(y) != (raw[0] == 3):
            y = _k.fq2_neg(y)
        pt = (x, y, _k.FQ2_ONE)
        if not _k.g2_in_subgroup(pt):
            raise DecodeError("point not in the order-r subgroup")
        return cls(pt)


class GTElem:
    """Element of GT, the order-r subgroup of Fp12*."""

    __slots__ = ("_v",)

    def __init__(self, fq12):
        self._v = fq12

    @classmethod
    def generator(cls) -> "GTElem":
        return _GT_GEN_WRAP

    @classmethod
    def identity(cls) -> "GTElem":
        return _GT_ID_WRAP

    def is_identity(self) -> bool:
        return self._v == _k.GT_ONE

    def __mul__(self, other: "GTElem") -> "GTElem":
        if not isinstance(other, GTElem):
            return NotImplemented
        return GTElem(_k.gt_mul(self._v, other._v))

    def __truediv__(self, other: "GTElem") -> "GTElem":
        if not isinstance(other, GTElem):
            return NotImplemented
        return GTElem(_k.gt_mul(self._v, _k.gt_inv(other._v)))

    def __pow__(self, k: int) -> "GTElem":
        if self._v == _k.GT_GEN:
            return GTElem(_k.gt_gen_exp(k % GROUP_ORDER))
        return GTElem(_k.gt_exp(self._v, k % GROUP_ORDER))

    def inverse(self) -> "GTElem":
        return GTElem(_k.gt_inv(self._v))

    def __eq__(self, other) -> bool:
        return isinstance(other, GTElem) and self._v == other._v

    def __hash__(self):
        return hash(("GT", self._v))

    def __repr__(self):
        return f"GTElem({self.encode().hex()[:16]}…)"

    def _coeffs(self):
        (a, b, c), (d, e, f) = self._v
        return [a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1], e[0], e[1], f[0], f[1]]

    def encode(self) -> bytes:
        return b"".join(_fq_to_bytes(c) for c in self._coeffs())

    @classmethod
    def decode(cls, raw: bytes, check_subgroup: bool = False) -> "GTElem":
        if len(raw) != 12 * _FQ_LEN:
            raise DecodeError(f"GT encoding must be {12 * _FQ_LEN} bytes")
        c = [_fq_from_bytes(raw[i * 32:(i + 1) * 32]) for i in range(12)]
        v = (((c[0], c[1]), (c[2], c[3]), (c[4], c[5])),
             ((c[6], c[7]), (c[8], c[9]), (c[10], c[11])))
        if v == _k.FQ12_ZERO:
            raise DecodeError("zero is not a group element")
        elem = cls(v)
        # x^r == 1 tested as x^(r-1) == conj(x); subgroup elements are
        # unitary, so the conjugate is their inverse
        if check_subgroup and _k.gt_exp(v, GROUP_ORDER - 1) != _k.gt_inv(v):
            raise DecodeError("element not in the order-r subgroup")
        return elem


_G1_GEN_WRAP = G1Elem(_k.G1_GEN)
_G1_ID_WRAP = G1Elem(_k.G1_INF)
_G2_GEN_WRAP = G2Elem(_k.G2_GEN)
_G2_ID_WRAP = G2Elem(_k.G2_INF)
_GT_GEN_WRAP = GTElem(_k.GT_GEN)
_GT_ID_WRAP = GTElem(_k.GT_ONE)


def rand_gt(rng: random.Random | None = None) -> GTElem:
    """Uniform non-identity GT element (identity excluded by sampling k != 0)."""
    k = (rng or _SYS_RNG).randrange(1, GROUP_ORDER)
    return _GT_GEN_WRAP ** k


def pairing(a: G1Elem, b: G2Elem) -> GTElem:
    if not isinstance(a, G1Elem) or not isinstance(b, G2Elem):
        raise AlgebraError("pairing expects (G1Elem, G2Elem)")
    return GTElem(_k.pairing(a._pt, b._pt))


def multi_pairing(pairs: Sequence[tuple[G1Elem, G2Elem]]) -> GTElem:
    return GTElem(_k.multi_pairing([(a._pt, b._pt) for a, b in pairs]))


def pairing_check(pairs: Sequence[tuple[G1Elem, G2Elem]]) -> bool:
    """Boolean product-of-pairings check, the EIP-197 contract shape."""
    return _k.pairing_check([(a._pt, b._pt) for a, b in pairs])


def g1_multi_exp(pairs: Sequence[tuple[G1Elem, int]]) -> G1Elem:
    return G1Elem(_k.g1_multi_exp([p._pt for p, _ in pairs], [s for _, s in pairs]))


# ---------------------------------------------------------------------------
# Hashing
# ---------------------------------------------------------------------------

def expand_message_xmd(msg: bytes, dst: bytes, out_len: int) -> bytes:
    """expand_message_xmd from RFC 9380 with SHA-256."""
    if len(dst) > 255:
        raise AlgebraError("DST too long")
    h = hashlib.sha256
    b_len = 32
    r_len = 64
    ell = -(-out_len // b_len)
    if ell > 255:
        raise AlgebraError("requested output too long")
    dst_prime = dst + bytes([len(dst)])
    z_pad = b"\x00" * r_len
    l_i_b = out_len.to_bytes(2, "big")
    b0 = h(z_pad + msg + l_i_b + b"\x00" + dst_prime).digest()
    b1 = h(b0 + b"\x01" + dst_prime).digest()
    out = [b1]
    prev = b1
    for i in range(2, ell + 1):
        prev = h(bytes(x ^ y for x, y in zip(b0, prev)) + bytes([i]) + dst_prime).digest()
        out.append(prev)
    return b"".join(out)[:out_len]


def _hash_to_fq(msg: bytes, dst: bytes, count: int) -> list[int]:
    # 48-byte wide reduction per element keeps the mod-p bias negligible
    raw = expand_message_xmd(msg, dst, 48 * count)
    return [int.from_bytes(raw[i * 48:(i + 1) * 48], "big") % FIELD_MODULUS for i in range(count)]


_P = FIELD_MODULUS
_SQRT_NEG3 = _k.fq_sqrt(_P - 3)
_FT_X0 = (_SQRT_NEG3 - 1) * pow(2, -1, _P) % _P  # (sqrt(-3)-1)/2


def _legendre(a: int) -> int:
    t = pow(a, (_P - 1) // 2, _P)
    return -1 if t == _P - 1 else t


def _ft_map(t: int):
    # Fouque-Tibouchi encoding to BN curves; total because 1+b+t^2 has no
    # root when p = 3 mod 4 and b = 3, and t = 0 is remapped
    if t == 0:
        t = 1
    w = _SQRT_NEG3 * t % _P * pow((1 + _k.CURVE_B + t * t) % _P, -1, _P) % _P
    chi_t = _legendre(t)
    for x in (
        (_FT_X0 - t * w) % _P,
        (-1 - (_FT_X0 - t * w)) % _P,
        (1 + pow(w * w % _P, -1, _P)) % _P,
    ):
        y2 = (x * x % _P * x + _k.CURVE_B) % _P
        y = _k.fq_sqrt(y2)
        if y is not None:
            return (x, y if chi_t == 1 else _P - y, 1)
    raise AssertionError("FT map: no candidate was square")  # impossible


@functools.lru_cache(maxsize=8192)
def hash_to_g1(tag: bytes, msg: bytes) -> G1Elem:
    """Hash onto G1 under a domain tag; distinct tags give independent oracles.

    Two map evaluations are added so the output is distributed over the whole
    group (the single-evaluation map covers only part of the curve).  Results
    are cached; the map is deterministic and elements are immutable.
    """
    u0, u1 = _hash_to_fq(msg, tag, 2)
    return G1Elem(_k.g1_add(_ft_map(u0), _ft_map(u1)))


_FS_DST = b"abeshare-v1-fiat-shamir"


def fiat_shamir(transcript: Iterable[bytes]) -> int:
    """Derive a scalar challenge from an ordered list of byte strings.

    Items are length-prefixed before hashing so no two distinct transcripts
    collide by concatenation.
    """
    items = list(transcript)
    if not items:
        raise AlgebraError("empty transcript")
    payload = b"".join(len(it).to_bytes(8, "big") + it for it in items)
    raw = expand_message_xmd(payload, _FS_DST, 48)
    return int.from_bytes(raw, "big") % GROUP_ORDER


_KDF_SALT = b"abeshare-v1-kdf"
_KDF_INFO = b"abeshare-v1-stream"


def kdf(seed: GTElem, out_len: int) -> bytes:
    """Derive ``out_len`` pseudorandom bytes from a GT element.

    Extract-and-expand: HMAC-SHA256 extraction over the canonical GT encoding,
    then a ChaCha20 keystream as the variable-length expand stage.  The output
    length is bound into the info string, so different lengths are independent
    derivations (no prefix relationship).
    """
    if out_len < 1:
        raise AlgebraError("out_len must be >= 1")
    prk = hmac.new(_KDF_SALT, seed.encode(), hashlib.sha256).digest()
    info = _KDF_INFO + out_len.to_bytes(8, "little")
    key = hmac.new(prk, info + b"\x01", hashlib.sha256).digest()
    cipher = Cipher(algorithms.ChaCha20(key, b"\x00" * 16), mode=None)
    return cipher.encryptor().update(b"\x00" * out_len)


# ---------------------------------------------------------------------------
# Context types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HashToGroupConfig:
    domain_tag_h: bytes = b"abeshare-v1-H"
    domain_tag_f: bytes = b"abeshare-v1-F"

    def __post_init__(self):
        if self.domain_tag_h == self.domain_tag_f:
            raise AlgebraError("H and F domain tags must differ")


@dataclass(frozen=True)
class GroupContext:
    """Fixed bilinear-group parameters shared by every party."""

    curve_id: str = CURVE_ID
    order_p: int = GROUP_ORDER

    def __post_init__(self):
        if self.curve_id != CURVE_ID:
            raise AlgebraError(f"unsupported curve {self.curve_id!r}")

    @property
    def g1(self) -> G1Elem:
        return _G1_GEN_WRAP

    @property
    def g2(self) -> G2Elem:
        return _G2_GEN_WRAP

    @property
    def gt(self) -> GTElem:
        return _GT_GEN_WRAP
