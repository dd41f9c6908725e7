"""Decentralized CP-ABE over asymmetric pairings.

Multiple independent authorities each own an attribute namespace (attribute
words carry a mandatory ``@<authority-id>`` suffix) and issue per-attribute
keys bound to a sharing instance identifier ``gid``.  A ciphertext carries a
monotone policy; any single-gid key set whose attributes satisfy the policy
decrypts.

Key shape, per authority with secrets (alpha, beta) and per-key randomness d::

    K0 = g1^alpha * H(gid)^beta * F(u)^d      in G1
    K1 = g2^d                                 in G2

which makes every key publicly checkable against the issuing authority's
public key through one pairing-product identity (``key_is_valid``).

Encryption shares the blinding exponent s across the rows of the policy's
LSSS matrix and additionally shares a zero secret through the same matrix;
the second share binds rows to H(gid) at decryption time, which is what
stops keys issued for different sharing instances from being combined.

The hybrid wrapper encrypts arbitrary bytes as ``m XOR kdf(M)`` where M is a
fresh uniform GT element encrypted under the policy.
"""

from __future__ import annotations

import functools
import json
import random
from dataclasses import dataclass
from typing import Iterable, Mapping

from abeshare import policy as policy_mod
from abeshare.algebra import (
    GROUP_ORDER,
    CURVE_ID,
    G1Elem,
    G2Elem,
    GTElem,
    GroupContext,
    HashToGroupConfig,
    g1_multi_exp,
    hash_to_g1,
    kdf,
    multi_pairing,
    pairing,
    pairing_check,
    rand_gt,
    rand_scalar,
)

__all__ = [
    "CpabeError",
    "UnknownAuthorityError",
    "PolicyNotSatisfiedError",
    "MixedGidError",
    "GlobalParams",
    "AuthorityKeyPair",
    "AuthorityPublicKey",
    "UserKeyPair",
    "Ciphertext",
    "CiphertextRow",
    "DecryptionKey",
    "HybridCiphertext",
    "global_setup",
    "auth_setup",
    "user_keygen",
    "authority_of",
    "abe_encrypt",
    "abe_keygen",
    "key_is_valid",
    "abe_decrypt",
    "hybrid_encrypt",
    "hybrid_decrypt",
    "xor_bytes",
    "gp_to_json",
    "gp_from_json",
    "authority_pub_to_json",
    "authority_pub_from_json",
    "ciphertext_to_json",
    "ciphertext_from_json",
    "key_to_json",
    "key_from_json",
]


class CpabeError(ValueError):
    pass


class UnknownAuthorityError(CpabeError):
    """An attribute names an authority with no known public key."""


class PolicyNotSatisfiedError(CpabeError):
    """The supplied keys do not satisfy the ciphertext policy."""


class MixedGidError(CpabeError):
    """Keys from different sharing instances cannot be combined."""


@dataclass(frozen=True)
class GlobalParams:
    ctx: GroupContext
    hashes: HashToGroupConfig
    security_level: int = 128

    def hash_gid(self, gid: bytes) -> G1Elem:
        return hash_to_g1(self.hashes.domain_tag_h, gid)

    def hash_attr(self, attr: str) -> G1Elem:
        return hash_to_g1(self.hashes.domain_tag_f, attr.encode())


def global_setup(curve_id: str = CURVE_ID, security_level: int = 128) -> GlobalParams:
    """Deterministic public parameters: fixed curve generators, fixed tags."""
    return GlobalParams(ctx=GroupContext(curve_id=curve_id), hashes=HashToGroupConfig(),
                        security_level=security_level)


@dataclass(frozen=True)
class AuthorityPublicKey:
    theta: str
    a1: G1Elem  # g1^alpha
    a2: G2Elem  # g2^alpha
    b2: G2Elem  # g2^beta
    t: GTElem   # e(g1, g2)^alpha

    def is_consistent(self, gp: GlobalParams) -> bool:
        return _authority_pk_consistent(self, gp.ctx.curve_id)


@functools.lru_cache(maxsize=1024)
def _authority_pk_consistent(pk: AuthorityPublicKey, curve_id: str) -> bool:
    # pure predicate on immutable values (generators are fixed per curve);
    # checks the same alpha sits in both groups and in the pairing target
    g1 = G1Elem.generator()
    g2 = G2Elem.generator()
    if not pairing_check([(pk.a1, g2), (g1.inverse(), pk.a2)]):
        return False
    return pairing(pk.a1, g2) == pk.t


@dataclass(frozen=True)
class AuthorityKeyPair:
    theta: str
    alpha: int
    beta: int
    pk: AuthorityPublicKey


@dataclass(frozen=True)
class UserKeyPair:
    y: int
    pk_u: G1Elem


def auth_setup(gp: GlobalParams, theta: str, rng: random.Random | None = None) -> AuthorityKeyPair:
    alpha = rand_scalar(rng)
    beta = rand_scalar(rng)
    pk = AuthorityPublicKey(
        theta=theta,
        a1=gp.ctx.g1 ** alpha,
        a2=gp.ctx.g2 ** alpha,
        b2=gp.ctx.g2 ** beta,
        t=gp.ctx.gt ** alpha,
    )
    return AuthorityKeyPair(theta=theta, alpha=alpha, beta=beta, pk=pk)


def user_keygen(gp: GlobalParams, rng: random.Random | None = None) -> UserKeyPair:
    y = rand_scalar(rng)
    return UserKeyPair(y=y, pk_u=gp.ctx.g1 ** y)


def authority_of(attr: str) -> str:
    """Authority id from the mandatory ``@`` suffix of an attribute word."""
    _, sep, suffix = attr.rpartition("@")
    if not sep or not suffix:
        raise CpabeError(f"attribute {attr!r} has no @authority suffix")
    return suffix


@dataclass(frozen=True)
class CiphertextRow:
    attr: str
    c1: GTElem
    c2: G2Elem
    c3: G2Elem
    c4: G1Elem


@dataclass(frozen=True)
class Ciphertext:
    policy: str
    lsss: policy_mod.LsssMatrix
    c0: GTElem
    rows: tuple[CiphertextRow, ...]


def abe_encrypt(
    gp: GlobalParams,
    message: GTElem,
    acp: str,
    pks: Mapping[str, AuthorityPublicKey],
    rng: random.Random | None = None,
    _randomness_sink: dict | None = None,
) -> Ciphertext:
    """Encrypt a GT element under a policy, given the public keys of every
    authority named in it.

    Row x of the LSSS matrix gets a share lam_x of the blinding secret s and
    a share om_x of zero, plus fresh row randomness t_x::

        C0   = M * e(g1,g2)^s
        C1_x = e(g1,g2)^{lam_x} * T_auth^{t_x}
        C2_x = g2^{-t_x}
        C3_x = B2_auth^{t_x} * g2^{om_x}
        C4_x = F(attr)^{t_x}
    """
    ast = policy_mod.parse_policy(acp)
    lsss = policy_mod.policy_to_lsss(ast)
    for attr in lsss.row_attr:
        theta = authority_of(attr)
        if theta not in pks:
            raise UnknownAuthorityError(f"no public key for authority {theta!r} (attribute {attr!r})")

    n = lsss.width
    s = rand_scalar(rng)
    zvec = [s] + [rand_scalar(rng) for _ in range(n - 1)]
    wvec = [0] + [rand_scalar(rng) for _ in range(n - 1)]

    rows = []
    sink_rows = []
    for x, attr in enumerate(lsss.row_attr):
        pk = pks[authority_of(attr)]
        row = lsss.rows[x]
        lam = sum(r * z for r, z in zip(row, zvec)) % GROUP_ORDER
        om = sum(r * w for r, w in zip(row, wvec)) % GROUP_ORDER
        t = rand_scalar(rng)
        rows.append(CiphertextRow(
            attr=attr,
            c1=(gp.ctx.gt ** lam) * (pk.t ** t),
            c2=gp.ctx.g2 ** (-t % GROUP_ORDER),
            c3=(pk.b2 ** t) * (gp.ctx.g2 ** om),
            c4=gp.hash_attr(attr) ** t,
        ))
        sink_rows.append({"lam": lam, "om": om, "t": t})
    if _randomness_sink is not None:
        _randomness_sink["s"] = s
        _randomness_sink["rows"] = sink_rows
    return Ciphertext(policy=acp, lsss=lsss, c0=message * (gp.ctx.gt ** s), rows=tuple(rows))


@dataclass(frozen=True)
class DecryptionKey:
    gid: bytes
    attr: str
    k0: G1Elem
    k1: G2Elem


def abe_keygen(
    gid: bytes,
    gp: GlobalParams,
    attr: str,
    sk: AuthorityKeyPair,
    rng: random.Random | None = None,
) -> DecryptionKey:
    """Issue the (gid, attr) key: K0 = g1^a * H(gid)^b * F(attr)^d, K1 = g2^d."""
    if authority_of(attr) != sk.theta:
        raise CpabeError(f"attribute {attr!r} does not belong to authority {sk.theta!r}")
    d = rand_scalar(rng)
    k0 = g1_multi_exp([
        (gp.ctx.g1, sk.alpha),
        (gp.hash_gid(gid), sk.beta),
        (gp.hash_attr(attr), d),
    ])
    return DecryptionKey(gid=gid, attr=attr, k0=k0, k1=gp.ctx.g2 ** d)


def key_is_valid(gp: GlobalParams, key: DecryptionKey, auth_pub: AuthorityPublicKey) -> bool:
    """Public well-formedness check:
    e(K0, g2) == e(g1^alpha, g2) * e(H(gid), g2^beta) * e(F(attr), K1)."""
    h = gp.hash_gid(key.gid)
    f = gp.hash_attr(key.attr)
    return pairing_check([
        (key.k0 / auth_pub.a1, gp.ctx.g2),
        (h.inverse(), auth_pub.b2),
        (f.inverse(), key.k1),
    ])


def abe_decrypt(gp: GlobalParams, ct: Ciphertext, keys: Iterable[DecryptionKey]) -> GTElem:
    """Recover the GT message from keys of a single sharing instance whose
    attributes satisfy the policy.

    Per used row, D_x = C1_x * e(H(gid), C3_x) * e(K0, C2_x) * e(C4_x, K1)
    equals e(g1,g2)^{lam_x} * e(H(gid), g2)^{om_x}; combining the rows with
    the reconstruction coefficients cancels the zero-shares and leaves
    e(g1,g2)^s.  The pairings are evaluated as one shared product.
    """
    key_list = list(keys)
    if not key_list:
        raise PolicyNotSatisfiedError("no keys supplied")
    gids = {k.gid for k in key_list}
    if len(gids) != 1:
        raise MixedGidError("keys span multiple sharing instances")
    gid = key_list[0].gid
    by_attr = {}
    for k in key_list:
        by_attr.setdefault(k.attr, k)

    coeffs = policy_mod.reconstruction_coeffs(ct.lsss, set(by_attr))
    if coeffs is None:
        raise PolicyNotSatisfiedError("attribute set does not satisfy the ciphertext policy")

    h = gp.hash_gid(gid)
    c1_prod = GTElem.identity()
    c3_prod = G2Elem.identity()
    pairs = []
    for x, c in coeffs.items():
        row = ct.rows[x]
        key = by_attr[row.attr]
        c1_prod = c1_prod * (row.c1 ** c)
        c3_prod = c3_prod * (row.c3 ** c)
        pairs.append((key.k0 ** c, row.c2))
        pairs.append((row.c4 ** c, key.k1))
    pairs.append((h, c3_prod))
    denom = c1_prod * multi_pairing(pairs)
    return ct.c0 / denom


@dataclass(frozen=True)
class HybridCiphertext:
    abe: Ciphertext
    ct: bytes


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise CpabeError("xor operands must have equal length")
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(len(a), "little")


def hybrid_encrypt(
    gp: GlobalParams,
    message: bytes,
    acp: str,
    pks: Mapping[str, AuthorityPublicKey],
    rng: random.Random | None = None,
) -> HybridCiphertext:
    """ct = m XOR kdf(M) with M a fresh uniform GT element encrypted under acp."""
    if len(message) == 0:
        raise CpabeError("message must be nonempty")
    seed = rand_gt(rng)
    abe = abe_encrypt(gp, seed, acp, pks, rng)
    return HybridCiphertext(abe=abe, ct=xor_bytes(message, kdf(seed, len(message))))


def hybrid_decrypt(gp: GlobalParams, hc: HybridCiphertext, keys: Iterable[DecryptionKey]) -> bytes:
    seed = abe_decrypt(gp, hc.abe, keys)
    return xor_bytes(hc.ct, kdf(seed, len(hc.ct)))


# ---------------------------------------------------------------------------
# JSON envelopes (hex-encoded canonical element strings, curve-versioned)
# ---------------------------------------------------------------------------

def _check_curve(obj: Mapping) -> None:
    if obj.get("curve") != CURVE_ID:
        raise CpabeError(f"unsupported or missing curve id {obj.get('curve')!r}")


def gp_to_json(gp: GlobalParams) -> str:
    return json.dumps({
        "curve": gp.ctx.curve_id,
        "order": hex(gp.ctx.order_p),
        "g1": gp.ctx.g1.encode().hex(),
        "g2": gp.ctx.g2.encode().hex(),
        "domain_tag_h": gp.hashes.domain_tag_h.hex(),
        "domain_tag_f": gp.hashes.domain_tag_f.hex(),
        "security_level": gp.security_level,
    }, indent=None, sort_keys=True)


def gp_from_json(raw: str) -> GlobalParams:
    obj = json.loads(raw)
    _check_curve(obj)
    gp = GlobalParams(
        ctx=GroupContext(curve_id=obj["curve"]),
        hashes=HashToGroupConfig(
            domain_tag_h=bytes.fromhex(obj["domain_tag_h"]),
            domain_tag_f=bytes.fromhex(obj["domain_tag_f"]),
        ),
        security_level=int(obj["security_level"]),
    )
    if G1Elem.decode(bytes.fromhex(obj["g1"])) != gp.ctx.g1:
        raise CpabeError("generator mismatch in serialized parameters")
    if G2Elem.decode(bytes.fromhex(obj["g2"])) != gp.ctx.g2:
        raise CpabeError("generator mismatch in serialized parameters")
    return gp


def authority_pub_to_json(pk: AuthorityPublicKey) -> dict:
    return {
        "curve": CURVE_ID,
        "theta": pk.theta,
        "a1": pk.a1.encode().hex(),
        "a2": pk.a2.encode().hex(),
        "b2": pk.b2.encode().hex(),
        "t": pk.t.encode().hex(),
    }


def authority_pub_from_json(obj: Mapping) -> AuthorityPublicKey:
    _check_curve(obj)
    return AuthorityPublicKey(
        theta=obj["theta"],
        a1=G1Elem.decode(bytes.fromhex(obj["a1"])),
        a2=G2Elem.decode(bytes.fromhex(obj["a2"])),
        b2=G2Elem.decode(bytes.fromhex(obj["b2"])),
        t=GTElem.decode(bytes.fromhex(obj["t"])),
    )


def ciphertext_to_json(ct: Ciphertext) -> dict:
    return {
        "curve": CURVE_ID,
        "policy": ct.policy,
        "c0": ct.c0.encode().hex(),
        "rows": [
            {
                "attr": r.attr,
                "c1": r.c1.encode().hex(),
                "c2": r.c2.encode().hex(),
                "c3": r.c3.encode().hex(),
                "c4": r.c4.encode().hex(),
            }
            for r in ct.rows
        ],
    }


def ciphertext_from_json(obj: Mapping) -> Ciphertext:
    _check_curve(obj)
    acp = obj["policy"]
    lsss = policy_mod.policy_to_lsss(policy_mod.parse_policy(acp))
    rows = tuple(
        CiphertextRow(
            attr=r["attr"],
            c1=GTElem.decode(bytes.fromhex(r["c1"])),
            c2=G2Elem.decode(bytes.fromhex(r["c2"])),
            c3=G2Elem.decode(bytes.fromhex(r["c3"])),
            c4=G1Elem.decode(bytes.fromhex(r["c4"])),
        )
        for r in obj["rows"]
    )
    if tuple(r.attr for r in rows) != lsss.row_attr:
        raise CpabeError("ciphertext rows do not match the policy")
    return Ciphertext(policy=acp, lsss=lsss,
                      c0=GTElem.decode(bytes.fromhex(obj["c0"])), rows=rows)


def key_to_json(key: DecryptionKey) -> dict:
    return {
        "curve": CURVE_ID,
        "gid": key.gid.hex(),
        "attr": key.attr,
        "k0": key.k0.encode().hex(),
        "k1": key.k1.encode().hex(),
    }


def key_from_json(obj: Mapping) -> DecryptionKey:
    _check_curve(obj)
    return DecryptionKey(
        gid=bytes.fromhex(obj["gid"]),
        attr=obj["attr"],
        k0=G1Elem.decode(bytes.fromhex(obj["k0"])),
        k1=G2Elem.decode(bytes.fromhex(obj["k1"])),
    )
