"""Blockchain-deliverable encrypted keys with proofs of honest issuance.

An authority never sends a usable key over the public ledger.  Instead it
blinds the key under the recipient's public key ``pk_u = g1^y``::

    EK0 = pk_u^alpha * H(gid)^beta * F(u)^d     (K0 with g1 replaced by pk_u)
    EK1 = g2^d
    EK2 = g1^d                                  (for the pairing-check verifier)

Only the holder of y unblinds: ``K0 = EK0 / (g1^alpha)^(y-1)``.

The attached proof is a three-secret linear Sigma protocol made
non-interactive: commitments (EK0', EK1', EK2') under fresh (a', b', d'),
challenge ``c`` from the transcript hash, responses ``w_i = x' + c*x``.  A
verifier checks the two response equations plus a pairing-product identity
that binds the same ``d`` into EK0 and EK1; ``check_key_pc`` is the variant
whose group work is G1-only plus boolean pairing checks, mirroring what a
contract on an EIP-197 chain would run.  Both verifiers recompute the
challenge and reject a submitted proof whose ``c`` disagrees.

By default the challenge transcript binds the full issuance context
(curve, gid, attribute, recipient, issuer, all six group elements), which
blocks replaying a proof in a different context.  ``transcript="narrow"``
reproduces the minimal two-element transcript (EK0, EK0') for fidelity
testing; the ledger always verifies with the full transcript.

``simulate_proof`` (honest-verifier zero-knowledge) and ``extract_witness``
(two accepting transcripts with distinct challenges yield the secrets) are
the executable halves of the usual Sigma-protocol security argument; the
explicit-challenge verifier entry points exist so tests can play the
programmed random oracle.
"""

from __future__ import annotations

import functools
import json
import random
from dataclasses import dataclass
from typing import Literal

from abeshare.algebra import (
    GROUP_ORDER,
    CURVE_ID,
    G1Elem,
    G2Elem,
    fiat_shamir,
    g1_multi_exp,
    pairing_check,
    rand_scalar,
    scalar_to_bytes,
)
from abeshare.cpabe import (
    AuthorityKeyPair,
    AuthorityPublicKey,
    DecryptionKey,
    GlobalParams,
    key_is_valid,
)

__all__ = [
    "AccountabilityError",
    "InvalidRecoveryError",
    "ExtractionError",
    "EncryptedKey",
    "IssuanceWitness",
    "KeyProof",
    "abe_enc_key",
    "get_key",
    "gen_proofs",
    "check_key",
    "check_key_pc",
    "check_key_with_challenge",
    "check_key_pc_with_challenge",
    "simulate_proof",
    "extract_witness",
    "submission_to_json",
    "submission_from_json",
]

TranscriptMode = Literal["full", "narrow"]


class AccountabilityError(ValueError):
    pass


class InvalidRecoveryError(AccountabilityError):
    """Recovered key fails the public validity check (wrong secret or
    tampered encrypted key)."""


class ExtractionError(AccountabilityError):
    """Witness extraction needs two accepting transcripts with distinct
    challenges over the same commitments."""


@dataclass(frozen=True)
class EncryptedKey:
    ek0: G1Elem
    ek1: G2Elem
    ek2: G1Elem
    gid: bytes
    attr: str
    issuer: str
    target: G1Elem  # recipient public key pk_u

    def is_well_formed(self) -> bool:
        # EK1 and EK2 carry the same exponent in both source groups
        return pairing_check([(self.ek2, G2Elem.generator()),
                              (G1Elem.generator().inverse(), self.ek1)])


@dataclass(frozen=True)
class IssuanceWitness:
    d: int
    alpha: int
    beta: int


@dataclass(frozen=True)
class KeyProof:
    ek0p: G1Elem
    ek1p: G2Elem
    ek2p: G1Elem
    c: int
    w1: int
    w2: int
    w3: int


def abe_enc_key(
    gid: bytes,
    gp: GlobalParams,
    attr: str,
    sk: AuthorityKeyPair,
    pk_u: G1Elem,
    rng: random.Random | None = None,
) -> tuple[EncryptedKey, IssuanceWitness]:
    """Issue a key for (gid, attr) encrypted to pk_u, keeping the witness."""
    d = rand_scalar(rng)
    ek0 = g1_multi_exp([
        (pk_u, sk.alpha),
        (gp.hash_gid(gid), sk.beta),
        (gp.hash_attr(attr), d),
    ])
    ek = EncryptedKey(
        ek0=ek0,
        ek1=gp.ctx.g2 ** d,
        ek2=gp.ctx.g1 ** d,
        gid=gid,
        attr=attr,
        issuer=sk.theta,
        target=pk_u,
    )
    return ek, IssuanceWitness(d=d, alpha=sk.alpha, beta=sk.beta)


def get_key(ek: EncryptedKey, gp: GlobalParams, a1: G1Elem, y: int,
            auth_pub: AuthorityPublicKey | None = None) -> DecryptionKey:
    """Unblind an encrypted key with the recipient secret y.

    K0 = EK0 / a1^(y-1) where a1 = g1^alpha of the issuer and y-1 is plain
    modular subtraction in the exponent.  If ``auth_pub`` is given, the
    recovered key is checked against the public pairing invariant and a
    failure (wrong y, tampered EK) raises ``InvalidRecoveryError``.
    """
    k0 = ek.ek0 / (a1 ** ((y - 1) % GROUP_ORDER))
    key = DecryptionKey(gid=ek.gid, attr=ek.attr, k0=k0, k1=ek.ek1)
    if auth_pub is not None and not key_is_valid(gp, key, auth_pub):
        raise InvalidRecoveryError("recovered key fails the public validity check")
    return key


def _transcript(
    gp: GlobalParams,
    gid: bytes,
    attr: str,
    pk_u: G1Elem,
    issuer: str,
    ek: EncryptedKey,
    ek0p: G1Elem,
    ek1p: G2Elem,
    ek2p: G1Elem,
    mode: TranscriptMode,
) -> list[bytes]:
    if mode == "narrow":
        return [ek.ek0.encode(), ek0p.encode()]
    return [
        b"abeshare-key-proof",
        gp.ctx.curve_id.encode(),
        gid,
        attr.encode(),
        pk_u.encode(),
        issuer.encode(),
        ek.ek0.encode(),
        ek.ek1.encode(),
        ek.ek2.encode(),
        ek0p.encode(),
        ek1p.encode(),
        ek2p.encode(),
    ]


def gen_proofs(
    witness: IssuanceWitness,
    gid: bytes,
    attr: str,
    pk_u: G1Elem,
    ek: EncryptedKey,
    gp: GlobalParams,
    rng: random.Random | None = None,
    transcript: TranscriptMode = "full",
) -> KeyProof:
    """Prove knowledge of (alpha, beta, d) behind an encrypted key."""
    ap = rand_scalar(rng)
    bp = rand_scalar(rng)
    dp = rand_scalar(rng)
    ek0p = g1_multi_exp([
        (pk_u, ap),
        (gp.hash_gid(gid), bp),
        (gp.hash_attr(attr), dp),
    ])
    ek1p = gp.ctx.g2 ** dp
    ek2p = gp.ctx.g1 ** dp
    c = fiat_shamir(_transcript(gp, gid, attr, pk_u, ek.issuer, ek, ek0p, ek1p, ek2p, transcript))
    return KeyProof(
        ek0p=ek0p,
        ek1p=ek1p,
        ek2p=ek2p,
        c=c,
        w1=(ap + c * witness.alpha) % GROUP_ORDER,
        w2=(bp + c * witness.beta) % GROUP_ORDER,
        w3=(dp + c * witness.d) % GROUP_ORDER,
    )


def _eq_responses_g1(gp, gid, attr, pk_u, proof, ek, c) -> bool:
    # pk_u^w1 * H(gid)^w2 * F(u)^w3 == EK0' * EK0^c
    lhs = g1_multi_exp([
        (pk_u, proof.w1),
        (gp.hash_gid(gid), proof.w2),
        (gp.hash_attr(attr), proof.w3),
    ])
    return lhs == proof.ek0p * (ek.ek0 ** c)


@functools.lru_cache(maxsize=4096)
def _eq_binding_pairings(gp, gid, attr, pk_u, ek, auth_pub) -> bool:
    # e(pk_u, g2^a) * e(H(gid), g2^b) * e(F(u), EK1) == e(EK0, g2)
    # pure predicate over immutable values; cached because both verifier
    # variants evaluate it on the same submission
    return pairing_check([
        (pk_u, auth_pub.a2),
        (gp.hash_gid(gid), auth_pub.b2),
        (gp.hash_attr(attr), ek.ek1),
        (ek.ek0.inverse(), gp.ctx.g2),
    ])


def check_key_with_challenge(
    ek: EncryptedKey,
    proof: KeyProof,
    gid: bytes,
    attr: str,
    pk_u: G1Elem,
    auth_pub: AuthorityPublicKey,
    gp: GlobalParams,
    challenge: int,
) -> bool:
    """Sigma-equation verifier with a caller-supplied challenge.

    This is the programmed-random-oracle entry point used by the
    zero-knowledge tests; production verification goes through
    ``check_key``, which derives the challenge itself.
    """
    c = challenge % GROUP_ORDER
    if not _eq_responses_g1(gp, gid, attr, pk_u, proof, ek, c):
        return False
    if gp.ctx.g2 ** proof.w3 != proof.ek1p * (ek.ek1 ** c):
        return False
    return _eq_binding_pairings(gp, gid, attr, pk_u, ek, auth_pub)


def check_key_pc_with_challenge(
    ek: EncryptedKey,
    proof: KeyProof,
    gid: bytes,
    attr: str,
    pk_u: G1Elem,
    auth_pub: AuthorityPublicKey,
    gp: GlobalParams,
    challenge: int,
) -> bool:
    """Pairing-check variant with a caller-supplied challenge: the second
    response equation moves to G1 via EK2, and a pairing check ties EK2 to
    EK1; the binding identity is kept as well (conservative superset)."""
    c = challenge % GROUP_ORDER
    if not _eq_responses_g1(gp, gid, attr, pk_u, proof, ek, c):
        return False
    if gp.ctx.g1 ** proof.w3 != proof.ek2p * (ek.ek2 ** c):
        return False
    if not pairing_check([(ek.ek2, gp.ctx.g2), (gp.ctx.g1.inverse(), ek.ek1)]):
        return False
    return _eq_binding_pairings(gp, gid, attr, pk_u, ek, auth_pub)


def _recompute_challenge(ek, proof, gid, attr, pk_u, gp, transcript):
    return fiat_shamir(_transcript(gp, gid, attr, pk_u, ek.issuer, ek,
                                   proof.ek0p, proof.ek1p, proof.ek2p, transcript))


def check_key(
    ek: EncryptedKey,
    proof: KeyProof,
    gid: bytes,
    attr: str,
    pk_u: G1Elem,
    auth_pub: AuthorityPublicKey,
    gp: GlobalParams,
    transcript: TranscriptMode = "full",
) -> bool:
    """Full verification of an encrypted key and its proof (G2 equation form)."""
    c = _recompute_challenge(ek, proof, gid, attr, pk_u, gp, transcript)
    if proof.c != c:
        return False
    return check_key_with_challenge(ek, proof, gid, attr, pk_u, auth_pub, gp, c)


def check_key_pc(
    ek: EncryptedKey,
    proof: KeyProof,
    gid: bytes,
    attr: str,
    pk_u: G1Elem,
    auth_pub: AuthorityPublicKey,
    gp: GlobalParams,
    transcript: TranscriptMode = "full",
) -> bool:
    """Full verification, pairing-check variant (the on-ledger verifier)."""
    c = _recompute_challenge(ek, proof, gid, attr, pk_u, gp, transcript)
    if proof.c != c:
        return False
    return check_key_pc_with_challenge(ek, proof, gid, attr, pk_u, auth_pub, gp, c)


def simulate_proof(
    gid: bytes,
    attr: str,
    pk_u: G1Elem,
    ek: EncryptedKey,
    gp: GlobalParams,
    rng: random.Random | None = None,
) -> KeyProof:
    """Honest-verifier zero-knowledge simulator: samples the responses and
    the challenge first, then solves for commitments that make every
    equation accept.  Output passes the explicit-challenge verifiers with
    its own ``c`` and is rejected by the production verifiers, whose
    challenge recomputation unmasks it."""
    w1 = rand_scalar(rng)
    w2 = rand_scalar(rng)
    w3 = rand_scalar(rng)
    c = rand_scalar(rng)
    ek0p = g1_multi_exp([
        (pk_u, w1),
        (gp.hash_gid(gid), w2),
        (gp.hash_attr(attr), w3),
    ]) / (ek.ek0 ** c)
    ek1p = (gp.ctx.g2 ** w3) / (ek.ek1 ** c)
    ek2p = (gp.ctx.g1 ** w3) / (ek.ek2 ** c)
    return KeyProof(ek0p=ek0p, ek1p=ek1p, ek2p=ek2p, c=c, w1=w1, w2=w2, w3=w3)


def extract_witness(t1: KeyProof, t2: KeyProof) -> tuple[int, int, int]:
    """Knowledge extractor: two transcripts over the same commitments with
    distinct challenges reveal (alpha, beta, d) by difference quotients."""
    if (t1.ek0p, t1.ek1p, t1.ek2p) != (t2.ek0p, t2.ek1p, t2.ek2p):
        raise ExtractionError("transcripts do not share commitments")
    if t1.c % GROUP_ORDER == t2.c % GROUP_ORDER:
        raise ExtractionError("challenges are equal; extraction impossible")
    dc = pow((t2.c - t1.c) % GROUP_ORDER, -1, GROUP_ORDER)
    alpha = (t2.w1 - t1.w1) * dc % GROUP_ORDER
    beta = (t2.w2 - t1.w2) * dc % GROUP_ORDER
    d = (t2.w3 - t1.w3) * dc % GROUP_ORDER
    return alpha, beta, d


# ---------------------------------------------------------------------------
# Ledger wire format: one envelope per key submission
# ---------------------------------------------------------------------------

_FORMAT = "abeshare-key-submission/v1"


def submission_to_json(ek: EncryptedKey, proof: KeyProof) -> str:
    return json.dumps({
        "format": _FORMAT,
        "curve": CURVE_ID,
        "gid": ek.gid.hex(),
        "attr": ek.attr,
        "issuer": ek.issuer,
        "target_pk": ek.target.encode().hex(),
        "ek0": ek.ek0.encode().hex(),
        "ek1": ek.ek1.encode().hex(),
        "ek2": ek.ek2.encode().hex(),
        "proof": {
            "ek0p": proof.ek0p.encode().hex(),
            "ek1p": proof.ek1p.encode().hex(),
            "ek2p": proof.ek2p.encode().hex(),
            "c": scalar_to_bytes(proof.c).hex(),
            "w1": scalar_to_bytes(proof.w1).hex(),
            "w2": scalar_to_bytes(proof.w2).hex(),
            "w3": scalar_to_bytes(proof.w3).hex(),
        },
    }, sort_keys=True)


def submission_from_json(raw: str) -> tuple[EncryptedKey, KeyProof]:
    obj = json.loads(raw)
    if obj.get("format") != _FORMAT:
        raise AccountabilityError(f"unknown envelope format {obj.get('format')!r}")
    if obj.get("curve") != CURVE_ID:
        raise AccountabilityError(f"unsupported curve {obj.get('curve')!r}")
    ek = EncryptedKey(
        ek0=G1Elem.decode(bytes.fromhex(obj["ek0"])),
        ek1=G2Elem.decode(bytes.fromhex(obj["ek1"])),
        ek2=G1Elem.decode(bytes.fromhex(obj["ek2"])),
        gid=bytes.fromhex(obj["gid"]),
        attr=obj["attr"],
        issuer=obj["issuer"],
        target=G1Elem.decode(bytes.fromhex(obj["target_pk"])),
    )
    p = obj["proof"]
    proof = KeyProof(
        ek0p=G1Elem.decode(bytes.fromhex(p["ek0p"])),
        ek1p=G2Elem.decode(bytes.fromhex(p["ek1p"])),
        ek2p=G1Elem.decode(bytes.fromhex(p["ek2p"])),
        c=int.from_bytes(bytes.fromhex(p["c"]), "big"),
        w1=int.from_bytes(bytes.fromhex(p["w1"]), "big"),
        w2=int.from_bytes(bytes.fromhex(p["w2"]), "big"),
        w3=int.from_bytes(bytes.fromhex(p["w3"]), "big"),
    )
    return ek, proof
