"""Data storage provider: holds hybrid ciphertexts, releases them only to
users the ledger has settled.

The DSP is honest but curious — it follows the protocol and never sees
plaintext (its whole interface carries ciphertext bytes), but everything it
stores is treated as observable.  Grants are not taken from callers: the DSP
derives them exclusively by scanning ledger events, so a fetch succeeds iff
a settled event exists for that (gid, user).

User-to-DSP authentication (which the contract layer leaves open) is a
minimal proof of key possession: a Schnorr signature under the user's
protocol key pair ``(y, pk_u = g1^y)`` over the grant context.  It is
deliberately small and swappable.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from abeshare.algebra import (
    GROUP_ORDER,
    G1Elem,
    fiat_shamir,
    rand_scalar,
)
from abeshare.cpabe import (
    Ciphertext,
    HybridCiphertext,
    ciphertext_from_json,
    ciphertext_to_json,
)

__all__ = [
    "DspError",
    "DuplicateObjectError",
    "AccessDeniedError",
    "StoredObject",
    "AccessGrant",
    "GrantToken",
    "make_grant_token",
    "Dsp",
]


class DspError(ValueError):
    pass


class DuplicateObjectError(DspError):
    pass


class AccessDeniedError(DspError):
    pass


@dataclass(frozen=True)
class StoredObject:
    gid: bytes
    hc: HybridCiphertext
    owner: str


@dataclass(frozen=True)
class AccessGrant:
    gid: bytes
    user: str
    granted_at: int
    pk_u: G1Elem


@dataclass(frozen=True)
class GrantToken:
    """Schnorr proof of possession of the secret behind the granted pk_u."""

    commitment: G1Elem
    response: int


_TOKEN_DST = b"abeshare-v1-dsp-fetch"


def _token_challenge(gid: bytes, user: str, granted_at: int,
                     commitment: G1Elem, pk_u: G1Elem) -> int:
    return fiat_shamir([
        _TOKEN_DST,
        gid,
        user.encode(),
        granted_at.to_bytes(8, "big"),
        commitment.encode(),
        pk_u.encode(),
    ])


def make_grant_token(y: int, pk_u: G1Elem, gid: bytes, user: str, granted_at: int,
                     rng: random.Random | None = None) -> GrantToken:
    k = rand_scalar(rng)
    commitment = G1Elem.generator() ** k
    c = _token_challenge(gid, user, granted_at, commitment, pk_u)
    return GrantToken(commitment=commitment, response=(k + c * y) % GROUP_ORDER)


def _token_valid(token: GrantToken, grant: AccessGrant) -> bool:
    c = _token_challenge(grant.gid, grant.user, grant.granted_at,
                         token.commitment, grant.pk_u)
    return G1Elem.generator() ** token.response == token.commitment * (grant.pk_u ** c)


class Dsp:
    """One object per gid; grants mirror the ledger's settled events.

    With ``root`` set, objects persist under ``root/objects/`` with a JSON
    index keyed by gid; otherwise storage is in memory only.
    """

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else None
        self._objects: dict[bytes, StoredObject] = {}
        self._grants: dict[tuple[bytes, str], AccessGrant] = {}
        if self.root is not None:
            (self.root / "objects").mkdir(parents=True, exist_ok=True)
            self._load_index()

    # -- persistence --------------------------------------------------------

    def _index_path(self) -> Path:
        return self.root / "index.json"

    def _blob_path(self, gid: bytes) -> Path:
        return self.root / "objects" / (hashlib.sha256(gid).hexdigest() + ".bin")

    def _load_index(self):
        if not self._index_path().exists():
            return
        index = json.loads(self._index_path().read_text())
        for gid_hex, meta in index.items():
            gid = bytes.fromhex(gid_hex)
            raw = self._blob_path(gid).read_bytes()
            header, _, ct = raw.partition(b"\n")
            abe = ciphertext_from_json(json.loads(header.decode()))
            self._objects[gid] = StoredObject(
                gid=gid, hc=HybridCiphertext(abe=abe, ct=ct), owner=meta["owner"])

    def _persist(self, obj: StoredObject):
        if self.root is None:
            return
        header = json.dumps(ciphertext_to_json(obj.hc.abe)).encode()
        self._blob_path(obj.gid).write_bytes(header + b"\n" + obj.hc.ct)
        index = {o.gid.hex(): {"owner": o.owner, "file": self._blob_path(o.gid).name}
                 for o in self._objects.values()}
        self._index_path().write_text(json.dumps(index, sort_keys=True, indent=2))

    # -- interface ----------------------------------------------------------

    def store(self, owner: str, gid: bytes, hc: HybridCiphertext) -> None:
        if gid in self._objects:
            raise DuplicateObjectError(f"object for gid {gid.hex()} already stored")
        obj = StoredObject(gid=gid, hc=hc, owner=owner)
        self._objects[gid] = obj
        self._persist(obj)

    def has_object(self, gid: bytes) -> bool:
        return gid in self._objects

    def object_meta(self, gid: bytes) -> Optional[dict]:
        obj = self._objects.get(gid)
        if obj is None:
            return None
        return {"gid": gid.hex(), "owner": obj.owner, "ct_len": len(obj.hc.ct)}

    def sync_grants(self, events: Iterable[dict]) -> None:
        """Mirror settled events into the grant set; replays are idempotent."""
        for event in events:
            if event.get("op") != "settled" or event.get("pk_u") is None:
                continue
            gid = bytes.fromhex(event["gid"])
            user = event["user"]
            self._grants[(gid, user)] = AccessGrant(
                gid=gid,
                user=user,
                granted_at=event["seq"],
                pk_u=G1Elem.decode(bytes.fromhex(event["pk_u"])),
            )

    def grants(self) -> dict[tuple[bytes, str], AccessGrant]:
        return dict(self._grants)

    def fetch(self, user: str, gid: bytes, token: GrantToken) -> HybridCiphertext:
        """Release the ciphertext iff the ledger granted (gid, user) and the
        caller proves possession of the granted key."""
        grant = self._grants.get((gid, user))
        if grant is None:
            raise AccessDeniedError(f"no grant for user {user!r} on gid {gid.hex()}")
        if not _token_valid(token, grant):
            raise AccessDeniedError("grant token verification failed")
        obj = self._objects.get(gid)
        if obj is None:
            raise DspError(f"granted object {gid.hex()} is not stored here")
        return obj.hc
