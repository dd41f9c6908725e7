"""Storage provider: object store, grant mirroring, and fetch gating."""

import hashlib
import random

import pytest

from abeshare import cpabe as C
from abeshare import dsp as D

ACP = "level25@AUTH1 OR female@AUTH3"
GID = b"dsp-gid"


@pytest.fixture()
def hc(gp, pks, rng):
    return C.hybrid_encrypt(gp, b"payload-bytes-123", ACP, pks, rng)


def settled_event(gid, user, pk_u, seq=5):
    return {"seq": seq, "op": "settled", "gid": gid.hex(), "user": user,
            "attrs": ["level25@AUTH1"], "pk_u": pk_u.encode().hex()}


class TestStore:
    def test_store_and_meta(self, hc):
        dsp = D.Dsp()
        dsp.store("owner", GID, hc)
        assert dsp.has_object(GID)
        meta = dsp.object_meta(GID)
        assert meta["owner"] == "owner" and meta["ct_len"] == len(hc.ct)

    def test_duplicate_store_rejected(self, hc):
        dsp = D.Dsp()
        dsp.store("owner", GID, hc)
        with pytest.raises(D.DuplicateObjectError):
            dsp.store("owner", GID, hc)

    def test_stored_bytes_unmodified(self, gp, user, hc, rng):
        dsp = D.Dsp()
        dsp.store("owner", GID, hc)
        dsp.sync_grants([settled_event(GID, "alice", user.pk_u)])
        token = D.make_grant_token(user.y, user.pk_u, GID, "alice", 5, rng)
        fetched = dsp.fetch("alice", GID, token)
        assert hashlib.sha256(fetched.ct).digest() == hashlib.sha256(hc.ct).digest()
        assert fetched.abe == hc.abe

    def test_disk_persistence_roundtrip(self, gp, user, hc, rng, tmp_path):
        dsp = D.Dsp(root=tmp_path)
        dsp.store("owner", GID, hc)
        # a new process would reload from the index
        dsp2 = D.Dsp(root=tmp_path)
        assert dsp2.has_object(GID)
        dsp2.sync_grants([settled_event(GID, "alice", user.pk_u)])
        token = D.make_grant_token(user.y, user.pk_u, GID, "alice", 5, rng)
        assert dsp2.fetch("alice", GID, token).ct == hc.ct


class TestGrants:
    def test_settled_event_creates_grant(self, user):
        dsp = D.Dsp()
        dsp.sync_grants([settled_event(GID, "alice", user.pk_u)])
        assert (GID, "alice") in dsp.grants()

    def test_sync_is_idempotent(self, user):
        dsp = D.Dsp()
        events = [settled_event(GID, "alice", user.pk_u)]
        dsp.sync_grants(events)
        first = dsp.grants()
        dsp.sync_grants(events)
        dsp.sync_grants(events)
        assert dsp.grants() == first

    def test_non_settled_events_ignored(self, user):
        dsp = D.Dsp()
        dsp.sync_grants([{"seq": 1, "op": "deposited", "gid": GID.hex(), "user": "alice"}])
        assert dsp.grants() == {}


class TestFetch:
    def test_no_grant_denied(self, gp, user, hc, rng):
        dsp = D.Dsp()
        dsp.store("owner", GID, hc)
        token = D.make_grant_token(user.y, user.pk_u, GID, "alice", 1, rng)
        with pytest.raises(D.AccessDeniedError):
            dsp.fetch("alice", GID, token)

    def test_wrong_gid_denied(self, gp, user, hc, rng):
        dsp = D.Dsp()
        dsp.store("owner", GID, hc)
        dsp.sync_grants([settled_event(GID, "alice", user.pk_u)])
        other_gid = b"other-gid"
        token = D.make_grant_token(user.y, user.pk_u, other_gid, "alice", 5, rng)
        with pytest.raises(D.AccessDeniedError):
            dsp.fetch("alice", other_gid, token)

    def test_token_under_wrong_key_denied(self, gp, user, hc, rng):
        imposter = C.user_keygen(gp, rng)
        dsp = D.Dsp()
        dsp.store("owner", GID, hc)
        dsp.sync_grants([settled_event(GID, "alice", user.pk_u)])
        # claims to be alice but signs with its own key
        forged = D.make_grant_token(imposter.y, imposter.pk_u, GID, "alice", 5, rng)
        with pytest.raises(D.AccessDeniedError):
            dsp.fetch("alice", GID, forged)

    def test_token_for_wrong_seq_denied(self, gp, user, hc, rng):
        dsp = D.Dsp()
        dsp.store("owner", GID, hc)
        dsp.sync_grants([settled_event(GID, "alice", user.pk_u, seq=5)])
        stale = D.make_grant_token(user.y, user.pk_u, GID, "alice", 4, rng)
        with pytest.raises(D.AccessDeniedError):
            dsp.fetch("alice", GID, stale)

    def test_differential_against_ledger_journal(self, gp, user, pks, rng):
        """fetch succeeds iff a settled event exists for (gid, user)."""
        users = {f"u{i}": C.user_keygen(gp, rng) for i in range(4)}
        events = []
        granted = set()
        seq = 0
        for name, keys in users.items():
            seq += 1
            if rng.random() < 0.5:
                events.append(settled_event(GID + name.encode(), name, keys.pk_u, seq))
                granted.add(name)
        dsp = D.Dsp()
        stored = {}
        for name, keys in users.items():
            gid = GID + name.encode()
            stored[name] = C.hybrid_encrypt(gp, b"x" + name.encode(), ACP, pks, rng)
            dsp.store("owner", gid, stored[name])
        dsp.sync_grants(events)
        for name, keys in users.items():
            gid = GID + name.encode()
            grant = dsp.grants().get((gid, name))
            token = D.make_grant_token(keys.y, keys.pk_u, gid, name,
                                       grant.granted_at if grant else 0, rng)
            if name in granted:
                assert dsp.fetch(name, gid, token).ct == stored[name].ct
            else:
                with pytest.raises(D.AccessDeniedError):
                    dsp.fetch(name, gid, token)
