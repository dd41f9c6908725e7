"""Encrypted keys, their proofs, both verifiers, and the Sigma-protocol
security oracles (extraction and simulation)."""

import random
from dataclasses import replace

import pytest

from abeshare import accountability as K
from abeshare import algebra as A
from abeshare import cpabe as C

GID = b"issuance-gid"
ATTR = "level25@AUTH1"


@pytest.fixture()
def issuance(gp, authorities, user, rng):
    auth = authorities["AUTH1"]
    ek, w = K.abe_enc_key(GID, gp, ATTR, auth, user.pk_u, rng)
    proof = K.gen_proofs(w, GID, ATTR, user.pk_u, ek, gp, rng)
    return auth, ek, w, proof


class TestEncKey:
    def test_ek1_ek2_share_exponent(self, issuance, gp):
        _, ek, _, _ = issuance
        assert A.pairing_check([(ek.ek2, gp.ctx.g2), (gp.ctx.g1.inverse(), ek.ek1)])
        assert ek.is_well_formed()

    def test_differs_from_plain_key_with_same_randomness(self, gp, authorities, user):
        # identical seeds draw the same d, isolating the pk_u-vs-g1 base change
        auth = authorities["AUTH1"]
        key = C.abe_keygen(GID, gp, ATTR, auth, random.Random(5))
        ek, _ = K.abe_enc_key(GID, gp, ATTR, auth, user.pk_u, random.Random(5))
        assert ek.ek1 == key.k1  # same d
        assert ek.ek0 != key.k0  # blinded under pk_u

    def test_y_equals_one_collapses_to_plain_key(self, gp, authorities, rng):
        auth = authorities["AUTH1"]
        pk_u = gp.ctx.g1 ** 1
        ek, _ = K.abe_enc_key(GID, gp, ATTR, auth, pk_u, rng)
        key = K.get_key(ek, gp, auth.pk.a1, 1, auth.pk)
        assert key.k0 == ek.ek0


class TestGetKey:
    def test_honest_recovery_valid(self, gp, authorities, user, issuance):
        auth, ek, _, _ = issuance
        key = K.get_key(ek, gp, auth.pk.a1, user.y, auth.pk)
        assert C.key_is_valid(gp, key, auth.pk)
        assert key.gid == GID and key.attr == ATTR
        assert key.k1 == ek.ek1

    def test_wrong_secret_detected(self, gp, authorities, user, issuance):
        auth, ek, _, _ = issuance
        with pytest.raises(K.InvalidRecoveryError):
            K.get_key(ek, gp, auth.pk.a1, (user.y + 1) % A.GROUP_ORDER, auth.pk)

    def test_recovered_key_decrypts(self, gp, authorities, pks, user, rng):
        acp = "level25@AUTH1 AND female@AUTH3"
        m = A.rand_gt(rng)
        ct = C.abe_encrypt(gp, m, acp, pks, rng)
        keys = []
        for attr, theta in ((ATTR, "AUTH1"), ("female@AUTH3", "AUTH3")):
            ek, _ = K.abe_enc_key(GID, gp, attr, authorities[theta], user.pk_u, rng)
            keys.append(K.get_key(ek, gp, authorities[theta].pk.a1, user.y,
                                  authorities[theta].pk))
        assert C.abe_decrypt(gp, ct, keys) == m


class TestVerifiers:
    def test_honest_proof_accepted_by_both(self, gp, authorities, user, issuance):
        auth, ek, _, proof = issuance
        assert K.check_key(ek, proof, GID, ATTR, user.pk_u, auth.pk, gp)
        assert K.check_key_pc(ek, proof, GID, ATTR, user.pk_u, auth.pk, gp)

    def test_fresh_proof_randomness_both_accept(self, gp, authorities, user, issuance):
        auth, ek, w, proof = issuance
        proof2 = K.gen_proofs(w, GID, ATTR, user.pk_u, ek, gp, random.Random(99))
        assert proof2.ek0p != proof.ek0p and proof2.c != proof.c
        assert K.check_key(ek, proof2, GID, ATTR, user.pk_u, auth.pk, gp)
        assert K.check_key_pc(ek, proof2, GID, ATTR, user.pk_u, auth.pk, gp)

    @pytest.mark.parametrize("field", ["ek0", "ek1", "ek2"])
    def test_tampered_key_fields_rejected(self, gp, authorities, user, issuance, field):
        auth, ek, _, proof = issuance
        bumps = {"ek0": gp.ctx.g1, "ek1": gp.ctx.g2, "ek2": gp.ctx.g1}
        bad = replace(ek, **{field: getattr(ek, field) * bumps[field]})
        assert not K.check_key(bad, proof, GID, ATTR, user.pk_u, auth.pk, gp)
        assert not K.check_key_pc(bad, proof, GID, ATTR, user.pk_u, auth.pk, gp)

    @pytest.mark.parametrize("field", ["ek0p", "ek1p", "ek2p", "w1", "w2", "w3", "c"])
    def test_tampered_proof_fields_rejected(self, gp, authorities, user, issuance, field):
        auth, ek, _, proof = issuance
        if field in ("w1", "w2", "w3", "c"):
            bad = replace(proof, **{field: (getattr(proof, field) + 1) % A.GROUP_ORDER})
        else:
            bump = gp.ctx.g2 if field == "ek1p" else gp.ctx.g1
            bad = replace(proof, **{field: getattr(proof, field) * bump})
        assert not K.check_key(ek, bad, GID, ATTR, user.pk_u, auth.pk, gp)
        assert not K.check_key_pc(ek, bad, GID, ATTR, user.pk_u, auth.pk, gp)

    def test_wrong_recipient_rejected(self, gp, authorities, user, issuance, rng):
        auth, ek, _, proof = issuance
        other = C.user_keygen(gp, rng)
        assert not K.check_key(ek, proof, GID, ATTR, other.pk_u, auth.pk, gp)
        assert not K.check_key_pc(ek, proof, GID, ATTR, other.pk_u, auth.pk, gp)

    def test_wrong_context_rejected(self, gp, authorities, user, issuance):
        auth, ek, _, proof = issuance
        assert not K.check_key(ek, proof, b"other-gid", ATTR, user.pk_u, auth.pk, gp)
        assert not K.check_key(ek, proof, GID, "vip@AUTH1", user.pk_u, auth.pk, gp)

    def test_ek2_exponent_mismatch_caught_by_pairing_check(self, gp, authorities, user, rng):
        # EK2 with d+1 passes the plain-verifier equations it appears in, but
        # fails the EK1/EK2 binding check of the pairing-check variant
        auth = authorities["AUTH1"]
        ek, w = K.abe_enc_key(GID, gp, ATTR, auth, user.pk_u, rng)
        bad_ek = replace(ek, ek2=gp.ctx.g1 ** ((w.d + 1) % A.GROUP_ORDER))
        proof = K.gen_proofs(w, GID, ATTR, user.pk_u, bad_ek, gp, rng)
        assert not K.check_key_pc(bad_ek, proof, GID, ATTR, user.pk_u, auth.pk, gp)

    def test_verifiers_agree_on_random_tampering(self, gp, authorities, user, rng):
        auth = authorities["AUTH1"]
        fields_ek = ["ek0", "ek1", "ek2"]
        fields_pr = ["ek0p", "ek1p", "ek2p", "w1", "w2", "w3"]
        for trial in range(30):
            ek, w = K.abe_enc_key(GID, gp, ATTR, auth, user.pk_u, rng)
            proof = K.gen_proofs(w, GID, ATTR, user.pk_u, ek, gp, rng)
            if rng.random() < 0.4:
                pass  # honest
            elif rng.random() < 0.5:
                f = rng.choice(fields_ek)
                bump = gp.ctx.g2 if f == "ek1" else gp.ctx.g1
                ek = replace(ek, **{f: getattr(ek, f) * bump})
            else:
                f = rng.choice(fields_pr)
                if f.startswith("w"):
                    proof = replace(proof, **{f: (getattr(proof, f) + 1) % A.GROUP_ORDER})
                else:
                    bump = gp.ctx.g2 if f == "ek1p" else gp.ctx.g1
                    proof = replace(proof, **{f: getattr(proof, f) * bump})
            r1 = K.check_key(ek, proof, GID, ATTR, user.pk_u, auth.pk, gp)
            r2 = K.check_key_pc(ek, proof, GID, ATTR, user.pk_u, auth.pk, gp)
            assert r1 == r2


class TestTranscriptModes:
    def test_narrow_mode_roundtrip(self, gp, authorities, user, rng):
        auth = authorities["AUTH1"]
        ek, w = K.abe_enc_key(GID, gp, ATTR, auth, user.pk_u, rng)
        proof = K.gen_proofs(w, GID, ATTR, user.pk_u, ek, gp, rng, transcript="narrow")
        assert K.check_key(ek, proof, GID, ATTR, user.pk_u, auth.pk, gp, transcript="narrow")
        assert K.check_key_pc(ek, proof, GID, ATTR, user.pk_u, auth.pk, gp, transcript="narrow")

    def test_modes_do_not_cross_accept(self, gp, authorities, user, issuance, rng):
        auth, ek, w, full_proof = issuance
        narrow = K.gen_proofs(w, GID, ATTR, user.pk_u, ek, gp, rng, transcript="narrow")
        assert not K.check_key(ek, narrow, GID, ATTR, user.pk_u, auth.pk, gp)
        assert not K.check_key(ek, full_proof, GID, ATTR, user.pk_u, auth.pk, gp,
                               transcript="narrow")


class TestSimulator:
    def test_simulated_accepts_with_explicit_challenge(self, gp, authorities, user, issuance, rng):
        auth, ek, _, _ = issuance
        sim = K.simulate_proof(GID, ATTR, user.pk_u, ek, gp, rng)
        assert K.check_key_with_challenge(ek, sim, GID, ATTR, user.pk_u, auth.pk, gp, sim.c)
        assert K.check_key_pc_with_challenge(ek, sim, GID, ATTR, user.pk_u, auth.pk, gp, sim.c)

    def test_simulated_rejected_by_production_verifiers(self, gp, authorities, user, issuance, rng):
        auth, ek, _, _ = issuance
        sim = K.simulate_proof(GID, ATTR, user.pk_u, ek, gp, rng)
        assert not K.check_key(ek, sim, GID, ATTR, user.pk_u, auth.pk, gp)
        assert not K.check_key_pc(ek, sim, GID, ATTR, user.pk_u, auth.pk, gp)

    def test_transcript_distribution_smoke(self, gp, authorities, user, issuance, rng):
        """Chi-square over the top nibble of the challenge: simulated and real
        transcript components should both look uniform."""
        auth, ek, w, _ = issuance
        n = 320
        buckets_sim = [0] * 16
        buckets_real = [0] * 16
        for _ in range(n):
            sim = K.simulate_proof(GID, ATTR, user.pk_u, ek, gp, rng)
            buckets_sim[A.scalar_to_bytes(sim.c)[-1] & 0xF] += 1
            real = K.gen_proofs(w, GID, ATTR, user.pk_u, ek, gp, rng)
            buckets_real[A.scalar_to_bytes(real.w1)[-1] & 0xF] += 1
        expected = n / 16
        for buckets in (buckets_sim, buckets_real):
            chi2 = sum((b - expected) ** 2 / expected for b in buckets)
            assert chi2 < 50  # df=15; far beyond any sane quantile only on bugs


class TestExtractor:
    def _fork(self, gp, auth, user, rng):
        ek, w = K.abe_enc_key(GID, gp, ATTR, auth, user.pk_u, rng)
        ap, bp, dp = (A.rand_scalar(rng) for _ in range(3))
        ek0p = A.g1_multi_exp([(user.pk_u, ap), (gp.hash_gid(GID), bp),
                               (gp.hash_attr(ATTR), dp)])
        ek1p = gp.ctx.g2 ** dp
        ek2p = gp.ctx.g1 ** dp

        def respond(c):
            return K.KeyProof(ek0p, ek1p, ek2p, c,
                              (ap + c * w.alpha) % A.GROUP_ORDER,
                              (bp + c * w.beta) % A.GROUP_ORDER,
                              (dp + c * w.d) % A.GROUP_ORDER)

        return ek, w, respond

    def test_fork_recovers_secrets(self, gp, authorities, user, rng):
        auth = authorities["AUTH1"]
        ek, w, respond = self._fork(gp, auth, user, rng)
        c1, c2 = A.rand_scalar(rng), A.rand_scalar(rng)
        t1, t2 = respond(c1), respond(c2)
        assert K.check_key_with_challenge(ek, t1, GID, ATTR, user.pk_u, auth.pk, gp, c1)
        assert K.check_key_with_challenge(ek, t2, GID, ATTR, user.pk_u, auth.pk, gp, c2)
        alpha, beta, d = K.extract_witness(t1, t2)
        assert (alpha, beta, d) == (auth.alpha, auth.beta, w.d)
        assert gp.ctx.g2 ** d == ek.ek1

    def test_extracted_secrets_regenerate_ek(self, gp, authorities, user, rng):
        auth = authorities["AUTH1"]
        ek, w, respond = self._fork(gp, auth, user, rng)
        t1, t2 = respond(3), respond(4)
        alpha, beta, d = K.extract_witness(t1, t2)
        rebuilt = A.g1_multi_exp([(user.pk_u, alpha), (gp.hash_gid(GID), beta),
                                  (gp.hash_attr(ATTR), d)])
        assert rebuilt == ek.ek0
        assert gp.ctx.g1 ** d == ek.ek2

    def test_equal_challenges_rejected(self, gp, authorities, user, rng):
        _, _, respond = self._fork(gp, authorities["AUTH1"], user, rng)
        t = respond(5)
        with pytest.raises(K.ExtractionError):
            K.extract_witness(t, t)

    def test_mismatched_commitments_rejected(self, gp, authorities, user, rng):
        _, _, respond1 = self._fork(gp, authorities["AUTH1"], user, rng)
        _, _, respond2 = self._fork(gp, authorities["AUTH1"], user, rng)
        with pytest.raises(K.ExtractionError):
            K.extract_witness(respond1(1), respond2(2))


class TestMalleability:
    def test_randomized_key_stays_bound_to_its_attribute(self, gp, authorities, rng):
        """(K0*F(u)^t, K1*g2^t) is still a valid key for u and for nothing
        else — malleability cannot reach a different attribute."""
        auth = authorities["AUTH1"]
        key = C.abe_keygen(GID, gp, ATTR, auth, rng)
        t = A.rand_scalar(rng)
        mauled = C.DecryptionKey(
            gid=GID, attr=ATTR,
            k0=key.k0 * (gp.hash_attr(ATTR) ** t),
            k1=key.k1 * (gp.ctx.g2 ** t),
        )
        assert C.key_is_valid(gp, mauled, auth.pk)
        for other_attr in ("vip@AUTH1", "level26@AUTH1"):
            relabeled = C.DecryptionKey(gid=GID, attr=other_attr,
                                        k0=mauled.k0, k1=mauled.k1)
            assert not C.key_is_valid(gp, relabeled, auth.pk)


class TestEnvelope:
    def test_roundtrip(self, issuance):
        _, ek, _, proof = issuance
        ek2, proof2 = K.submission_from_json(K.submission_to_json(ek, proof))
        assert ek2 == ek and proof2 == proof

    def test_unknown_format_rejected(self):
        with pytest.raises(K.AccountabilityError):
            K.submission_from_json('{"format": "something-else"}')

    def test_corrupted_element_rejected(self, issuance):
        import json
        _, ek, _, proof = issuance
        obj = json.loads(K.submission_to_json(ek, proof))
        obj["ek0"] = "ff" * 33
        with pytest.raises(A.DecodeError):
            K.submission_from_json(json.dumps(obj))
