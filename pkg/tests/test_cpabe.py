"""CP-ABE scheme: setup, issuance, encryption, decryption, hybrid wrapper.

The primary oracle is the round trip; the per-row identity is white-boxed
through the encryption randomness hook, and cross-instance key mixing is
checked down to the algebra.
"""

import itertools
import random

import pytest

from abeshare import algebra as A
from abeshare import cpabe as C
from abeshare import policy as P

GAMEFI_ACP = "( level25@AUTH1 OR cityLA@AUTH2 ) AND female@AUTH3"


class TestGlobalSetup:
    def test_deterministic(self):
        a, b = C.global_setup(), C.global_setup()
        assert a == b
        assert C.gp_to_json(a) == C.gp_to_json(b)

    def test_generators_nondegenerate(self, gp):
        assert A.pairing(gp.ctx.g1, gp.ctx.g2) != A.GTElem.identity()

    def test_serialization_roundtrip(self, gp):
        assert C.gp_from_json(C.gp_to_json(gp)) == gp

    def test_unsupported_curve(self):
        with pytest.raises(A.AlgebraError):
            C.global_setup(curve_id="nist-p256")


class TestAuthSetup:
    def test_pk_internally_consistent(self, gp, authorities):
        for auth in authorities.values():
            pk = auth.pk
            assert A.pairing(pk.a1, gp.ctx.g2) == A.pairing(gp.ctx.g1, pk.a2)
            assert pk.t == A.pairing(pk.a1, gp.ctx.g2)
            assert pk.is_consistent(gp)

    def test_authorities_independent(self, gp, rng):
        a = C.auth_setup(gp, "X1", rng)
        b = C.auth_setup(gp, "X2", rng)
        assert a.alpha != b.alpha and a.beta != b.beta
        assert a.pk.a1 != b.pk.a1

    def test_pub_json_roundtrip(self, authorities):
        pk = authorities["AUTH1"].pk
        assert C.authority_pub_from_json(C.authority_pub_to_json(pk)) == pk


class TestKeygen:
    def test_key_satisfies_public_invariant(self, gp, authorities, rng):
        key = C.abe_keygen(b"g1", gp, "level25@AUTH1", authorities["AUTH1"], rng)
        assert C.key_is_valid(gp, key, authorities["AUTH1"].pk)

    def test_invariant_binds_issuer(self, gp, authorities, rng):
        key = C.abe_keygen(b"g1", gp, "level25@AUTH1", authorities["AUTH1"], rng)
        assert not C.key_is_valid(gp, key, authorities["AUTH2"].pk)

    def test_fresh_randomness_per_issuance(self, gp, authorities, rng):
        k1 = C.abe_keygen(b"g1", gp, "level25@AUTH1", authorities["AUTH1"], rng)
        k2 = C.abe_keygen(b"g1", gp, "level25@AUTH1", authorities["AUTH1"], rng)
        assert k1.k1 != k2.k1 and k1.k0 != k2.k0

    def test_wrong_namespace_rejected(self, gp, authorities, rng):
        with pytest.raises(C.CpabeError):
            C.abe_keygen(b"g1", gp, "level25@AUTH2", authorities["AUTH1"], rng)

    def test_attr_without_suffix_rejected(self):
        with pytest.raises(C.CpabeError):
            C.authority_of("no-suffix")
        with pytest.raises(C.CpabeError):
            C.authority_of("trailing@")

    def test_key_json_roundtrip(self, gp, authorities, rng):
        key = C.abe_keygen(b"g1", gp, "level25@AUTH1", authorities["AUTH1"], rng)
        assert C.key_from_json(C.key_to_json(key)) == key


class TestEncrypt:
    def test_row_count_equals_policy_leaves(self, gp, pks, rng):
        ct = C.abe_encrypt(gp, A.rand_gt(rng), GAMEFI_ACP, pks, rng)
        assert len(ct.rows) == 3
        assert [r.attr for r in ct.rows] == ["level25@AUTH1", "cityLA@AUTH2", "female@AUTH3"]

    def test_unknown_authority_rejected(self, gp, pks, rng):
        with pytest.raises(C.UnknownAuthorityError):
            C.abe_encrypt(gp, A.rand_gt(rng), "a@NOWHERE", pks, rng)

    def test_malformed_policy_rejected(self, gp, pks, rng):
        with pytest.raises(P.PolicyError):
            C.abe_encrypt(gp, A.rand_gt(rng), "", pks, rng)

    def test_per_row_identity_via_randomness_hook(self, gp, authorities, pks, rng):
        gid = b"whitebox"
        sink = {}
        ct = C.abe_encrypt(gp, A.rand_gt(rng), GAMEFI_ACP, pks, rng, _randomness_sink=sink)
        h = gp.hash_gid(gid)
        e_h_g2 = A.pairing(h, gp.ctx.g2)
        for row, r in zip(ct.rows, sink["rows"]):
            key = C.abe_keygen(gid, gp, row.attr, authorities[C.authority_of(row.attr)], rng)
            d_x = (row.c1 * A.pairing(h, row.c3)
                   * A.pairing(key.k0, row.c2) * A.pairing(row.c4, key.k1))
            assert d_x == (gp.ctx.gt ** r["lam"]) * (e_h_g2 ** r["om"])

    def test_ciphertext_json_roundtrip(self, gp, authorities, pks, rng):
        m = A.rand_gt(rng)
        ct = C.abe_encrypt(gp, m, GAMEFI_ACP, pks, rng)
        back = C.ciphertext_from_json(C.ciphertext_to_json(ct))
        keys = [C.abe_keygen(b"g", gp, "cityLA@AUTH2", authorities["AUTH2"], rng),
                C.abe_keygen(b"g", gp, "female@AUTH3", authorities["AUTH3"], rng)]
        assert C.abe_decrypt(gp, back, keys) == m

    def test_ciphertext_json_rejects_row_mismatch(self, gp, pks, rng):
        obj = C.ciphertext_to_json(C.abe_encrypt(gp, A.rand_gt(rng), GAMEFI_ACP, pks, rng))
        obj["rows"] = obj["rows"][:-1] + [dict(obj["rows"][-1], attr="other@AUTH1")]
        with pytest.raises(C.CpabeError):
            C.ciphertext_from_json(obj)


class TestDecrypt:
    def _keys(self, gp, authorities, gid, attrs, rng):
        return [C.abe_keygen(gid, gp, a, authorities[C.authority_of(a)], rng) for a in attrs]

    def test_roundtrip_satisfying_set(self, gp, authorities, pks, rng):
        m = A.rand_gt(rng)
        ct = C.abe_encrypt(gp, m, GAMEFI_ACP, pks, rng)
        keys = self._keys(gp, authorities, b"gid", ["level25@AUTH1", "female@AUTH3"], rng)
        assert C.abe_decrypt(gp, ct, keys) == m

    def test_other_satisfying_branch(self, gp, authorities, pks, rng):
        m = A.rand_gt(rng)
        ct = C.abe_encrypt(gp, m, GAMEFI_ACP, pks, rng)
        keys = self._keys(gp, authorities, b"gid", ["cityLA@AUTH2", "female@AUTH3"], rng)
        assert C.abe_decrypt(gp, ct, keys) == m

    def test_nonsatisfying_subset_rejected(self, gp, authorities, pks, rng):
        ct = C.abe_encrypt(gp, A.rand_gt(rng), GAMEFI_ACP, pks, rng)
        keys = self._keys(gp, authorities, b"gid", ["level25@AUTH1", "cityLA@AUTH2"], rng)
        with pytest.raises(C.PolicyNotSatisfiedError):
            C.abe_decrypt(gp, ct, keys)

    def test_empty_keys_rejected(self, gp, pks, rng):
        ct = C.abe_encrypt(gp, A.rand_gt(rng), GAMEFI_ACP, pks, rng)
        with pytest.raises(C.PolicyNotSatisfiedError):
            C.abe_decrypt(gp, ct, [])

    def test_mixed_gid_rejected_before_algebra(self, gp, authorities, pks, rng):
        ct = C.abe_encrypt(gp, A.rand_gt(rng), GAMEFI_ACP, pks, rng)
        keys = (self._keys(gp, authorities, b"gid-1", ["level25@AUTH1"], rng)
                + self._keys(gp, authorities, b"gid-2", ["female@AUTH3"], rng))
        with pytest.raises(C.MixedGidError):
            C.abe_decrypt(gp, ct, keys)

    def test_cross_gid_mixing_yields_garbage_even_unchecked(self, gp, authorities, pks, rng):
        """Collusion-resistance mechanism: forcing the row algebra with keys
        from two instances leaves the zero-share terms uncancelled."""
        m = A.rand_gt(rng)
        acp = "level25@AUTH1 AND female@AUTH3"
        ct = C.abe_encrypt(gp, m, acp, pks, rng)
        k1 = self._keys(gp, authorities, b"gid-1", ["level25@AUTH1"], rng)[0]
        k2 = self._keys(gp, authorities, b"gid-2", ["female@AUTH3"], rng)[0]
        by_attr = {k.attr: k for k in (k1, k2)}
        coeffs = P.reconstruction_coeffs(ct.lsss, set(by_attr))
        assert coeffs is not None
        denom = A.GTElem.identity()
        for x, c in coeffs.items():
            row = ct.rows[x]
            key = by_attr[row.attr]
            h = gp.hash_gid(key.gid)  # each colluder can only use its own gid
            d_x = (row.c1 * A.pairing(h, row.c3)
                   * A.pairing(key.k0, row.c2) * A.pairing(row.c4, key.k1))
            denom = denom * (d_x ** c)
        assert ct.c0 / denom != m

    def test_random_roundtrips(self, gp, authorities, pks, rng):
        words = ["level25@AUTH1", "cityLA@AUTH2", "female@AUTH3", "vip@AUTH1", "adult@AUTH2"]
        for trial in range(20):
            ast = _random_formula(rng, words, depth=3)
            text = _to_text(ast)
            leaves = sorted(set(P.policy_leaves(ast)))
            sat = _satisfying_subset(rng, ast, leaves)
            m = A.rand_gt(rng)
            ct = C.abe_encrypt(gp, m, text, pks, rng)
            if sat is None:
                continue
            keys = self._keys(gp, authorities, b"rt", sorted(sat), rng)
            assert C.abe_decrypt(gp, ct, keys) == m


def _random_formula(rng, words, depth):
    if depth == 0 or rng.random() < 0.35:
        return P.Leaf(rng.choice(words))
    return P.Gate(rng.choice(["AND", "OR"]),
                  _random_formula(rng, words, depth - 1),
                  _random_formula(rng, words, depth - 1))


def _to_text(ast):
    if isinstance(ast, P.Leaf):
        return ast.word
    return f"( {_to_text(ast.left)} {ast.op} {_to_text(ast.right)} )"


def _satisfying_subset(rng, ast, leaves):
    subsets = []
    for bits in itertools.product([0, 1], repeat=len(leaves)):
        attrs = {w for w, b in zip(leaves, bits) if b}
        if P.eval_ast(attrs, ast):
            subsets.append(attrs)
    return rng.choice(subsets) if subsets else None


class TestHybrid:
    def test_roundtrip_1mb(self, gp, authorities, pks, rng):
        m = random.Random(123).randbytes(1024 * 1024)
        hc = C.hybrid_encrypt(gp, m, GAMEFI_ACP, pks, rng)
        assert len(hc.ct) == len(m)
        assert hc.ct != m
        keys = [C.abe_keygen(b"h", gp, "cityLA@AUTH2", authorities["AUTH2"], rng),
                C.abe_keygen(b"h", gp, "female@AUTH3", authorities["AUTH3"], rng)]
        assert C.hybrid_decrypt(gp, hc, keys) == m

    def test_empty_message_rejected(self, gp, pks, rng):
        with pytest.raises(C.CpabeError):
            C.hybrid_encrypt(gp, b"", GAMEFI_ACP, pks, rng)

    def test_unknown_authority_propagates(self, gp, pks, rng):
        with pytest.raises(C.UnknownAuthorityError):
            C.hybrid_encrypt(gp, b"data", "a@GHOST", pks, rng)

    def test_wrong_keys_fail(self, gp, authorities, pks, rng):
        hc = C.hybrid_encrypt(gp, b"secret", GAMEFI_ACP, pks, rng)
        keys = [C.abe_keygen(b"h", gp, "level25@AUTH1", authorities["AUTH1"], rng)]
        with pytest.raises(C.PolicyNotSatisfiedError):
            C.hybrid_decrypt(gp, hc, keys)

    def test_xor_bytes_requires_equal_length(self):
        with pytest.raises(C.CpabeError):
            C.xor_bytes(b"ab", b"abc")

    def test_100mb_payload_100_attribute_policy_under_20s(self, gp, rng):
        # large-payload, wide-policy end to end; generous budget because the
        # absolute figure is hardware-dependent
        import time
        auth = C.auth_setup(gp, "WIDE", rng)
        pks = {"WIDE": auth.pk}
        acp = " AND ".join(f"a{i}@WIDE" for i in range(100))
        payload = random.Random(9).randbytes(100 * 1024 * 1024)
        keys = [C.abe_keygen(b"wide", gp, f"a{i}@WIDE", auth, rng) for i in range(100)]
        t0 = time.time()
        hc = C.hybrid_encrypt(gp, payload, acp, pks, rng)
        out = C.hybrid_decrypt(gp, hc, keys)
        elapsed = time.time() - t0
        assert out == payload
        assert elapsed < 20, f"hybrid 100MB x 100 attrs took {elapsed:.1f}s"
