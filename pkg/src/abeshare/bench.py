"""Size and timing sweeps, emitted as CSV.

Absolute milliseconds depend on the machine and are informational only; the
properties worth asserting (and asserted by the acceptance suite) are the
shapes: ciphertext size affine in the number of policy leaves, encrypted-key
size constant per attribute, per-attribute issuance cost flat, and hybrid
encryption/decryption monotone in both attribute count and payload size.

``backend_rows`` times the same group operations on the pure-Python kernel
and the compiled one, which is the honest way to justify shipping the
compiled extension at all.
"""

from __future__ import annotations

import random
import time

from abeshare import accountability as acc
from abeshare import cpabe
from abeshare._kernels import available_backends, load_backend

SIZES_HEADER = "attrs,ciphertext_bytes,enc_key_bytes"
TIMES_HEADER = "metric,attrs,payload_mb,ms"
BACKENDS_HEADER = "op,backend,ms"


def _bench_policy(n_attrs: int, authority: str = "BENCH") -> str:
    words = [f"a{i}@{authority}" for i in range(n_attrs)]
    return " OR ".join(words)


def _attr_steps(max_attrs: int, points: int = 10) -> list[int]:
    if max_attrs < 1:
        raise ValueError("max_attrs must be >= 1")
    if max_attrs == 1:
        return [1]
    step = max(1, max_attrs // points)
    steps = list(range(step, max_attrs + 1, step))
    if steps[-1] != max_attrs:
        steps.append(max_attrs)
    return steps


def _ciphertext_bytes(ct: cpabe.Ciphertext) -> int:
    total = len(ct.c0.encode())
    for row in ct.rows:
        total += len(row.c1.encode()) + len(row.c2.encode())
        total += len(row.c3.encode()) + len(row.c4.encode())
        total += len(row.attr.encode())
    return total


def _enc_key_bytes(ek: acc.EncryptedKey) -> int:
    return len(ek.ek0.encode()) + len(ek.ek1.encode()) + len(ek.ek2.encode())


def size_rows(max_attrs: int, seed: int = 0) -> list[str]:
    """CSV rows: serialized ciphertext size vs leaf count, and the (constant)
    per-attribute encrypted-key size."""
    rng = random.Random(seed)
    gp = cpabe.global_setup()
    auth = cpabe.auth_setup(gp, "BENCH", rng)
    pks = {"BENCH": auth.pk}
    user = cpabe.user_keygen(gp, rng)
    from abeshare.algebra import rand_gt

    rows = [SIZES_HEADER]
    for n in _attr_steps(max_attrs):
        ct = cpabe.abe_encrypt(gp, rand_gt(rng), _bench_policy(n), pks, rng)
        ek, _ = acc.abe_enc_key(b"bench-gid", gp, "a0@BENCH", auth, user.pk_u, rng)
        rows.append(f"{n},{_ciphertext_bytes(ct)},{_enc_key_bytes(ek)}")
    return rows


def _time_once(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return (time.perf_counter() - t0) * 1000.0


def _time_best(fn, repeats: int = 3) -> float:
    return min(_time_once(fn) for _ in range(repeats))


def time_rows(max_attrs: int, payload_mb: int, seed: int = 0,
              attr_points: int = 4, payload_points: int = 3) -> list[str]:
    """CSV rows: per-attribute costs of the key pipeline across attribute
    counts, plus a hybrid encrypt/decrypt grid over (attrs, payload)."""
    rng = random.Random(seed)
    gp = cpabe.global_setup()
    auth = cpabe.auth_setup(gp, "BENCH", rng)
    pks = {"BENCH": auth.pk}
    user = cpabe.user_keygen(gp, rng)
    gid = b"bench-gid"

    rows = [TIMES_HEADER]
    attr_steps = _attr_steps(max_attrs, attr_points)

    for n in attr_steps:
        attrs = [f"a{i}@BENCH" for i in range(n)]

        t0 = time.perf_counter()
        keys = [cpabe.abe_keygen(gid, gp, a, auth, rng) for a in attrs]
        rows.append(f"keygen_per_attr,{n},,{(time.perf_counter() - t0) * 1000 / n:.4f}")

        t0 = time.perf_counter()
        eks = [acc.abe_enc_key(gid, gp, a, auth, user.pk_u, rng) for a in attrs]
        rows.append(f"enc_key_per_attr,{n},,{(time.perf_counter() - t0) * 1000 / n:.4f}")

        t0 = time.perf_counter()
        proofs = [acc.gen_proofs(w, gid, ek.attr, user.pk_u, ek, gp, rng) for ek, w in eks]
        rows.append(f"gen_proofs_per_attr,{n},,{(time.perf_counter() - t0) * 1000 / n:.4f}")

        t0 = time.perf_counter()
        for ek, _ in eks:
            acc.get_key(ek, gp, auth.pk.a1, user.y)
        rows.append(f"get_key_per_attr,{n},,{(time.perf_counter() - t0) * 1000 / n:.4f}")

    payload_steps = sorted({max(1, payload_mb * (i + 1) // payload_points)
                            for i in range(payload_points)})
    hybrid_attr_steps = sorted({attr_steps[0], attr_steps[len(attr_steps) // 2], attr_steps[-1]})
    for n in hybrid_attr_steps:
        acp = _bench_policy(n)
        all_keys = [cpabe.abe_keygen(gid, gp, f"a{i}@BENCH", auth, rng) for i in range(1)]
        for mb in payload_steps:
            payload = random.Random(seed + mb).randbytes(mb * 1024 * 1024)
            hc_holder = {}

            def encrypt():
                hc_holder["hc"] = cpabe.hybrid_encrypt(gp, payload, acp, pks, rng)

            rows.append(f"hybrid_encrypt,{n},{mb},{_time_best(encrypt):.3f}")

            def decrypt():
                cpabe.hybrid_decrypt(gp, hc_holder["hc"], all_keys)

            rows.append(f"hybrid_decrypt,{n},{mb},{_time_best(decrypt):.3f}")
    return rows


def backend_rows(repeats: int = 5) -> list[str]:
    """CSV rows comparing group-operation latency across kernel backends."""
    rows = [BACKENDS_HEADER]
    rng = random.Random(1)
    for name in available_backends():
        k = load_backend(name)
        a = rng.randrange(k.GROUP_ORDER)
        b = rng.randrange(k.GROUP_ORDER)
        p = k.g1_mul(k.G1_GEN, a)
        q = k.g2_mul(k.G2_GEN, b)
        t = k.gt_exp(k.GT_GEN, a)
        ops = [
            ("g1_mul", lambda: k.g1_mul(p, a)),
            ("g2_mul", lambda: k.g2_mul(q, a)),
            ("gt_exp", lambda: k.gt_exp(t, a)),
            ("pairing", lambda: k.pairing(p, q)),
            ("pairing_product_4", lambda: k.multi_pairing([(p, q)] * 4)),
        ]
        for op_name, fn in ops:
            best = min(_time_once(fn) for _ in range(repeats))
            rows.append(f"{op_name},{name},{best:.4f}")
    return rows
