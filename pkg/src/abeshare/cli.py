"""Command-line interface.

Subcommands::

    demo <gamefi|colluders|discloser|scenario.json> [--as USER]
         [--adversary TAG]... [--seed N] [--trace-out F] [--journal-out F]
    bench sizes --max-attrs N [--out F]
    bench times --max-attrs N --payload-mb M [--out F]
    bench backends [--out F]
    verify <bundle.json>
    make-submission [--tamper FIELD] [--seed N] [--out F]
    ledger-replay <journal.jsonl>

Exit codes are a stable scripting contract: 0 success, 2 usage error,
3 cryptographic verdict failure, 4 protocol-phase failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import replace
from pathlib import Path

from abeshare import accountability as acc
from abeshare import bench
from abeshare import cpabe
from abeshare import ledger as ledger_mod
from abeshare import protocol
from abeshare._kernels import BACKEND_NAME

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CRYPTO = 3
EXIT_PHASE = 4

_BUNDLE_FORMAT = "abeshare-verify-bundle/v1"

TAMPER_FIELDS = ("ek0", "ek1", "ek2", "ek0p", "ek1p", "ek2p", "w1", "w2", "w3", "c")


def _load_scenario(name_or_path: str, seed: int | None) -> protocol.ScenarioConfig:
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        cfg = protocol.scenario_from_json(path.read_text())
    else:
        cfg = protocol.builtin_scenario(name_or_path)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def cmd_demo(args) -> int:
    try:
        cfg = _load_scenario(args.scenario, args.seed)
        for tag in args.adversary or []:
            cfg = protocol.inject_adversary(cfg, tag)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    sink: dict = {}
    trace = protocol.run_instance(cfg, _sink=sink)

    for event in trace.events:
        seq = event.get("seq")
        seq_str = f" seq={seq}" if seq is not None else ""
        detail = {k: v for k, v in event.items() if k not in ("phase", "type", "seq")}
        print(f"[{event['phase']:8s}] {event['type']}{seq_str} {json.dumps(detail, sort_keys=True)}")

    if args.trace_out:
        Path(args.trace_out).write_text("\n".join(trace.to_json_lines()) + "\n")
        print(f"trace written to {args.trace_out}")
    if args.journal_out:
        ledger = sink["ledger"]
        Path(args.journal_out).write_text("\n".join(ledger.journal_lines()) + "\n")
        print(f"ledger journal written to {args.journal_out}")

    subject = args.user or cfg.users[0].address
    if subject not in {u.address for u in cfg.users}:
        print(f"error: no user {subject!r} in scenario", file=sys.stderr)
        return EXIT_USAGE
    outcome = trace.outcome_for(subject)
    if outcome and outcome["type"] == "data-recovered" and outcome["ok"]:
        print(f"{subject}: data recovered")
        return EXIT_OK
    reason = (outcome or {}).get("reason", "policy not satisfied").replace("-", " ")
    print(f"{subject}: failed ({reason})")
    return EXIT_PHASE


def _write_rows(rows: list[str], out: str | None) -> None:
    text = "\n".join(rows) + "\n"
    if out:
        Path(out).write_text(text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


def cmd_bench(args) -> int:
    if args.bench_cmd == "sizes":
        _write_rows(bench.size_rows(args.max_attrs), args.out)
    elif args.bench_cmd == "times":
        _write_rows(bench.time_rows(args.max_attrs, args.payload_mb), args.out)
    elif args.bench_cmd == "backends":
        print(f"active backend: {BACKEND_NAME}", file=sys.stderr)
        _write_rows(bench.backend_rows(), args.out)
    else:
        return EXIT_USAGE
    return EXIT_OK


def cmd_make_submission(args) -> int:
    """Emit a self-contained verification bundle; --tamper corrupts one field."""
    rng = random.Random(args.seed)
    gp = cpabe.global_setup()
    auth = cpabe.auth_setup(gp, "AUTH1", rng)
    user = cpabe.user_keygen(gp, rng)
    gid = f"demo-gid-{args.seed}".encode()
    attr = "member@AUTH1"
    ek, witness = acc.abe_enc_key(gid, gp, attr, auth, user.pk_u, rng)
    proof = acc.gen_proofs(witness, gid, attr, user.pk_u, ek, gp, rng)

    if args.tamper:
        g = gp.ctx
        if args.tamper == "ek0":
            ek = replace(ek, ek0=ek.ek0 * g.g1)
        elif args.tamper == "ek1":
            ek = replace(ek, ek1=ek.ek1 * g.g2)
        elif args.tamper == "ek2":
            ek = replace(ek, ek2=ek.ek2 * g.g1)
        elif args.tamper == "ek0p":
            proof = replace(proof, ek0p=proof.ek0p * g.g1)
        elif args.tamper == "ek1p":
            proof = replace(proof, ek1p=proof.ek1p * g.g2)
        elif args.tamper == "ek2p":
            proof = replace(proof, ek2p=proof.ek2p * g.g1)
        elif args.tamper in ("w1", "w2", "w3", "c"):
            field = args.tamper
            proof = replace(proof, **{field: (getattr(proof, field) + 1) % gp.ctx.order_p})

    bundle = json.dumps({
        "format": _BUNDLE_FORMAT,
        "submission": acc.submission_to_json(ek, proof),
        "authority_pub": cpabe.authority_pub_to_json(auth.pk),
    }, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(bundle)
        print(f"wrote {args.out}")
    else:
        print(bundle)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        bundle = json.loads(Path(args.file).read_text())
        if bundle.get("format") != _BUNDLE_FORMAT:
            raise ValueError(f"not a verification bundle: {bundle.get('format')!r}")
        ek, proof = acc.submission_from_json(bundle["submission"])
        auth_pub = cpabe.authority_pub_from_json(bundle["authority_pub"])
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    gp = cpabe.global_setup()
    ok_g2 = acc.check_key(ek, proof, ek.gid, ek.attr, ek.target, auth_pub, gp)
    ok_pc = acc.check_key_pc(ek, proof, ek.gid, ek.attr, ek.target, auth_pub, gp)
    print(f"check_key:    {'accept' if ok_g2 else 'reject'}")
    print(f"check_key_pc: {'accept' if ok_pc else 'reject'}")
    if ok_g2 != ok_pc:
        print("internal error: verifier disagreement", file=sys.stderr)
        return 1
    return EXIT_OK if ok_g2 else EXIT_CRYPTO


def cmd_ledger_replay(args) -> int:
    try:
        lines = [l for l in Path(args.file).read_text().splitlines() if l.strip()]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    gp = cpabe.global_setup()
    try:
        ledger = ledger_mod.replay_journal(gp, lines)
    except ValueError as exc:
        # a journal whose re-execution fails outright is a divergence
        print(f"replay failed: {exc}", file=sys.stderr)
        return EXIT_PHASE
    replayed = ledger.journal_lines()
    if replayed != lines:
        for i, (a, b) in enumerate(zip(lines, replayed)):
            if a != b:
                print(f"divergence at seq {i + 1}", file=sys.stderr)
                return EXIT_PHASE
        print(f"divergence at seq {min(len(lines), len(replayed)) + 1}", file=sys.stderr)
        return EXIT_PHASE
    print(f"replayed {len(lines)} events, state digest {ledger.state_digest()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abeshare",
        description="Accountable multi-authority CP-ABE data sharing simulator",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_demo = sub.add_parser("demo", help="run a sharing scenario")
    p_demo.add_argument("scenario", help="builtin name (gamefi, colluders, discloser) or JSON file")
    p_demo.add_argument("--as", dest="user", default=None, help="user whose outcome sets the exit code")
    p_demo.add_argument("--adversary", action="append", default=[],
                        help="adversary tag, repeatable")
    p_demo.add_argument("--seed", type=int, default=None)
    p_demo.add_argument("--trace-out", default=None, help="write the trace as JSON lines")
    p_demo.add_argument("--journal-out", default=None, help="write the ledger journal as JSON lines")
    p_demo.set_defaults(fn=cmd_demo)

    p_bench = sub.add_parser("bench", help="emit benchmark CSV")
    bench_sub = p_bench.add_subparsers(dest="bench_cmd", required=True)
    p_sizes = bench_sub.add_parser("sizes")
    p_sizes.add_argument("--max-attrs", type=int, required=True)
    p_sizes.add_argument("--out", default=None)
    p_times = bench_sub.add_parser("times")
    p_times.add_argument("--max-attrs", type=int, required=True)
    p_times.add_argument("--payload-mb", type=int, required=True)
    p_times.add_argument("--out", default=None)
    p_backends = bench_sub.add_parser("backends")
    p_backends.add_argument("--out", default=None)
    p_bench.set_defaults(fn=cmd_bench)

    p_make = sub.add_parser("make-submission", help="emit a key-submission verification bundle")
    p_make.add_argument("--tamper", choices=TAMPER_FIELDS, default=None)
    p_make.add_argument("--seed", type=int, default=0)
    p_make.add_argument("--out", default=None)
    p_make.set_defaults(fn=cmd_make_submission)

    p_verify = sub.add_parser("verify", help="verify a key-submission bundle")
    p_verify.add_argument("file")
    p_verify.set_defaults(fn=cmd_verify)

    p_replay = sub.add_parser("ledger-replay", help="replay a ledger journal file")
    p_replay.add_argument("file")
    p_replay.set_defaults(fn=cmd_ledger_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other exits
        return EXIT_USAGE if exc.code not in (0,) else 0
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
