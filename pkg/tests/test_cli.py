"""CLI surface: exit-code contract, verification bundles, CSV schemas,
journal replay."""

import json

import pytest

from abeshare import cli
from abeshare.bench import BACKENDS_HEADER, SIZES_HEADER, TIMES_HEADER


def run(argv):
    return cli.main(argv)


class TestDemo:
    def test_qualifying_user_exits_zero(self, capsys):
        assert run(["demo", "gamefi", "--as", "player2"]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "player2: data recovered" in out

    def test_nonqualifying_user_exits_four(self, capsys):
        assert run(["demo", "gamefi", "--as", "player3"]) == cli.EXIT_PHASE
        assert "policy not satisfied" in capsys.readouterr().out

    def test_missing_scenario_file_usage_error(self, capsys):
        assert run(["demo", "nonexistent.json"]) == cli.EXIT_USAGE

    def test_unknown_user_usage_error(self, capsys):
        assert run(["demo", "gamefi", "--as", "ghost"]) == cli.EXIT_USAGE

    def test_adversary_flag(self, capsys):
        code = run(["demo", "gamefi", "--adversary", "dishonest_authority:AUTH3",
                    "--as", "player2"])
        assert code == cli.EXIT_PHASE
        assert "key-slashed" in capsys.readouterr().out

    def test_scenario_file_and_outputs(self, tmp_path, capsys):
        from abeshare import protocol as P
        scenario = tmp_path / "s.json"
        scenario.write_text(P.scenario_to_json(P.gamefi_scenario()))
        trace_f = tmp_path / "trace.jsonl"
        journal_f = tmp_path / "journal.jsonl"
        code = run(["demo", str(scenario), "--trace-out", str(trace_f),
                    "--journal-out", str(journal_f)])
        assert code == cli.EXIT_OK
        assert len(trace_f.read_text().splitlines()) > 5
        assert len(journal_f.read_text().splitlines()) > 5

    def test_seed_override_changes_trace(self, tmp_path):
        t1 = tmp_path / "t1.jsonl"
        t2 = tmp_path / "t2.jsonl"
        run(["demo", "gamefi", "--seed", "1", "--trace-out", str(t1)])
        run(["demo", "gamefi", "--seed", "2", "--trace-out", str(t2)])
        assert t1.read_text() != t2.read_text()


class TestVerify:
    def test_honest_bundle_accepts(self, tmp_path, capsys):
        bundle = tmp_path / "b.json"
        assert run(["make-submission", "--out", str(bundle)]) == cli.EXIT_OK
        capsys.readouterr()
        assert run(["verify", str(bundle)]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "check_key:    accept" in out
        assert "check_key_pc: accept" in out

    @pytest.mark.parametrize("field", ["ek0", "ek1", "w1", "c", "ek2p"])
    def test_tampered_bundle_rejects_on_both(self, tmp_path, capsys, field):
        bundle = tmp_path / "b.json"
        run(["make-submission", "--tamper", field, "--out", str(bundle)])
        capsys.readouterr()
        assert run(["verify", str(bundle)]) == cli.EXIT_CRYPTO
        out = capsys.readouterr().out
        assert "check_key:    reject" in out
        assert "check_key_pc: reject" in out
        assert "disagreement" not in out

    def test_malformed_file_usage_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"format": "other"}')
        assert run(["verify", str(bad)]) == cli.EXIT_USAGE

    def test_missing_file_usage_error(self):
        assert run(["verify", "/does/not/exist.json"]) == cli.EXIT_USAGE


class TestBench:
    def test_sizes_schema_and_single_row(self, capsys):
        assert run(["bench", "sizes", "--max-attrs", "1"]) == cli.EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == SIZES_HEADER
        assert len(lines) == 2  # header + one row
        assert lines[1].startswith("1,")

    def test_sizes_key_column_constant(self, capsys):
        assert run(["bench", "sizes", "--max-attrs", "20"]) == cli.EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()[1:]
        key_sizes = {line.split(",")[2] for line in lines}
        assert len(key_sizes) == 1

    def test_times_schema(self, tmp_path):
        out = tmp_path / "t.csv"
        assert run(["bench", "times", "--max-attrs", "4", "--payload-mb", "1",
                    "--out", str(out)]) == cli.EXIT_OK
        lines = out.read_text().strip().splitlines()
        assert lines[0] == TIMES_HEADER
        metrics = {line.split(",")[0] for line in lines[1:]}
        assert {"keygen_per_attr", "enc_key_per_attr", "gen_proofs_per_attr",
                "get_key_per_attr", "hybrid_encrypt", "hybrid_decrypt"} <= metrics

    def test_backends_schema(self, capsys):
        assert run(["bench", "backends"]) == cli.EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == BACKENDS_HEADER
        assert any("reference" in line for line in lines[1:])


class TestLedgerReplay:
    def test_journal_roundtrip(self, tmp_path, capsys):
        journal = tmp_path / "j.jsonl"
        run(["demo", "gamefi", "--journal-out", str(journal)])
        capsys.readouterr()
        assert run(["ledger-replay", str(journal)]) == cli.EXIT_OK
        assert "state digest" in capsys.readouterr().out

    def test_corrupt_journal_detected(self, tmp_path, capsys):
        journal = tmp_path / "j.jsonl"
        run(["demo", "gamefi", "--journal-out", str(journal)])
        lines = journal.read_text().splitlines()
        # tamper with a deposited amount mid-journal
        for i, line in enumerate(lines):
            obj = json.loads(line)
            if obj["op"] == "deposited":
                obj["amount"] += 5
                lines[i] = json.dumps(obj, sort_keys=True)
                break
        journal.write_text("\n".join(lines) + "\n")
        capsys.readouterr()
        assert run(["ledger-replay", str(journal)]) == cli.EXIT_PHASE


class TestUsage:
    def test_no_command_is_usage_error(self):
        assert run([]) == cli.EXIT_USAGE

    def test_unknown_command_is_usage_error(self):
        assert run(["frobnicate"]) == cli.EXIT_USAGE
