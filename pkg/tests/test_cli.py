"""Command-line behavior: exit codes, report shapes, determinism, config."""

import json

import pytest

from tplcheck.cli import run

from conftest import FIXTURES

IR = FIXTURES / "ir"
APPS = FIXTURES / "apps"
POLICY = FIXTURES / "policy"
REGISTRY = str(FIXTURES / "registry" / "registry.json")
GRAPH = str(FIXTURES / "propagation" / "layered_fanout.txt")
SEEDS = ",".join(f"s{i:02d}" for i in range(1, 16))


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestUsage:
    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "usage" in capsys.readouterr().out

    def test_no_command(self, capsys):
        assert run([]) == 64

    def test_unknown_command(self, capsys):
        assert run(["frobnicate"]) == 64

    def test_unknown_flag(self, capsys):
        assert run(["check-app", "--bogus"]) == 64

    def test_missing_required_option(self, capsys):
        assert run(["check-app", "--registry", REGISTRY]) == 64
        err = capsys.readouterr().err
        assert "--ir" in err

    def test_subcommand_help(self, capsys):
        assert run(["check-tpl", "--help"]) == 0


class TestErrors:
    def test_missing_file(self, capsys):
        code = run(["fcg", "--ir", "no/such/file.ir"])
        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_malformed_ir(self, tmp_path, capsys):
        bad = tmp_path / "bad.ir"
        bad.write_text("class Broken {", encoding="utf-8")
        assert run(["fcg", "--ir", str(bad)]) == 1

    def test_unknown_tpl_id(self, capsys):
        code = run(
            [
                "check-tpl",
                "--ir",
                str(IR / "legality_imei.ir"),
                "--registry",
                REGISTRY,
                "--tpl",
                "nonexistent",
            ]
        )
        assert code == 1

    def test_unmatchable_library_inference(self, capsys):
        code = run(
            ["check-tpl", "--ir", str(APPS / "app_tp.ir"), "--registry", REGISTRY]
        )
        assert code == 1
        assert "--tpl" in capsys.readouterr().err


class TestFcg:
    def test_json_payload(self, capsys):
        code, payload = run_json(capsys, ["fcg", "--ir", str(IR / "lib_no_main.ir")])
        assert code == 0
        assert payload["schema"] == 1
        assert payload["coverage"]["nodes_total"] > 0

    def test_public_entries_coverage(self, capsys):
        code, payload = run_json(
            capsys,
            ["fcg", "--ir", str(IR / "lib_no_main.ir"), "--entries", "public"],
        )
        assert code == 0
        assert payload["coverage"]["coverage"] == pytest.approx(0.8)

    def test_text_format(self, capsys):
        code = run(["fcg", "--ir", str(IR / "lib_no_main.ir"), "--format", "text"])
        assert code == 0
        assert "coverage" in capsys.readouterr().out


class TestDataflow:
    def test_share_fixture_trace(self, capsys):
        code, payload = run_json(
            capsys, ["dataflow", "--ir", str(IR / "share_sim_with_gms.ir")]
        )
        assert code == 0
        (trace,) = payload["traces"]
        assert trace["pi"] == "SIM serial number"
        assert trace["label"] == "Sim Number"
        assert trace["root"].startswith("<com.app.share.Main:")
        assert trace["df"]
        assert all(smi.startswith("<com.app.share.Main:") for smi in trace["df"])


class TestExtractAdup:
    def test_golden_six(self, capsys):
        code, payload = run_json(
            capsys, ["extract-adup", "--policy", str(POLICY / "golden_six.conllu")]
        )
        assert code == 0
        assert len(payload["adups"]) == 4
        assert payload["source_id"] == "golden_six"


class TestCheckTpl:
    def test_undisclosed_exits_2(self, capsys):
        code, payload = run_json(
            capsys,
            [
                "check-tpl",
                "--ir",
                str(IR / "legality_imei.ir"),
                "--policy",
                str(POLICY / "tpl_contact_only.conllu"),
                "--registry",
                REGISTRY,
            ],
        )
        assert code == 2
        (finding,) = payload["findings"]
        assert finding["kind"] == "UndisclosedPiUsage"
        assert finding["pi"] == "IMEI"
        assert finding["confidence"] == "Exact"

    def test_disclosed_exits_0(self, capsys):
        code, payload = run_json(
            capsys,
            [
                "check-tpl",
                "--ir",
                str(IR / "legality_imei.ir"),
                "--policy",
                str(POLICY / "tpl_device_id.conllu"),
                "--registry",
                REGISTRY,
            ],
        )
        assert code == 0
        assert payload["findings"] == []

    def test_vague_twin_flags_vague_only(self, capsys):
        code, payload = run_json(
            capsys,
            [
                "check-tpl",
                "--ir",
                str(IR / "legality_imei.ir"),
                "--policy",
                str(POLICY / "tpl_vague.conllu"),
                "--registry",
                REGISTRY,
            ],
        )
        assert code == 2
        assert payload["findings"][0]["confidence"] == "VagueOnly"

    def test_policyless_registry_entry(self, capsys):
        code, payload = run_json(
            capsys,
            [
                "check-tpl",
                "--registry",
                str(FIXTURES / "registry" / "registry_nopolicy.json"),
                "--tpl",
                "shadysdk",
            ],
        )
        assert code == 2
        assert payload["findings"][0]["kind"] == "MissingPolicy"


class TestCheckApp:
    def test_concealed_usage_exits_2(self, capsys):
        code, payload = run_json(
            capsys,
            [
                "check-app",
                "--ir",
                str(APPS / "app_tp.ir"),
                "--policy",
                str(APPS / "app_tp.conllu"),
                "--registry",
                REGISTRY,
            ],
        )
        assert code == 2
        kinds = {f["kind"] for f in payload["findings"]}
        assert kinds == {"UndisclosedTplUsage", "UndisclosedDataInteraction"}
        assert payload["subject"] == "app_tp"

    def test_disclosed_app_exits_0(self, capsys):
        code, payload = run_json(
            capsys,
            [
                "check-app",
                "--ir",
                str(APPS / "app_tn.ir"),
                "--policy",
                str(APPS / "app_tn.conllu"),
                "--registry",
                REGISTRY,
            ],
        )
        assert code == 0
        assert payload["findings"] == []
        assert len(payload["interactions"]) == 2

    def test_golden_adds_counters(self, capsys):
        code, payload = run_json(
            capsys,
            [
                "check-app",
                "--ir",
                str(APPS / "app_tp.ir"),
                "--policy",
                str(APPS / "app_tp.conllu"),
                "--registry",
                REGISTRY,
                "--golden",
                str(APPS / "golden.json"),
            ],
        )
        assert code == 2
        assert payload["counters"]["tpl_list"]["trace"]["tp"] == 1

    def test_counters_absent_without_golden(self, capsys):
        _, payload = run_json(
            capsys,
            [
                "check-app",
                "--ir",
                str(APPS / "app_tp.ir"),
                "--policy",
                str(APPS / "app_tp.conllu"),
                "--registry",
                REGISTRY,
            ],
        )
        assert "counters" not in payload

    def test_app_id_not_in_golden(self, capsys):
        code = run(
            [
                "check-app",
                "--ir",
                str(APPS / "app_tp.ir"),
                "--registry",
                REGISTRY,
                "--app-id",
                "mystery",
                "--golden",
                str(APPS / "golden.json"),
            ]
        )
        assert code == 1


class TestPropagate:
    def test_layered_fanout_json(self, capsys):
        code, payload = run_json(
            capsys, ["propagate", "--graph", GRAPH, "--seeds", SEEDS]
        )
        assert code == 0
        assert payload["total_affected"] == 168
        assert [r["cumulative_count"] for r in payload["rounds"]] == [25, 168]

    def test_rounds_flag(self, capsys):
        code, payload = run_json(
            capsys,
            ["propagate", "--graph", GRAPH, "--seeds", SEEDS, "--rounds", "3"],
        )
        assert code == 0
        assert payload["total_affected"] == 170

    def test_text_table(self, capsys):
        code = run(["propagate", "--graph", GRAPH, "--seeds", SEEDS, "--format", "text"])
        assert code == 0
        out = capsys.readouterr().out
        assert "round  newly  cumulative  edge_hits" in out
        assert "total affected: 168" in out


class TestReport:
    ARGS = [
        "report",
        "--apps-dir",
        str(APPS),
        "--registry",
        REGISTRY,
        "--golden",
        str(APPS / "golden.json"),
    ]

    def test_combined_report(self, capsys):
        code, payload = run_json(capsys, self.ARGS)
        assert code == 2
        assert len(payload["apps"]) == 6
        assert payload["counters"]["tpl_list"]["trace"] == {
            "tp": 3,
            "tn": 1,
            "fp": 1,
            "fn": 1,
            "accuracy": 4 / 6,
            "precision": 3 / 4,
            "recall": 3 / 4,
            "f1": 0.75,
        }

    def test_with_propagation_section(self, capsys):
        code, payload = run_json(
            capsys, self.ARGS + ["--graph", GRAPH, "--seeds", SEEDS]
        )
        assert code == 2
        assert payload["propagation"]["total_affected"] == 168

    def test_byte_identical_across_runs(self, tmp_path):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert run(self.ARGS + ["--out", str(out1)]) == 2
        assert run(self.ARGS + ["--out", str(out2)]) == 2
        assert out1.read_bytes() == out2.read_bytes()

    def test_timestamps_opt_in(self, capsys):
        _, payload = run_json(capsys, self.ARGS)
        assert "generated_at" not in payload
        _, stamped = run_json(capsys, self.ARGS + ["--timestamps"])
        assert "generated_at" in stamped


class TestConfigFile:
    def test_config_fills_missing_options(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"registry = {REGISTRY}\nformat = text\n", encoding="utf-8"
        )
        code = run(
            [
                "check-app",
                "--config",
                str(cfg),
                "--ir",
                str(APPS / "app_tn.ir"),
                "--policy",
                str(APPS / "app_tn.conllu"),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("subject app_tn")

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("format = text\n", encoding="utf-8")
        code, payload = run_json(
            capsys,
            [
                "check-app",
                "--config",
                str(cfg),
                "--format",
                "json",
                "--ir",
                str(APPS / "app_tn.ir"),
                "--policy",
                str(APPS / "app_tn.conllu"),
                "--registry",
                REGISTRY,
            ],
        )
        assert code == 0
        assert payload["schema"] == 1

    def test_malformed_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("no equals sign here\n", encoding="utf-8")
        code = run(
            ["check-app", "--config", str(cfg), "--ir", str(APPS / "app_tn.ir")]
        )
        assert code == 1

    def test_config_rounds_value(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"graph = {GRAPH}\nrounds = 3\n", encoding="utf-8")
        code, payload = run_json(
            capsys, ["propagate", "--config", str(cfg), "--seeds", SEEDS]
        )
        assert code == 0
        assert payload["total_affected"] == 170
