import json
import subprocess
import sys

from conftest import FIXTURES
from skillforge import reference_kb_path
from skillforge.cli import main

QUERIES = FIXTURES / "queries"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


KB = ["--kb", reference_kb_path()]


class TestValidate:
    def test_reference_kb_passes(self, capsys):
        code, out, _ = run(capsys, "validate", *KB)
        assert code == 0
        assert "ok:" in out

    def test_strict_fails_on_documentation_warnings(self, capsys):
        code, out, _ = run(capsys, "validate", "--strict", *KB)
        assert code == 1
        assert "W201_ELEMENT_NO_SKILLS" in out

    def test_cycle_kb_exits_one(self, capsys, tmp_path):
        bad = tmp_path / "bad.skb"
        bad.write_text(
            "skb 1\n"
            'skill a { label: "A"; category: perception; requires: [b]; }\n'
            'skill b { label: "B"; category: perception; requires: [a]; }\n',
            encoding="utf-8",
        )
        code, out, _ = run(capsys, "validate", "--kb", bad)
        assert code == 1
        assert "E101_DEPENDENCY_CYCLE" in out

    def test_missing_file_exits_two(self, capsys, tmp_path):
        code, _, err = run(capsys, "validate", "--kb", tmp_path / "absent.skb")
        assert code == 2
        assert "absent.skb" in err

    def test_json_diagnostics(self, capsys):
        code, out, _ = run(capsys, "validate", "--json", *KB)
        assert code == 0
        payload = json.loads(out)
        assert all(d["severity"] == "warning" for d in payload)

    def test_env_var_supplies_kb_path(self, capsys, monkeypatch):
        monkeypatch.setenv("SKILLFORGE_KB", reference_kb_path())
        code, _, _ = run(capsys, "validate")
        assert code == 0

    def test_no_kb_anywhere_exits_two(self, capsys, monkeypatch):
        monkeypatch.delenv("SKILLFORGE_KB", raising=False)
        code, _, err = run(capsys, "validate")
        assert code == 2
        assert "SKILLFORGE_KB" in err


class TestGenerate:
    def test_markings_query_matches_goldens(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "generate", *KB,
            "--behavior", "lane_keeping", "--domain", "urban",
            "--elements", "solid_lane_marking,dashed_lane_marking",
            "--out", tmp_path,
        )
        assert code == 0
        assert "nodes: 17" in out and "edges: 25" in out
        for name, golden in [
            ("graph.json", "lane_keeping_markings.json"),
            ("trace.json", "lane_keeping_markings.trace.json"),
            ("trace.md", "lane_keeping_markings.trace.md"),
        ]:
            assert (tmp_path / name).read_bytes() == (FIXTURES / golden).read_bytes()

    def test_empty_selection_matches_base_golden(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "generate", *KB,
            "--behavior", "lane_keeping", "--domain", "urban",
            "--elements", "", "--out", tmp_path,
        )
        assert code == 0
        assert "nodes: 14" in out
        assert (tmp_path / "graph.json").read_bytes() == (FIXTURES / "lane_keeping_base.json").read_bytes()

    def test_granularity_one_matches_condensed_golden(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "generate", *KB,
            "--behavior", "lane_keeping", "--domain", "urban",
            "--elements", "solid_lane_marking,dashed_lane_marking",
            "--granularity", "1", "--out", tmp_path,
        )
        assert code == 0
        assert (tmp_path / "graph.json").read_bytes() == (FIXTURES / "lane_keeping_markings_g1.json").read_bytes()

    def test_dot_format(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "generate", *KB,
            "--behavior", "lane_keeping", "--domain", "urban",
            "--elements", "", "--format", "dot", "--out", tmp_path,
        )
        assert code == 0
        assert (tmp_path / "graph.dot").read_bytes() == (FIXTURES / "lane_keeping_base.dot").read_bytes()

    def test_elements_from_file(self, capsys, tmp_path):
        listing = tmp_path / "elements.txt"
        listing.write_text("# markings\nsolid_lane_marking\ndashed_lane_marking\n", encoding="utf-8")
        code, out, _ = run(
            capsys, "generate", *KB,
            "--behavior", "lane_keeping", "--domain", "urban",
            "--elements", f"@{listing}", "--out", tmp_path / "out",
        )
        assert code == 0
        assert "nodes: 17" in out

    def test_unknown_token_exits_one(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "generate", *KB,
            "--behavior", "lane_keeping", "--domain", "urban",
            "--elements", "hologram", "--out", tmp_path,
        )
        assert code == 1
        assert "hologram" in err

    def test_stamp_adds_timestamp_only_when_asked(self, capsys, tmp_path):
        run(capsys, "generate", *KB, "--behavior", "lane_keeping", "--domain", "urban",
            "--elements", "", "--out", tmp_path / "a")
        run(capsys, "generate", *KB, "--behavior", "lane_keeping", "--domain", "urban",
            "--elements", "", "--out", tmp_path / "b", "--stamp")
        plain = json.loads((tmp_path / "a" / "trace.json").read_text())
        stamped = json.loads((tmp_path / "b" / "trace.json").read_text())
        assert "generated_at" not in plain
        assert "generated_at" in stamped


class TestDiff:
    def test_identical_queries_empty_diff(self, capsys):
        code, out, _ = run(capsys, "diff", *KB, QUERIES / "markings.odd", QUERIES / "markings.odd")
        assert code == 0
        assert "identical" in out

    def test_base_vs_markings_lists_three_added_skills(self, capsys):
        code, out, _ = run(capsys, "diff", *KB, QUERIES / "base.odd", QUERIES / "markings.odd")
        assert code == 0
        assert "added nodes (3):" in out
        for skill in ("perceive_lane_markings", "perceive_solid_lane_markings",
                      "perceive_dashed_lane_markings"):
            assert skill in out
        assert "removed nodes (0):" in out

    def test_json_output(self, capsys):
        code, out, _ = run(capsys, "diff", *KB, "--json", QUERIES / "base.odd", QUERIES / "markings.odd")
        assert code == 0
        payload = json.loads(out)
        assert payload["schema"] == "skilldiff/1"
        assert len(payload["added_nodes"]) == 3
        assert payload["removed_nodes"] == []

    def test_expect_empty_flag(self, capsys):
        code, _, _ = run(capsys, "diff", *KB, "--expect-empty",
                         QUERIES / "base.odd", QUERIES / "markings.odd")
        assert code == 1
        code, _, _ = run(capsys, "diff", *KB, "--expect-empty",
                         QUERIES / "base.odd", QUERIES / "base.odd")
        assert code == 0

    def test_malformed_query_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.odd"
        bad.write_text("odd 1\nquery { behavior: lane_keeping; }\n", encoding="utf-8")
        code, _, err = run(capsys, "diff", *KB, bad, QUERIES / "base.odd")
        assert code == 1
        assert "E015_MISSING_KEY" in err


class TestList:
    def test_behaviors_include_lane_keeping(self, capsys):
        code, out, _ = run(capsys, "list", *KB, "behaviors")
        assert code == 0
        assert "lane_keeping" in out and "[L4]" in out

    def test_domains(self, capsys):
        code, out, _ = run(capsys, "list", *KB, "domains")
        assert code == 0
        assert out.splitlines() == ["highway  German highway", "urban  Urban area"]

    def test_elements_domain_filter_matches_independent_scan(self, capsys, kb):
        code, out, _ = run(capsys, "list", *KB, "elements", "--domain", "highway")
        assert code == 0
        listed = [line.split()[0] for line in out.splitlines()]
        expected = sorted(
            e.id for e in kb.scene_elements.values()
            if not e.domains or "highway" in e.domains
        )
        assert listed == expected
        assert "curb" not in listed  # urban-only

    def test_unknown_domain_filter(self, capsys):
        code, _, err = run(capsys, "list", *KB, "elements", "--domain", "orbit")
        assert code == 1
        assert "orbit" in err

    def test_empty_kb_lists_nothing(self, capsys, tmp_path):
        empty = tmp_path / "empty.skb"
        empty.write_text("skb 1\n", encoding="utf-8")
        code, out, _ = run(capsys, "list", "--kb", empty, "elements")
        assert code == 0
        assert out == ""


class TestDeterminism:
    def test_two_subprocess_runs_are_byte_identical(self, tmp_path):
        outputs = []
        for sub in ("one", "two"):
            out_dir = tmp_path / sub
            result = subprocess.run(
                [sys.executable, "-m", "skillforge.cli", "generate", *KB,
                 "--behavior", "lane_keeping", "--domain", "urban",
                 "--elements", "solid_lane_marking,dashed_lane_marking",
                 "--out", str(out_dir)],
                capture_output=True, text=True,
            )
            assert result.returncode == 0, result.stderr
            outputs.append({
                name: (out_dir / name).read_bytes()
                for name in ("graph.json", "trace.json", "trace.md")
            })
        assert outputs[0] == outputs[1]

    def test_fingerprint_command_is_stable(self, capsys):
        code, out_a, _ = run(capsys, "fingerprint", *KB)
        code_b, out_b, _ = run(capsys, "fingerprint", *KB)
        assert code == code_b == 0
        assert out_a == out_b
