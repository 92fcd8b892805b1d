import json

import pytest

from tourguide.cli import main
from tourguide.config import default_flow_path


def test_validate_shipped_flow_exits_zero(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("OK:")


def test_validate_shipped_flow_strict_questions():
    assert main(["validate", "--flow", str(default_flow_path()),
                 "--strict-questions"]) == 0


def test_validate_broken_flow_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("s0\tice_break\tどう？\tdefault\t\tnowhere\n", encoding="utf-8")
    assert main(["validate", "--flow", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "unknown_state" in err


def test_validate_strict_catches_missing_marker(tmp_path):
    sheet = (
        "s0\tice_break\tこんにちは。\tdefault\t\tend\n"
        "end\trecommend\tどうも。\t\t\t\n"
    )
    path = tmp_path / "flow.tsv"
    path.write_text(sheet, encoding="utf-8")
    assert main(["validate", "--flow", str(path)]) == 0
    assert main(["validate", "--flow", str(path), "--strict-questions"]) == 1


def test_simulate_writes_report(tmp_path):
    from tourguide.config import default_personas_dir
    persona = default_personas_dir() / "cooperative_yes.json"
    report_path = tmp_path / "out" / "report.json"
    assert main(["simulate", "--persona", str(persona),
                 "--report", str(report_path)]) == 0
    payload = json.loads(report_path.read_text(encoding="utf-8"))
    assert payload["persona_id"] == "cooperative_yes"
    assert payload["ended_cleanly"] is True
    assert payload["transcript"]


def test_simulate_report_bytes_stable(tmp_path):
    from tourguide.config import default_personas_dir
    persona = default_personas_dir() / "reluctant_no.json"
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["simulate", "--persona", str(persona), "--seed", "3",
                 "--report", str(a)]) == 0
    assert main(["simulate", "--persona", str(persona), "--seed", "3",
                 "--report", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_pack_outputs(tmp_path, capsys):
    out_dir = tmp_path / "reports"
    junit = tmp_path / "junit.xml"
    assert main(["simulate-pack", "--out-dir", str(out_dir),
                 "--junit", str(junit)]) == 0
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "durations.png").exists()
    assert (out_dir / "coverage.png").exists()
    assert (out_dir / "pack.json").exists()
    assert junit.exists()
    reports = sorted(p.name for p in out_dir.glob("*.json") if p.name != "pack.json")
    assert reports == ["cooperative_yes.json", "curious_questions.json",
                       "reluctant_no.json", "terse_defaults.json"]
    pack = json.loads((out_dir / "pack.json").read_text(encoding="utf-8"))
    assert pack["coverage"]["state_coverage"] == 1.0
    assert pack["longest_path_duration_s"] <= 600.0
    out = capsys.readouterr().out
    assert "coverage=1.00" in out


def test_simulate_pack_empty_dir_fails(tmp_path):
    assert main(["simulate-pack", "--dir", str(tmp_path),
                 "--out-dir", str(tmp_path / "out")]) == 1


def test_unknown_command_rejected():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
