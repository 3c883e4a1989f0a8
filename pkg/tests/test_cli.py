import json
import subprocess
import sys

import pytest

from optfuzz.cli import main


def fuzz(tmp_path, *extra, name="c"):
    return main(["fuzz", "--campaign", str(tmp_path / name), "--set", "campaign.iterations=2", *extra])


def test_fuzz_exit_reflects_bugs(tmp_path, capsys):
    assert fuzz(tmp_path) in (0, 1)
    out = capsys.readouterr().out
    assert "TOTAL" in out
    assert fuzz(tmp_path, "--set", "sut.planted_bugs=false", name="clean") == 0
    assert fuzz(tmp_path, "--set", "campaign.fail_on_bugs=false", name="nogate") == 0


def test_mini_profile_finds_planted_bugs(tmp_path, capsys):
    assert main(["fuzz", "--profile", "mini", "--campaign", str(tmp_path / "m")]) == 1
    out = capsys.readouterr().out
    assert "bugs: 2" in out


def test_usage_and_config_errors(tmp_path, capsys):
    assert main(["fuzz", "--config", str(tmp_path / "none.yaml"), "--campaign", str(tmp_path / "x")]) == 2
    assert main(["fuzz", "--set", "campaign.bogus=1", "--campaign", str(tmp_path / "x")]) == 2
    assert main(["report", "--campaign", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as e:
        main(["fuzz"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["launch"])
    assert e.value.code == 2
    assert "error" in capsys.readouterr().err


def test_environment_errors(tmp_path):
    args = ["--set", "generation.backend=http", "--set", "generation.url=http://127.0.0.1:9/v1",
            "--set", "generation.retries=1", "--set", "analysis.backend=http",
            "--set", "analysis.url=http://127.0.0.1:9/v1", "--set", "analysis.retries=1"]
    # every optimization blocks on its requirement: nothing was tested
    assert fuzz(tmp_path, *args) == 3
    assert main(["fuzz", "--set", "sut.kind=manifest", "--set", f"sut.manifest={tmp_path}/none.yaml",
                 "--campaign", str(tmp_path / "y")]) == 2


def test_locked_campaign_is_environment_error(tmp_path):
    d = tmp_path / "c"
    d.mkdir()
    (d / "campaign.lock").write_text(str(__import__("os").getpid()))
    assert fuzz(tmp_path) == 3


def test_report_is_pure(tmp_path, capsys):
    fuzz(tmp_path)
    capsys.readouterr()
    assert main(["report", "--campaign", str(tmp_path / "c")]) == 0
    a = capsys.readouterr().out
    main(["report", "--campaign", str(tmp_path / "c")])
    assert capsys.readouterr().out == a
    main(["report", "--campaign", str(tmp_path / "c"), "--json"])
    report = json.loads(capsys.readouterr().out)
    assert report["totals"]["tests"] == 8 * 20
    main(["report", "--campaign", str(tmp_path / "c"), "--time"])
    assert "time (s)" in capsys.readouterr().out


def test_replay_identical_with_same_exit(tmp_path, capsys):
    original = fuzz(tmp_path)
    capsys.readouterr()
    assert main(["replay", "--campaign", str(tmp_path / "c")]) == original
    assert "identical report, 0 model calls" in capsys.readouterr().err
    a = json.loads((tmp_path / "c" / "report.json").read_text())
    b = json.loads((tmp_path / "c.replay" / "report.json").read_text())
    assert a == b


def test_resume_finished_campaign(tmp_path, capsys):
    code = fuzz(tmp_path)
    assert main(["resume", "--campaign", str(tmp_path / "c")]) == code


def test_collect_and_summarize(tmp_path, capsys):
    assert main(["collect", "--out", str(tmp_path / "cat.jsonl")]) == 0
    assert len((tmp_path / "cat.jsonl").read_text().splitlines()) == 8
    assert main(["summarize", "--out", str(tmp_path / "s"), "--set", "campaign.requirement_format=RawImpl"]) == 0
    assert "== mul_add_fuse (RawImpl, human)" in capsys.readouterr().out


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "optfuzz.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
