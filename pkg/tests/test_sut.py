import sys

import pytest

from optfuzz.errors import ConfigError, SandboxFailure
from optfuzz.sut.base import CompileStatus, ExitConvention, Mode, RunRequest, RunStatus, classify, trigger_lines
from optfuzz.sut.manifest import ManifestSut, load_manifest, parse_manifest
from optfuzz.sut.minilang.sut import (
    PLANTED_CRASH_TRIGGER,
    PLANTED_MISCOMPILE_TRIGGER,
    MiniLangSut,
    list_minilang_optimizations,
)
from optfuzz.sut.sandbox import run_sandboxed

from conftest import load_fixture

DESK = load_fixture("desk_checks.json")


def run(sut, code, mode=Mode.OPTIMIZED, **kw):
    return sut.compile_and_run(RunRequest(code, mode, **kw))


@pytest.fixture(params=["inprocess", "subprocess"])
def planted(request):
    return MiniLangSut(planted_bugs=True, isolation=request.param)


def test_add_zero_with_input(planted):
    r = run(planted, "let a = x + 0; print(a)", inputs={"x": 2})
    assert (r.compile_status, r.run_status) == (CompileStatus.OK, RunStatus.OK)
    assert r.stdout.decode() == DESK["add_zero"]["stdout"]
    assert "WFOPT add_zero_elim" in r.trigger_log


def test_empty_program_rejected(planted):
    for mode in Mode:
        assert run(planted, "", mode).compile_status is CompileStatus.COMPILE_REJECT


def test_crash_intrinsic_aborts(planted):
    assert DESK["crash_intrinsic"]["returncode"] < 0
    assert run(planted, "print(crash_if_fused())\n").run_status is RunStatus.RUN_CRASH


def test_planted_miscompile_differs(planted):
    opt = run(planted, PLANTED_MISCOMPILE_TRIGGER)
    base = run(planted, PLANTED_MISCOMPILE_TRIGGER, Mode.BASELINE)
    assert opt.stdout.decode() == DESK["miscompile_optimized"]["stdout"]
    assert base.stdout.decode() == DESK["miscompile_baseline"]["stdout"]
    assert opt.stdout != base.stdout


def test_planted_crash_only_when_optimized(planted):
    assert run(planted, PLANTED_CRASH_TRIGGER).run_status is RunStatus.RUN_CRASH
    base = run(planted, PLANTED_CRASH_TRIGGER, Mode.BASELINE)
    assert base.stdout.decode() == DESK["repeat_crash_baseline"]["stdout"]


def test_bugs_off_means_agreement():
    sut = MiniLangSut(planted_bugs=False)
    for code in (PLANTED_MISCOMPILE_TRIGGER, PLANTED_CRASH_TRIGGER):
        assert run(sut, code).stdout == run(sut, code, Mode.BASELINE).stdout


def test_baseline_emits_no_triggers():
    sut = MiniLangSut()
    assert run(sut, "let a = 2\nprint(a + 0)\n", Mode.BASELINE).trigger_log == ()


def test_deterministic():
    sut = MiniLangSut(planted_bugs=True)
    code = "let x = 3\nlet y = x * 2 + 1\nprint(y, -(-x))\n"
    assert run(sut, code) == run(sut, code)


def test_catalog_contract():
    opts = list_minilang_optimizations()
    names = [o.name for o in opts]
    assert len(opts) >= 8 and len(set(names)) == len(names)
    assert all(o.name in o.main_source for o in opts)


def test_classify_exit_conventions():
    conv = ExitConvention(compile_reject=(2,), compile_crash=(3,), timeout=(124,), run_phase_marker="RUN")
    assert classify(0, b"", b"").run_status is RunStatus.OK
    assert classify(2, b"", b"", convention=conv).compile_status is CompileStatus.COMPILE_REJECT
    assert classify(3, b"", b"", convention=conv).compile_status is CompileStatus.COMPILE_CRASH
    assert classify(124, b"", b"", convention=conv).run_status is RunStatus.TIMEOUT
    assert classify(None, b"", b"", timed_out=True).run_status is RunStatus.TIMEOUT
    # a signal before the run-phase marker is a compiler crash
    assert classify(-11, b"", b"", convention=conv).compile_status is CompileStatus.COMPILE_CRASH
    r = classify(-11, b"", b"RUN\n", convention=conv)
    assert r.run_status is RunStatus.RUN_CRASH and r.exit_signal == 11


def test_trigger_lines_only_prefixed():
    assert trigger_lines(b"noise\nWFOPT a\r\nWFOPTb\nWFOPT c") == ("WFOPT a", "WFOPT c")


def test_sandbox_timeout_and_cap():
    out = run_sandboxed([sys.executable, "-c", "import time; time.sleep(5)"], time_limit=0.3)
    assert out.timed_out
    out = run_sandboxed([sys.executable, "-c", "print('x' * 5000)"], time_limit=5, output_cap=100)
    assert out.truncated and len(out.stdout) == 100


def test_sandbox_failure_is_not_a_sut_crash():
    with pytest.raises(SandboxFailure):
        run_sandboxed(["/nonexistent/compiler"], time_limit=1)


def test_subprocess_timeout_reported():
    sut = MiniLangSut(isolation="subprocess")
    # a generous program still finishes; a tiny limit times out
    r = run(sut, "print(1)\n", time_limit=0.001)
    assert r.run_status is RunStatus.TIMEOUT


def test_manifest_sut(tmp_path):
    script = tmp_path / "cc.py"
    script.write_text(
        "import sys\n"
        "src = open(sys.argv[-1]).read()\n"
        "if 'O2' in sys.argv and 'fold' in src:\n"
        "    print('WFOPT my_fold', file=sys.stderr)\n"
        "if not src.strip():\n"
        "    sys.exit(2)\n"
        "print(len(src))\n"
    )
    (tmp_path / "src").mkdir()
    (tmp_path / "src" / "opt.c").write_text("int my_fold(int x) { return x + 0; }\n")
    (tmp_path / "m.yaml").write_text(
        "name: toy\ninput_kind: text\nsource_roots: [src]\nopt_keywords: [fold]\n"
        f"commands:\n  compile_run_optimized: [{sys.executable}, ./cc.py, O2]\n"
        f"  compile_run_baseline: [{sys.executable}, ./cc.py, O0]\n"
    )
    sut = ManifestSut.from_file(tmp_path / "m.yaml")
    r = run(sut, "fold me")
    assert r.stdout == b"7\n" and r.trigger_log == ("WFOPT my_fold",)
    assert run(sut, "   ").compile_status is CompileStatus.COMPILE_REJECT
    assert sut.descriptor().source_roots == (str((tmp_path / "src").resolve()),)


def test_manifest_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_manifest({"name": "x"}, tmp_path)
    with pytest.raises(ConfigError):
        parse_manifest({"bogus": 1}, tmp_path)
    with pytest.raises(ConfigError):
        load_manifest(tmp_path / "missing.yaml")
