from __future__ import annotations

import json
import shutil

import pytest

from restfix.cli import main
from support import FIXTURES

SPEC = str(FIXTURES / "switchbot_v11.yaml")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_detect_missing_headers_exit_1(capsys):
    code, out, _ = run(capsys, "detect", "--spec", SPEC, str(FIXTURES / "missing_headers.py"))
    assert code == 1
    assert "sign, t, nonce" in out


def test_detect_conforming_exit_0(capsys):
    code, out, _ = run(capsys, "detect", "--spec", SPEC, "--format", "json", str(FIXTURES / "version_bump_fixed.py"))
    assert code == 0
    assert json.loads(out)["deviations"] == []


def test_detect_syntax_error_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.py"
    bad.write_text("x = 1\ndef f(:\n")
    code, _, err = run(capsys, "detect", "--spec", SPEC, str(bad))
    assert code == 2
    assert "bad.py:2" in err


@pytest.mark.parametrize("argv", [["--spec", "/nonexistent.yaml", "x.py"], ["--spec", SPEC, "/nonexistent.py"]])
def test_detect_unreadable_exit_2(capsys, argv):
    assert run(capsys, "detect", *argv)[0] == 2


def test_detect_json_round_trip(capsys):
    code, out, _ = run(capsys, "detect", "--spec", SPEC, "--format", "json", str(FIXTURES / "version_bump.py"))
    assert code == 1
    data = json.loads(out)
    assert [d["category"] for d in data["deviations"]] == ["Endpoint", "RequestHeaders"]
    assert json.loads(json.dumps(data)) == data


def test_detect_multiple_files(capsys):
    code, out, _ = run(
        capsys, "detect", "--spec", SPEC, "--format", "json", str(FIXTURES / "missing_headers.py"), str(FIXTURES / "version_bump_fixed.py")
    )
    assert code == 1 and len(json.loads(out)) == 2


def _mock_dir(tmp_path, stem, responses):
    fx = tmp_path / "fx"
    fx.mkdir(exist_ok=True)
    for k, text in enumerate(responses, 1):
        (fx / f"{stem}.attempt{k}.txt").write_text(text)
    cfg = tmp_path / "backend.yaml"
    cfg.write_text("fixtures: fx\n")
    return str(cfg)


def test_repair_writes_fixed_file(capsys, tmp_path):
    src = tmp_path / "version_bump.py"
    shutil.copy(FIXTURES / "version_bump.py", src)
    fixed = (FIXTURES / "version_bump_fixed.py").read_text()
    cfg = _mock_dir(tmp_path, "version_bump", ["```python\n" + fixed + "\n```\n"])
    code, out, _ = run(capsys, "repair", "--spec", SPEC, "--backend", "mock", "--backend-config", cfg, str(src))
    assert code == 0
    out_file = tmp_path / "version_bump.fixed.py"
    assert out_file.read_text().strip() == fixed.strip()
    assert "attempt 1/5: verified" in out


def test_repair_nothing_to_do(capsys, tmp_path):
    cfg = _mock_dir(tmp_path, "unused", [])
    code, out, _ = run(
        capsys, "repair", "--spec", SPEC, "--backend", "mock", "--backend-config", cfg, str(FIXTURES / "version_bump_fixed.py")
    )
    assert code == 0 and "nothing to repair" in out


def test_repair_all_fail_json(capsys, tmp_path):
    src = tmp_path / "mh.py"
    shutil.copy(FIXTURES / "missing_headers.py", src)
    cfg = _mock_dir(tmp_path, "mh", ["```python\n" + src.read_text() + "```\n"] * 5)
    code, out, _ = run(
        capsys, "repair", "--spec", SPEC, "--backend", "mock", "--backend-config", cfg, "--format", "json", "--out", str(tmp_path / "o.py"), str(src)
    )
    assert code == 1
    data = json.loads(out)
    assert len(data["outcome"]["attempts"]) == 5 and data["outcome"]["success"] is False
    assert not (tmp_path / "o.py").exists()


def test_repair_requires_backend(capsys):
    with pytest.raises(SystemExit) as info:
        main(["repair", "--spec", SPEC, str(FIXTURES / "missing_headers.py")])
    assert info.value.code == 2


def test_repair_bad_backend_config(capsys, tmp_path):
    cfg = tmp_path / "b.yaml"
    cfg.write_text("model: x\n")
    code, _, err = run(capsys, "repair", "--spec", SPEC, "--backend", "http", "--backend-config", str(cfg), str(FIXTURES / "missing_headers.py"))
    assert code == 2 and "base_url" in err


def test_attempts_must_be_positive():
    with pytest.raises(SystemExit) as info:
        main(["repair", "--spec", SPEC, "--backend", "mock", "--attempts", "0", "x.py"])
    assert info.value.code == 2


def test_eval_demo_text(capsys):
    code, out, _ = run(capsys, "eval", "--demo")
    assert code == 0
    assert "Detection results of deviation points" in out
    assert "2/4" in out and "Fix rates" not in out


def test_eval_demo_with_mock_backend(capsys, tmp_path):
    from restfix.demo_corpus import bundled_manifest

    cfg = str(bundled_manifest().parent / "mock_backend.yaml")
    out_json = tmp_path / "result.json"
    code, out, _ = run(capsys, "eval", "--demo", "--backend", "mock", "--backend-config", cfg, "--out", str(out_json))
    assert code == 0
    assert "dcfix" in out and "baseline" in out
    data = json.loads(out_json.read_text())
    assert data["repair"]["apis"]["SwitchBot API"]["dcfix"]["Total"] == {"hits": 8, "total": 8}


def test_eval_json_format(capsys):
    code, out, _ = run(capsys, "eval", "--demo", "--format", "json")
    assert code == 0 and "detection" in json.loads(out)


def test_eval_missing_manifest_exit_2(capsys, tmp_path):
    assert run(capsys, "eval", str(tmp_path / "nope.yaml"))[0] == 2
    assert run(capsys, "eval")[0] == 2
