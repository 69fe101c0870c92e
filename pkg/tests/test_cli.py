import filecmp

import pytest

from degenpde.cli import list_presets, main


def test_list_presets_contents(capsys):
    assert main(["list-presets"]) == 0
    out = capsys.readouterr().out
    assert "model:v=" in out
    assert "random:seed=" in out
    assert "model_manufactured" in out
    assert out.strip()


def test_bundled_experiment_runs_and_is_deterministic(tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["run", "model_manufactured", "--out", str(out1)]) == 0
    assert main(["run", "model_manufactured", "--out", str(out2),
                 "--threads", "2"]) == 0
    names = sorted(p.name for p in out1.iterdir())
    assert "summary.txt" in names
    assert "manufactured.report.txt" in names
    assert "manufactured.records" in names
    assert "manufactured.dat" in names
    match, mismatch, errors = filecmp.cmpfiles(out1, out2, names, shallow=False)
    assert mismatch == [] and errors == []
    summary = (out1 / "summary.txt").read_text()
    assert "result = PASS" in summary
    assert "failed = 0" in summary


def test_invalid_nu_rejected(tmp_path, capsys):
    spec = tmp_path / "bad.spec"
    spec.write_text(
        "[experiment]\nname = bad\nseed = 1\nnu = 1.5\ncoefficients = identity\n"
        "\n[grid]\ns = 0 1 9\ny2 = -1 1 9\nt = 0 1 9\n"
        "\n[problem]\nsolution = x\n"
        "\n[check c]\ntype = manufactured_error\n")
    assert main(["run", str(spec)]) == 2
    err = capsys.readouterr().err
    assert "nu = 1.5" in err
    assert "(0, 1)" in err


def test_unknown_check_type_rejected(tmp_path):
    spec = tmp_path / "odd.spec"
    spec.write_text(
        "[experiment]\nname = odd\nseed = 1\nnu = 0.5\ncoefficients = model:v=1\n"
        "\n[grid]\ns = 0 1 9\ny2 = -1 1 9\nt = 0 1 9\n"
        "\n[problem]\nsolution = x + t\n"
        "\n[check c]\ntype = no_such_check\n")
    assert main(["run", str(spec), "--out", str(tmp_path / "out")]) == 2


def test_missing_checks_rejected(tmp_path):
    spec = tmp_path / "empty.spec"
    spec.write_text(
        "[experiment]\nname = empty\nseed = 1\nnu = 0.5\ncoefficients = identity\n"
        "\n[grid]\ns = 0 1 9\ny2 = -1 1 9\nt = 0 1 9\n"
        "\n[problem]\nsolution = x\n")
    assert main(["run", str(spec)]) == 2


def test_list_presets_function():
    text = list_presets()
    assert "identity" in text
