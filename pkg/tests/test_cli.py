import json

import pytest

from polybergman import config as cfgmod
from polybergman.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, fmt, main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_float_format_round_trips():
    assert float(fmt(0.1)) == 0.1 and fmt(None) == "" and fmt(True) == "true" and fmt(3) == "3"


def test_kernel_verb_writes_outputs(tmp_path):
    assert run(tmp_path, "kernel", "--set", "kernel.random_pairs=4") == EXIT_OK
    summary = json.loads((tmp_path / "kernel.json").read_text())
    assert summary["schema_version"] == cfgmod.SCHEMA_VERSION
    assert max(summary["max_relative_error"].values()) < 1e-8
    assert len((tmp_path / "kernel.csv").read_text().splitlines()) == 5
    echoed = cfgmod.load(tmp_path / "resolved_config.yaml")
    assert echoed.kernel.random_pairs == 4 and echoed.output.dir == str(tmp_path)


def test_disk_kernel_comparison(tmp_path):
    code = run(tmp_path, "kernel", "--set", "potential.kind=constant", "--set", "kernel.sources=[gram,koshelev]",
               "--set", "n=40")
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "kernel.json").read_text())
    assert summary["max_relative_error"]["gram_vs_koshelev"] < 1e-6


def test_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["kernel", "--out", str(d), "--seed", "11", "--set", "kernel.random_pairs=3"]) == EXIT_OK
    assert (a / "kernel.csv").read_bytes() == (b / "kernel.csv").read_bytes()


def test_format_selection(tmp_path):
    assert run(tmp_path, "kernel", "--format", "csv", "--set", "kernel.random_pairs=2") == EXIT_OK
    assert (tmp_path / "kernel.csv").exists() and not (tmp_path / "kernel.json").exists()


def test_metrics_verb(tmp_path):
    assert run(tmp_path, "metrics", "--set", "metrics.heatmap=4") == EXIT_OK
    summary = json.loads((tmp_path / "metrics.json").read_text())
    assert summary["points"][0]["metric1"] == pytest.approx(4 / 3.141592653589793)
    assert (tmp_path / "metric1_heatmap.svg").read_text().startswith("<svg")


def test_blowup_verb_gaussian(tmp_path):
    code = run(tmp_path, "blowup", "--set", "blowup.source=gaussian", "--set", "blowup.m_list=[10,20]",
               "--threads", "2")
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "blowup.json").read_text())
    assert all(r["sup_error"] < 1e-10 for s in summary["studies"] for r in s["rows"])
    assert (tmp_path / "blowup.svg").exists()


def test_bounds_verb(tmp_path):
    assert run(tmp_path, "bounds", "--set", "bounds.trials=5", "--set", "bounds.propositions=[lemma1]") == EXIT_OK
    assert json.loads((tmp_path / "bounds.json").read_text())["propositions"]["lemma1"]["trials"] == 5


def test_symbolic_verb(tmp_path, capsys):
    assert run(tmp_path, "symbolic", "solve", "--q", "1", "--order", "1") == EXIT_OK
    assert "L_0 = (2/π) β" in capsys.readouterr().out
    assert run(tmp_path, "symbolic", "verify", "--order", "1") == EXIT_OK
    assert "residual zero" in capsys.readouterr().out


def test_assumptions_verb(tmp_path):
    assert run(tmp_path, "assumptions", "--set", "potential.kind=quartic") == EXIT_OK
    assert json.loads((tmp_path / "assumptions.json").read_text())["a_iv_holds"] is True


def test_cache_verb(tmp_path, capsys):
    assert main(["cache", "inspect", "--set", f"cache.dir={tmp_path}"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["entries"] == []


def test_config_error_exit(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("potential:\n  kinds: x\n")
    assert run(tmp_path, "kernel", "--config", str(bad)) == EXIT_CONFIG


def test_validation_error_exit(tmp_path):
    assert run(tmp_path, "kernel", "--set", "m=-1") == EXIT_VALIDATION
    assert run(tmp_path, "symbolic", "solve", "--q", "3") == EXIT_VALIDATION


def test_numerical_error_exit(tmp_path, monkeypatch):
    from polybergman import cli
    from polybergman.errors import NotPositiveDefiniteError

    def boom(*_a, **_k):
        raise NotPositiveDefiniteError("pivot 7 is not positive")

    monkeypatch.setattr(cli, "run_harness", boom)
    assert run(tmp_path, "bounds") == EXIT_NUMERICAL
