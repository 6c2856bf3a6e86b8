import json
import subprocess
import sys

import pytest

from infotrade.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main
from infotrade.config import dump_config, load_preset, parse_config
from infotrade.experiments import Check, OUTPUT_ENV, invariant_checks, run_experiment
from infotrade.plotting import emit_plot_script


def small(name, **mc):
    cfg = load_preset(name)
    if mc:
        cfg = cfg.model_copy(update={"mc": cfg.mc.model_copy(update=mc)})
    return cfg


def read_all(d):
    return {p.name: p.read_bytes() for p in sorted(d.glob("*.csv"))}


def test_fig1_run_writes_three_curves(tmp_path):
    res = run_experiment(load_preset("fig1"), tmp_path)
    assert res.passed, res.failures()
    names = sorted(p.name for p in res.artifacts)
    assert names == ["info_sigma_0.25.csv", "info_sigma_0.5.csv", "info_sigma_0.75.csv"]
    m = json.loads(res.manifest.read_text())
    assert {"config", "seeds", "code_version", "wall_time_s", "artifacts", "checks"} <= set(m)
    assert m["passed"] is True


def test_runs_are_byte_identical(tmp_path):
    cfg = small("fig5", paths=200)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    assert read_all(tmp_path / "a") == read_all(tmp_path / "b")


def test_manifest_regenerates_artifacts(tmp_path):
    res = run_experiment(small("fig2", paths=50), tmp_path / "a")
    m = json.loads(res.manifest.read_text())
    # the manifest embeds a complete config file
    cfg = parse_config(json.dumps(m["config"]))
    run_experiment(cfg, tmp_path / "b")
    assert read_all(tmp_path / "a") == read_all(tmp_path / "b")


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    res = run_experiment(load_preset("invariants"))
    assert res.output_dir == tmp_path / "env" and res.manifest.exists()


def test_invariant_suite_counts(tmp_path):
    checks = invariant_checks(load_preset("invariants"))
    assert len(checks) >= 8 and all(isinstance(c, Check) for c in checks)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_plot_script_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_plot_script([], "mutual-info-curve", tmp_path / "p.py")
    with pytest.raises(FileNotFoundError, match="info_sigma_0.25.csv"):
        emit_plot_script([tmp_path / "info_sigma_0.25.csv"], "mutual-info-curve", tmp_path / "p.py")


def test_plot_scripts_render(tmp_path):
    pytest.importorskip("matplotlib")
    r1 = run_experiment(load_preset("fig1"), tmp_path / "f1")
    r2 = run_experiment(small("fig2", paths=50), tmp_path / "f2")
    for r, png in ((r1, "mutual_information.png"), (r2, "sample_paths.png")):
        subprocess.run([sys.executable, str(r.plot_script)], check=True, capture_output=True)
        assert (r.output_dir / png).stat().st_size > 0
    # two parameter rows, market and informed side by side
    assert sum(p.name.startswith("paths_row") for p in r2.artifacts) == 2
    assert "plt.subplots(len(rows), 2" in r2.plot_script.read_text()


def test_cli_validate(tmp_path, capsys):
    assert main(["validate", "fig4"]) == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": {"kind": "nope"}}))
    assert main(["validate", str(bad)]) == EXIT_CONFIG
    assert main(["validate", "missing-file.json"]) == EXIT_CONFIG


def test_cli_run_and_overrides(tmp_path, capsys):
    assert main(["run", "fig5", "--paths", "300", "--seed", "2", "--out", str(tmp_path)]) in (EXIT_OK, EXIT_CHECK)
    report = json.loads(capsys.readouterr().out)
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["seeds"]["base_seed"] == 2 and m["seeds"]["paths"] == 300
    assert report["config"] == "fig5"
    assert main(["run", "fig5", "--paths", "0", "--out", str(tmp_path)]) == EXIT_CONFIG
    err = json.loads(capsys.readouterr().out)
    assert err["status"] == "config-error" and err["errors"][0]["loc"].endswith("paths")
    assert main(["run", "fig1", "--seed", "1", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_cli_reports_check_failure(tmp_path, capsys):
    cfg = load_preset("fig5")
    # too few paths for the burn-in to be detected: an honest check failure
    text = json.loads(dump_config(cfg))
    text["experiment"]["mc"]["paths"] = 2
    f = tmp_path / "tiny.json"
    f.write_text(json.dumps(text))
    code = main(["run", str(f), "--out", str(tmp_path / "o")])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_CHECK and report["status"] == "check-failure" and report["failed"]


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "infotrade", "validate", "fig3"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["kind"] == "averaged-paths"
