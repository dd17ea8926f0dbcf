import json

import numpy as np
import pytest

from gridrobust.cli import main
from gridrobust.io import load_config, load_panel, read_results, write_config, write_panel, config_for_panel
from gridrobust.synth import map_to_panel, planted_effect_panel, MEASUREMENT_ERROR_DEMO

from conftest import random_panel


@pytest.fixture
def panel_files(tmp_path):
    panel = random_panel(np.random.default_rng(1), 4, 4, 1, missing=0.0)
    write_panel(panel, tmp_path / "p.csv")
    write_config(config_for_panel(panel), tmp_path / "p.json")
    return panel, tmp_path / "p.csv", tmp_path / "p.json"


def test_aggregate_identity(panel_files, tmp_path):
    panel, p, c = panel_files
    assert main(["aggregate", "--panel", str(p), "--config", str(c), "--multiplier", "1", "--shift", "0",
                 "--out", str(tmp_path / "out.csv")]) == 0
    assert load_panel(tmp_path / "out.csv", c).cells == panel.cells


def test_aggregate_keeps_edge_blocks(panel_files, tmp_path):
    _, p, c = panel_files
    assert main(["aggregate", "--panel", str(p), "--config", str(c), "-k", "2", "-s", "1",
                 "--out", str(tmp_path / "out.csv")]) == 0
    out = load_panel(tmp_path / "out.csv", c)
    assert out.n_records == 9


def test_aggregate_keeps_year_column(tmp_path):
    (tmp_path / "p.csv").write_text("row,col,year,onset,drought\n0,0,1990,0,1\n0,1,1990,1,0\n")
    (tmp_path / "c.json").write_text(json.dumps({
        "base_side_km": 55, "variables": {"onset": "outcome_binary", "drought": "treatment_binary"},
        "outcome": "onset", "treatment": "drought"}))
    assert main(["aggregate", "--panel", str(tmp_path / "p.csv"), "--config", str(tmp_path / "c.json"),
                 "-k", "2", "--out", str(tmp_path / "o.csv")]) == 0
    assert (tmp_path / "o.csv").read_text() == "row,col,year,onset,drought\n0,0,1990,1,1\n"


def test_aggregate_shift_out_of_range(panel_files, tmp_path, capsys):
    _, p, c = panel_files
    code = main(["aggregate", "--panel", str(p), "--config", str(c), "-k", "2", "-s", "2", "--out", str(tmp_path / "o")])
    assert code == 2
    assert "usage error" in capsys.readouterr().err


def test_missing_input_is_error(tmp_path, capsys):
    code = main(["aggregate", "--panel", str(tmp_path / "nope.csv"), "--config", str(tmp_path / "nope.json"),
                 "-k", "1", "--out", str(tmp_path / "o")])
    assert code == 1


def test_bad_flags_are_usage_errors():
    assert main(["sweep", "--tail", "three", "--out", "x"]) == 2
    assert main([]) == 2


def test_synth_measurement_error(tmp_path):
    out = tmp_path / "me.csv"
    assert main(["synth", "--scenario", "measurement-error", "--out", str(out)]) == 0
    panel = load_panel(out, tmp_path / "me.json")
    assert panel == map_to_panel(MEASUREMENT_ERROR_DEMO)
    assert panel.n_records == 4


@pytest.mark.parametrize("name", ["concordance", "dividing-line", "planted-effect"])
def test_synth_scenarios_reingest(tmp_path, name):
    out = tmp_path / f"{name}.csv"
    assert main(["synth", "--scenario", name, "--out", str(out)]) == 0
    load_panel(out, tmp_path / f"{name}.json")


def test_synth_unknown_lists_scenarios(tmp_path, capsys):
    assert main(["synth", "--scenario", "figure-9", "--out", str(tmp_path / "x.csv")]) != 0
    assert "measurement-error" in capsys.readouterr().err


def _sweep_files(tmp_path, seed=2):
    panel = planted_effect_panel(24, 24, 2, seed=seed)
    write_panel(panel, tmp_path / "panel.csv")
    write_config(config_for_panel(panel), tmp_path / "panel.json")
    return str(tmp_path / "panel.csv"), str(tmp_path / "panel.json")


OUTPUTS = ["results.csv", "summary.csv", "estimates_pvalue.svg", "estimates_significance.svg", "manifest.json"]


def _snapshot(d):
    return {name: (d / name).read_bytes() for name in OUTPUTS}


def test_sweep_writes_all_artifacts(tmp_path):
    p, c = _sweep_files(tmp_path)
    out = tmp_path / "run"
    assert main(["sweep", "--panel", p, "--config", c, "--max-multiplier", "2", "--keep-rate", "0.2",
                 "--subsamples", "3", "--jobs", "1", "--out", str(out)]) == 0
    assert all((out / name).exists() for name in OUTPUTS)
    assert len(read_results(out / "results.csv")) == 3 * 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["max_multiplier"] == 2 and manifest["keep_rate"] == 0.2
    assert manifest["n_subsamples"] == 3 and manifest["tail"] == "two"
    assert "jobs" not in manifest


def test_sweep_single_fit_run(tmp_path):
    p, c = _sweep_files(tmp_path)
    out = tmp_path / "run"
    assert main(["sweep", "--panel", p, "--config", c, "--max-multiplier", "1", "--keep-rate", "1.0",
                 "--subsamples", "1", "--out", str(out)]) == 0
    assert len(read_results(out / "results.csv")) == 1


def test_sweep_rerun_from_manifest(tmp_path):
    p, c = _sweep_files(tmp_path)
    first, second = tmp_path / "a", tmp_path / "b"
    args = ["--max-multiplier", "2", "--keep-rate", "0.2", "--subsamples", "2", "--seed", "9"]
    assert main(["sweep", "--panel", p, "--config", c, *args, "--out", str(first)]) == 0
    assert main(["sweep", "--manifest", str(first / "manifest.json"), "--out", str(second)]) == 0
    assert _snapshot(first) == _snapshot(second)


def test_sweep_bad_keep_rate_is_usage_error(tmp_path):
    p, c = _sweep_files(tmp_path)
    assert main(["sweep", "--panel", p, "--config", c, "--keep-rate", "0", "--out", str(tmp_path / "o")]) == 2


def test_outputs_create_parent_directories(tmp_path):
    out = tmp_path / "new" / "dir" / "p.csv"
    assert main(["synth", "--scenario", "concordance", "--out", str(out)]) == 0
    agg = tmp_path / "other" / "k2.csv"
    assert main(["aggregate", "--panel", str(out), "--config", str(out.with_suffix(".json")),
                 "-k", "2", "--out", str(agg)]) == 0
    assert load_panel(agg, out.with_suffix(".json")).n_records == 4
