import json

import numpy as np
import pytest

from jumpiter.errors import ConfigError
from jumpiter.harness.cli import main
from jumpiter.harness.config import (PRESETS, ExperimentConfig, build_config, describe_presets,
                                     parse_config_text, preset_config)
from jumpiter.harness.runner import replicate_rows, run_experiment, simulate_path
from jumpiter.iterated_error import iterated_error_process
from jumpiter.levy_path import SigmaModel
from jumpiter.randomness import DistSpec

REPORTS = ("summary.json", "rates.csv", "raw_X_error.csv", "raw_limit.csv")


def test_six_presets_listed(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert [line.split()[0] for line in out] == list(PRESETS)
    assert len(out) == 6 and describe_presets().splitlines() == out


@pytest.mark.parametrize("name", list(PRESETS))
def test_presets_round_trip(name):
    cfg = preset_config(name)
    assert ExperimentConfig(**parse_config_text(cfg.to_text())) == cfg
    assert build_config(name) == cfg


def test_presets_carry_acceptance_parameters():
    c = preset_config("continuous")
    assert (c.b, c.c, c.jump_intensity, c.n_list, c.inner_refinement, c.replicates) == (0, 1, 0, (64,), 64, 20000)
    m = preset_config("mixed")
    assert (m.c, m.jump_intensity, m.jump_size) == (1, 1, DistSpec("two_point", (-1.0, 0.5, 1.0)))
    assert set((8, 16, 32, 64, 128, 256)) <= set(m.n_list) and m.replicates == 10**4
    p = preset_config("pure-jump")
    assert (p.b, p.c, p.jump_intensity, p.n_list, p.replicates) == (0, 0, 2, (16, 64, 256), 10**4)
    s = preset_config("milstein")
    assert (s.b, s.c, s.jump_intensity, s.n_list, s.replicates) == (0, 1, 1, (8, 16, 32, 64), 10**4)
    d = preset_config("divergent")
    assert (d.c, d.jump_intensity, d.n_list, d.replicates) == (1, 1, (16, 64, 256), 10**4)
    k = preset_config("decomposition")
    assert (k.jump_size, k.n_list, k.replicates, k.epsilon_list) == (DistSpec("normal", (0.0, 0.5)), (64,),
                                                                     5000, (1.0, 0.5, 0.25))
    for cfg in (c, m, p, s, d, k):
        assert cfg.sigma == SigmaModel()


def test_config_file_layers():
    text = "preset = mixed\nreplicates = 17  # small\nlambda = 2.5\nsigma = ito(1, 0.5, 0.1)\nlimit_form = corrected\n"
    cfg = build_config(config_text=text, overrides={"master_seed": 5})
    assert (cfg.preset, cfg.replicates, cfg.jump_intensity, cfg.master_seed) == ("mixed", 17, 2.5, 5)
    assert cfg.sigma == SigmaModel("ito", 1.0, 0.5, 0.1) and cfg.limit_forms == ("corrected",)


@pytest.mark.parametrize("text, field", [
    ("n_list = 64, 16", "n_list"),
    ("inner_refinement = 1", "inner_refinement"),
    ("replicates = 0", "replicates"),
    ("c = -1", "c"),
    ("jump_size = normal(0, -2)", "jump_size"),
    ("functional = everything", "functional"),
    ("sigma = wiggly(1)", "sigma"),
    ("workers = many", "workers"),
    ("colour = red", "colour"),
    ("limit_form = best", "limit_forms"),
    ("just words", "config"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as info:
        build_config(config_text=text)
    assert info.value.field == field
    assert str(info.value).startswith(field)


def test_decomposition_requires_unit_sigma():
    with pytest.raises(ConfigError) as info:
        preset_config("decomposition", sigma=SigmaModel("constant", 2.0))
    assert info.value.field == "sigma"


def _run_cli(tmp_path, name, *extra):
    out = tmp_path / name
    assert main(["run", "--preset", "continuous", "--replicates", "3", "--seed", "77",
                 "--set", "n_list=8,16", "--set", "m=4", "--out-dir", str(out), *extra]) == 0
    return out


def test_cli_runs_are_byte_identical(tmp_path, capsys):
    a, b = _run_cli(tmp_path, "a"), _run_cli(tmp_path, "b")
    c = _run_cli(tmp_path, "c", "--workers", "2")
    for name in REPORTS:
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()
    assert json.loads((a / "run_info.json").read_text())["workers"] == 1


def test_worker_count_invariance_with_jumps(tmp_path):
    cfg = preset_config("mixed", replicates=12, n_list=(8, 32), inner_refinement=4)
    one = run_experiment(cfg.replace(workers=1), out_dir=str(tmp_path / "w1"))
    three = run_experiment(cfg.replace(workers=3), out_dir=str(tmp_path / "w3"))
    assert one.raw == three.raw and one.limit == three.limit
    for name in REPORTS:
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w3" / name).read_bytes()


def test_seed_changes_results():
    cfg = preset_config("mixed", replicates=3, n_list=(8,), inner_refinement=4)
    assert run_experiment(cfg, write=False).raw != run_experiment(cfg.replace(master_seed=1), write=False).raw


def test_shared_path_matches_fresh_computation():
    cfg = preset_config("mixed", replicates=1, n_list=(16, 64), inner_refinement=4)
    rows = replicate_rows(cfg, 3)["raw"]
    path = simulate_path(cfg, 3)
    assert rows[0][2] == iterated_error_process(path, 16).endpoint
    assert rows[1][2] == iterated_error_process(path, 64).endpoint


def test_report_layout(tmp_path):
    cfg = preset_config("mixed", replicates=20, n_list=(8, 16, 32), inner_refinement=4)
    res = run_experiment(cfg, out_dir=str(tmp_path))
    raw = (tmp_path / "raw_X_error.csv").read_text().splitlines()
    assert raw[0] == "replicate_id,n,value" and len(raw) == 1 + 60
    lim = (tmp_path / "raw_limit.csv").read_text().splitlines()
    assert lim[0] == "replicate_id,t,value,form" and len(lim) == 1 + 60
    rates = (tmp_path / "rates.csv").read_text().splitlines()
    assert rates[0] == "functional,slope,ci,intercept" and rates[1].startswith("E|X^n_1|,")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary["limit_ks"]) >= {"theorem_stated", "lemma_derived", "corrected", "winning_form"}
    assert summary["per_n"]["16"]["scaled"]["count"] == 20
    assert summary == json.loads(json.dumps(res.summary))


@pytest.mark.parametrize("functional, extra", [
    ("milstein", {}), ("divergent", {}), ("jump_terms", {"jump_intensity": 5.0}),
    ("decomposition", {"jump_size": DistSpec("normal", (0.0, 0.5))}), ("limit_only", {}),
])
def test_every_functional_runs(tmp_path, functional, extra):
    cfg = preset_config("mixed", functional=functional, replicates=6, n_list=(8, 16, 32),
                        inner_refinement=4, **extra)
    res = run_experiment(cfg, out_dir=str(tmp_path))
    assert (tmp_path / "summary.json").exists()
    if functional != "limit_only":
        assert (tmp_path / f"raw_{functional}.csv").exists()
    if functional == "divergent":
        assert len(res.summary["variance_ratios"]) == 2
    if functional == "decomposition":
        assert all(v["max_identity_residual"] < 1e-12 for v in res.summary["decomposition"].values())


def test_dump_path(tmp_path):
    out = tmp_path / "d"
    assert main(["run", "--preset", "milstein", "--replicates", "2", "--set", "n_list=8,16",
                 "--set", "m=4", "--out-dir", str(out), "--dump-path", "1"]) == 0
    assert (out / "path_1.csv").read_text().startswith("time,zc,z,sigma,y,is_jump,jump_size\n")
    assert (out / "curves_1.csv").read_text().startswith("t,value,functional,n,epsilon\n")
    assert (out / "milstein_1_n16.csv").read_text().startswith("t,x_exact,x_scheme,u_n,n\n")
    assert (out / "raw_milstein.csv").read_text().startswith("replicate_id,n,value,x_scheme,x_exact\n")


def test_cli_reports_config_errors(tmp_path, capsys):
    assert main(["run", "--preset", "nonesuch", "--out-dir", str(tmp_path)]) == 2
    assert "preset" in capsys.readouterr().err
    assert main(["run", "--preset", "mixed", "--set", "n_list=oops"]) == 2
    assert "n_list" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_config_file_on_cli(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("preset = divergent\nreplicates = 4\nn_list = 4, 16\n")
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg_file), "--out-dir", str(out), "--seed", "3"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["master_seed"] == "3" and summary["config"]["preset"] == "divergent"
    assert np.isfinite(summary["per_n"]["16"]["value"]["variance"])
