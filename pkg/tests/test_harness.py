import json
import subprocess
import sys

import numpy as np
import pytest

from cmfc.envmodel import firms_env
from cmfc.harness import (ExperimentConfig, RESULT_COLUMNS, TRACE_COLUMNS,
                          load_config, run_bounds, run_eval, run_train)
from cmfc.policy import SoftmaxPolicy

TINY_CONFIG = """\
[env]
kind = firms
q = 10
alpha_r = 1.0
beta_r = 0.5
lambda_r = 0.5
lambda_c = 1.0

[solver]
eta1 = 1e-3
eta2 = 1e-3
alpha = 1e-3
j_iters = 5
l_iters = 8
gamma = 0.9
zeta = 5.0
dual_batch = 4

[eval]
n_grid = 20,50
episodes = 4
tol = 1e-4
seed_list = 0,1,2

[output]
dir = out
"""


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY_CONFIG)
    return load_config(path)


def read_rows(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def test_load_config_values(tiny_config):
    assert tiny_config.solver.j_iters == 5
    assert tiny_config.n_grid == (20, 50)
    assert tiny_config.seed_list == (0, 1, 2)
    assert tiny_config.env.q == 10
    assert tiny_config.out_dir == "out"


def test_load_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[solver]\nlearning_rate = 0.1\n")
    with pytest.raises(ValueError, match="unknown keys"):
        load_config(path)


def test_load_config_rejects_unknown_section(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[mystery]\nx = 1\n")
    with pytest.raises(ValueError, match="unknown config section"):
        load_config(path)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "nope.ini")


def test_run_train_writes_artifacts(tiny_config, tmp_path):
    out = tmp_path / "out"
    checkpoint = run_train(tiny_config, master_seed=3, out_dir=out)
    assert checkpoint.exists()
    header, rows = read_rows(out / "trace.csv")
    assert header == TRACE_COLUMNS
    assert len(rows) == tiny_config.solver.j_iters
    summary = json.loads((out / "train_summary.json").read_text())
    assert 1 <= summary["selected_iteration"] <= tiny_config.solver.j_iters
    assert summary["v_inf_c"] <= tiny_config.solver.zeta + 1e-9


def test_run_train_zero_rates_keeps_initial_policy(tiny_config, tmp_path):
    cfg = tiny_config
    from cmfc.npgpd import SolverConfig
    cfg.solver = SolverConfig(eta1=0.0, eta2=0.0, alpha=0.0, j_iters=2,
                              l_iters=2, gamma=0.9, zeta=5.0, dual_batch=2)
    checkpoint = run_train(cfg, master_seed=1, out_dir=tmp_path / "o")
    phi = np.load(checkpoint)
    assert np.array_equal(phi, np.zeros(10 * 2 * 11))


def test_train_determinism(tiny_config, tmp_path):
    a = run_train(tiny_config, 11, tmp_path / "a")
    b = run_train(tiny_config, 11, tmp_path / "b")
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a/trace.csv").read_bytes() == (tmp_path / "b/trace.csv").read_bytes()


def test_run_eval_rows_and_schema(tiny_config, tmp_path):
    out = tmp_path / "out"
    checkpoint = run_train(tiny_config, 3, out)
    path = run_eval(tiny_config, checkpoint, 3, out)
    header, rows = read_rows(path)
    assert header == RESULT_COLUMNS
    assert len(rows) == len(tiny_config.seed_list) * len(tiny_config.n_grid)
    v_inf_r = {r[4] for r in rows}
    v_inf_c = {r[5] for r in rows}
    assert len(v_inf_r) == 1 and len(v_inf_c) == 1
    for r in rows:
        assert float(r[6]) >= 0.0          # error_pct
        assert float(r[8]) == 0.0          # runtime column deterministic by default
        assert r[9] == "0"                 # absolute-error flag off


def test_run_eval_seed_reorder_permutes_rows_only(tiny_config, tmp_path):
    out = tmp_path / "out"
    checkpoint = run_train(tiny_config, 3, out)
    run_eval(tiny_config, checkpoint, 3, out)
    _, rows = read_rows(out / "results.csv")
    reordered = ExperimentConfig(**{**tiny_config.__dict__, "seed_list": (2, 0, 1)})
    run_eval(reordered, checkpoint, 3, tmp_path / "out2")
    _, rows2 = read_rows(tmp_path / "out2/results.csv")
    assert sorted(map(tuple, rows)) == sorted(map(tuple, rows2))
    assert [r[0] for r in rows2[:2]] == ["2", "2"]


def test_run_eval_workers_match_serial(tiny_config, tmp_path):
    checkpoint = run_train(tiny_config, 5, tmp_path / "o")
    run_eval(tiny_config, checkpoint, 5, tmp_path / "serial")
    par = ExperimentConfig(**{**tiny_config.__dict__, "workers": 2})
    run_eval(par, checkpoint, 5, tmp_path / "parallel")
    assert (tmp_path / "serial/results.csv").read_bytes() == \
        (tmp_path / "parallel/results.csv").read_bytes()


def test_run_eval_never_invest_costs_vanish(tiny_config, tmp_path):
    # A maximal bias against investing makes the invest probability ~1e-22:
    # no agent ever invests in any finite sample, and the mean-field cost
    # value is numerically zero.
    env = firms_env(tiny_config.env)
    phi = np.zeros((10, 2, 11))
    phi[:, 0, 0] = 50.0
    SoftmaxPolicy(phi).save(tmp_path / "never.npy")
    path = run_eval(tiny_config, tmp_path / "never.npy", 3, tmp_path / "out")
    _, rows = read_rows(path)
    for r in rows:
        assert float(r[3]) == 0.0      # v_n_c exactly zero
        assert float(r[5]) < 1e-12     # v_inf_c numerically zero


def test_run_bounds_contraction_flag(tiny_config, tmp_path):
    # Firms constants at gamma=0.9 violate the contraction condition.
    path = run_bounds(tiny_config, tmp_path / "out")
    doc = json.loads(path.read_text())
    assert set(doc["per_n"]) == {"20", "50"}
    for block in doc["per_n"].values():
        assert block["contraction_ok"] is False
        assert block["g_r"] is None
    assert doc["inputs"]["l_p"] == 9.0


def test_run_bounds_contraction_regime(tiny_config, tmp_path):
    from cmfc.npgpd import SolverConfig
    cfg = ExperimentConfig(**{**tiny_config.__dict__})
    cfg.solver = SolverConfig(**{**cfg.solver.__dict__, "gamma": 0.05})
    doc = json.loads(run_bounds(cfg, tmp_path / "out").read_text())
    for block in doc["per_n"].values():
        assert block["contraction_ok"] is True
        assert block["g_r0"] > 0.0


def test_cli_all_deterministic(tmp_path):
    config = tmp_path / "cfg.ini"
    config.write_text(TINY_CONFIG)
    envs = {"CMFC_PURE_PYTHON": "0"}
    import os
    env_vars = {**os.environ, **envs}
    for sub in ("x", "y"):
        result = subprocess.run(
            [sys.executable, "-m", "cmfc", "all", "--config", str(config),
             "--seed", "7", "--out", str(tmp_path / sub)],
            capture_output=True, text=True, env=env_vars)
        assert result.returncode == 0, result.stderr
    for name in ("results.csv", "trace.csv", "bounds.json", "checkpoint.npy",
                 "train_summary.json"):
        assert (tmp_path / "x" / name).read_bytes() == \
            (tmp_path / "y" / name).read_bytes(), name


def test_cli_invariants_smoke(tmp_path):
    config = tmp_path / "cfg.ini"
    config.write_text(TINY_CONFIG)
    result = subprocess.run(
        [sys.executable, "-m", "cmfc", "invariants", "--config", str(config),
         "--seed", "1"],
        capture_output=True, text=True)
    assert result.returncode == 0, result.stdout + result.stderr
    assert '"violations": 0' in result.stdout


def test_fast_mode_trims_seeds():
    cfg = ExperimentConfig()
    assert len(cfg.seed_list) == 25
    assert len(cfg.fast().seed_list) == 5


def test_checkpoint_stride_writes_intermediate_policies(tiny_config, tmp_path):
    cfg = ExperimentConfig(**{**tiny_config.__dict__, "checkpoint_stride": 2})
    out = tmp_path / "out"
    run_train(cfg, master_seed=3, out_dir=out)
    strided = sorted(p.name for p in out.glob("checkpoint_0*.npy"))
    assert strided == ["checkpoint_0002.npy", "checkpoint_0004.npy"]
