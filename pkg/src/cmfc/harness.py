"""Experiment orchestration: configuration, training, evaluation sweeps,
bound reports, and deterministic artifact files.

A run is fully determined by (config, master seed): every random stream is
derived from the master seed plus a purpose tag and integer coordinates,
and artifact files are byte-identical across repeated runs.  Wall-clock
timing is therefore recorded only when explicitly requested; the timing
columns hold 0.0 otherwise.
"""
from __future__ import annotations

import configparser
import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import BoundInputs, compute_bounds, tightened_zeta
from .envmodel import EnvironmentSpec, FirmsEnvConfig, firms_env
from .meanfield import mf_values
from .nagent import estimate_values, sample_initial_joint_state
from .npgpd import SolverConfig, SolverTrace, solve
from .policy import SoftmaxPolicy
from .rng import derive_rng
from .simplex import StateDistribution

RESULT_COLUMNS = ["seed", "n", "v_n_r", "v_n_c", "v_inf_r", "v_inf_c",
                  "error_pct", "zeta", "runtime_s", "abs_error_flag"]
TRACE_COLUMNS = ["iter", "lambda", "w_l1", "v_c_hat", "wall_clock_s"]

_ENV_KEYS = {"kind", "q", "alpha_r", "beta_r", "lambda_r", "lambda_c"}
_SOLVER_KEYS = {"eta1", "eta2", "alpha", "j_iters", "l_iters", "gamma", "zeta",
                "tighten_with_bounds", "zeta0", "l_q_bound", "norm_bound",
                "inner_batch", "dual_batch", "lambda0", "checkpoint_stride"}
_EVAL_KEYS = {"n_grid", "episodes", "tol", "seed_list", "workers"}
_OUTPUT_KEYS = {"dir"}


@dataclass
class ExperimentConfig:
    env: FirmsEnvConfig = field(default_factory=FirmsEnvConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    tighten_with_bounds: bool = False
    zeta0: float = -1.0
    l_q_bound: float = 0.0
    checkpoint_stride: int = 0
    n_grid: tuple[int, ...] = (50, 100, 200, 500, 1000)
    episodes: int = 32
    tol: float = 1e-6
    seed_list: tuple[int, ...] = tuple(range(25))
    workers: int = 1
    out_dir: str = "out"

    def __post_init__(self):
        if not self.n_grid or list(self.n_grid) != sorted(set(self.n_grid)):
            raise ValueError("n_grid must be nonempty and strictly ascending")
        if not self.seed_list:
            raise ValueError("seed_list must be nonempty")

    def fast(self) -> "ExperimentConfig":
        """Trimmed copy: first 5 seeds."""
        cfg = ExperimentConfig(**{**self.__dict__})
        cfg.seed_list = self.seed_list[:5]
        return cfg


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"expected boolean, got {raw!r}")


def load_config(path) -> ExperimentConfig:
    """Parse the sectioned key-value config file; unknown keys are errors."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    allowed = {"env": _ENV_KEYS, "solver": _SOLVER_KEYS, "eval": _EVAL_KEYS,
               "output": _OUTPUT_KEYS}
    for section in parser.sections():
        if section not in allowed:
            raise ValueError(f"unknown config section [{section}]")
        unknown = set(parser[section]) - allowed[section]
        if unknown:
            raise ValueError(f"unknown keys in [{section}]: {sorted(unknown)}")

    cfg = ExperimentConfig()
    if parser.has_section("env"):
        sec = parser["env"]
        kind = sec.get("kind", "firms")
        if kind != "firms":
            raise ValueError(f"unknown env kind {kind!r}")
        cfg.env = FirmsEnvConfig(
            q=sec.getint("q", cfg.env.q),
            alpha_r=sec.getfloat("alpha_r", cfg.env.alpha_r),
            beta_r=sec.getfloat("beta_r", cfg.env.beta_r),
            lambda_r=sec.getfloat("lambda_r", cfg.env.lambda_r),
            lambda_c=sec.getfloat("lambda_c", cfg.env.lambda_c),
        )
    if parser.has_section("solver"):
        sec = parser["solver"]
        base = SolverConfig()
        cfg.solver = SolverConfig(
            eta1=sec.getfloat("eta1", base.eta1),
            eta2=sec.getfloat("eta2", base.eta2),
            alpha=sec.getfloat("alpha", base.alpha),
            j_iters=sec.getint("j_iters", base.j_iters),
            l_iters=sec.getint("l_iters", base.l_iters),
            gamma=sec.getfloat("gamma", base.gamma),
            zeta=sec.getfloat("zeta", base.zeta),
            lambda0=sec.getfloat("lambda0", base.lambda0),
            norm_bound=sec.getfloat("norm_bound", base.norm_bound),
            inner_batch=sec.getint("inner_batch", base.inner_batch),
            dual_batch=sec.getint("dual_batch", base.dual_batch),
        )
        cfg.tighten_with_bounds = _parse_bool(sec.get("tighten_with_bounds", "false"))
        cfg.zeta0 = sec.getfloat("zeta0", cfg.zeta0)
        cfg.l_q_bound = sec.getfloat("l_q_bound", cfg.l_q_bound)
        cfg.checkpoint_stride = sec.getint("checkpoint_stride", cfg.checkpoint_stride)
    if parser.has_section("eval"):
        sec = parser["eval"]
        if "n_grid" in sec:
            cfg.n_grid = tuple(int(v) for v in sec["n_grid"].split(","))
        cfg.episodes = sec.getint("episodes", cfg.episodes)
        cfg.tol = sec.getfloat("tol", cfg.tol)
        if "seed_list" in sec:
            cfg.seed_list = tuple(int(v) for v in sec["seed_list"].split(","))
        cfg.workers = sec.getint("workers", cfg.workers)
    if parser.has_section("output"):
        cfg.out_dir = parser["output"].get("dir", cfg.out_dir)
    return ExperimentConfig(**cfg.__dict__)


def build_env(cfg: ExperimentConfig) -> EnvironmentSpec:
    return firms_env(cfg.env)


def initial_distribution(env: EnvironmentSpec) -> StateDistribution:
    return StateDistribution(np.full(env.n_states, 1.0 / env.n_states))


def effective_zeta(cfg: ExperimentConfig, env: EnvironmentSpec) -> float:
    """Raw constraint level, or the solver-route tightening when enabled."""
    if not cfg.tighten_with_bounds:
        return cfg.solver.zeta
    inputs = BoundInputs.from_env(env, cfg.solver.gamma, max(cfg.n_grid),
                                  cfg.zeta0, l_q=cfg.l_q_bound)
    return tightened_zeta(inputs, "theorem3_solver", zeta_raw=cfg.solver.zeta)


def select_checkpoint(trace: SolverTrace, env: EnvironmentSpec,
                      mu0: StateDistribution, gamma: float, zeta: float,
                      tol: float) -> tuple[int, float, float]:
    """Pick the best traced policy by exact mean-field values: highest
    reward value among constraint-feasible iterates, else lowest cost.

    Returns (index, v_inf_r, v_inf_c) of the selected iterate.
    """
    values = []
    for policy in trace.policies:
        v_r, v_c, _ = mf_values(mu0, policy, env, gamma, tol)
        values.append((v_r, v_c))
    feasible = [i for i, (_, v_c) in enumerate(values) if v_c <= zeta]
    if feasible:
        best = max(feasible, key=lambda i: values[i][0])
    else:
        best = min(range(len(values)), key=lambda i: values[i][1])
    return best, values[best][0], values[best][1]


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def run_train(cfg: ExperimentConfig, master_seed: int, out_dir: Path,
              record_timing: bool = False) -> Path:
    """Train on the mean-field system from the uniform initial distribution;
    write trace.csv, the selected checkpoint, and train_summary.json."""
    out_dir.mkdir(parents=True, exist_ok=True)
    env = build_env(cfg)
    mu0 = initial_distribution(env)
    zeta = effective_zeta(cfg, env)
    solver_cfg = SolverConfig(**{**cfg.solver.__dict__, "zeta": zeta})
    rng = derive_rng(master_seed, "train")
    trace = solve(solver_cfg, env, mu0, rng, record_timing=record_timing)

    _write_csv(out_dir / "trace.csv", TRACE_COLUMNS,
               [[r.j, r.lam, r.w_l1, r.v_c_hat, r.wall_clock_s] for r in trace.records])
    if cfg.checkpoint_stride > 0:
        for j, policy in enumerate(trace.policies):
            if (j + 1) % cfg.checkpoint_stride == 0:
                policy.save(out_dir / f"checkpoint_{j + 1:04d}.npy")
    best, v_inf_r, v_inf_c = select_checkpoint(trace, env, mu0, cfg.solver.gamma,
                                               zeta, cfg.tol)
    checkpoint = out_dir / "checkpoint.npy"
    trace.policies[best].save(checkpoint)
    summary = {"selected_iteration": best + 1, "iterations": len(trace),
               "v_inf_r": v_inf_r, "v_inf_c": v_inf_c, "zeta": zeta,
               "master_seed": master_seed}
    (out_dir / "train_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return checkpoint


def _eval_cell(payload) -> list:
    """One (seed, N) evaluation; top-level so worker processes can run it."""
    (env_cfg_kwargs, phi_flat, norm_bound, gamma, episodes, tol, zeta,
     v_inf_r, v_inf_c, master_seed, seed, n_agents, record_timing) = payload
    env = firms_env(FirmsEnvConfig(**env_cfg_kwargs))
    policy = SoftmaxPolicy.from_flat(np.asarray(phi_flat), env.n_states,
                                     env.n_actions, norm_bound)
    mu0 = initial_distribution(env)
    rng = derive_rng(master_seed, "eval", seed, n_agents)
    start = time.perf_counter()
    x0 = sample_initial_joint_state(mu0, n_agents, rng)
    est = estimate_values(x0, policy, env, gamma, episodes, tol, rng)
    runtime = time.perf_counter() - start if record_timing else 0.0
    if abs(v_inf_r) > 1e-9:
        error_pct = abs((est.v_r - v_inf_r) / v_inf_r) * 100.0
        flag = 0
    else:
        error_pct = abs(est.v_r - v_inf_r)
        flag = 1
    return [seed, n_agents, est.v_r, est.v_c, v_inf_r, v_inf_c, error_pct,
            zeta, runtime, flag]


def run_eval(cfg: ExperimentConfig, checkpoint: Path, master_seed: int,
             out_dir: Path, record_timing: bool = False) -> Path:
    """Sweep (seed, N) cells for a trained policy; write results.csv.

    Cells use independent derived streams, so values do not depend on the
    sweep order or the worker count; rows follow the configured seed order
    with N ascending within each seed.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    env = build_env(cfg)
    policy = SoftmaxPolicy.load(checkpoint, env.n_states, env.n_actions,
                                cfg.solver.norm_bound)
    mu0 = initial_distribution(env)
    zeta = effective_zeta(cfg, env)
    v_inf_r, v_inf_c, _ = mf_values(mu0, policy, env, cfg.solver.gamma, cfg.tol)

    payloads = [
        (cfg.env.__dict__, policy.flat.tolist(), cfg.solver.norm_bound,
         cfg.solver.gamma, cfg.episodes, cfg.tol, zeta, v_inf_r, v_inf_c,
         master_seed, seed, n_agents, record_timing)
        for seed in cfg.seed_list for n_agents in cfg.n_grid
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_eval_cell, payloads))
    else:
        rows = [_eval_cell(p) for p in payloads]
    path = out_dir / "results.csv"
    _write_csv(path, RESULT_COLUMNS, rows)
    return path


def run_bounds(cfg: ExperimentConfig, out_dir: Path) -> Path:
    """Write bounds.json: declared constants plus gap values per grid N."""
    out_dir.mkdir(parents=True, exist_ok=True)
    env = build_env(cfg)
    per_n = {}
    for n_agents in cfg.n_grid:
        inputs = BoundInputs.from_env(env, cfg.solver.gamma, n_agents,
                                      cfg.zeta0, l_q=cfg.l_q_bound)
        per_n[str(n_agents)] = compute_bounds(inputs).as_dict()
    doc = {
        "inputs": {"m_r": env.constants.m_r, "m_c": env.constants.m_c,
                   "l_r": env.constants.l_r, "l_c": env.constants.l_c,
                   "l_p": env.constants.l_p, "l_q": cfg.l_q_bound,
                   "gamma": cfg.solver.gamma, "zeta0": cfg.zeta0,
                   "n_states": env.n_states, "n_actions": env.n_actions},
        "per_n": per_n,
    }
    path = out_dir / "bounds.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def run_all(cfg: ExperimentConfig, master_seed: int, out_dir: Path,
            record_timing: bool = False) -> None:
    checkpoint = run_train(cfg, master_seed, out_dir, record_timing)
    run_eval(cfg, checkpoint, master_seed, out_dir, record_timing)
    run_bounds(cfg, out_dir)
