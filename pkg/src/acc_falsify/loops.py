"""The four falsification regimes.

* ``baseline``  - agent actions are simulated as they are;
* ``limited``   - agent actions are first projected onto safe starts;
* ``model``     - multi-start search on the model, checked once on the SUT;
* ``combined``  - model search plus an agent that learns the model/SUT gap.

Every episode runs the friction-augmented SUT; the model never sees friction.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import guard
from .config import ExperimentConfig
from .ddpg import DdpgAgent
from .model import ModelPrediction, SearchReport, global_search, local_search, predict, simulate_action
from .scenario import STATE_DIM, AgentState, clip_action, f_act
from .sim import ScenarioParams

log = logging.getLogger(__name__)

# rough physical scale of each AgentState component, for network inputs
STATE_SCALE = np.array([3.5, 2.0, 5.0, 40.0, 40.0])
STATE_CLIP = 5.0


@dataclass
class EpisodeRecord:
    episode: int
    action_raw: np.ndarray
    action: np.ndarray
    params: ScenarioParams
    rho: float
    reward: float
    projected: bool
    safety_margin: float
    collision_time: float | None
    rho_hat: float | None = None
    r_hat: float | None = None
    r_nn: float | None = None
    wall_time: float = 0.0


@dataclass
class RunHistory:
    config: dict
    records: list[EpisodeRecord] = field(default_factory=list)
    report: SearchReport | None = None
    agent: DdpgAgent | None = None

    @property
    def best_index(self) -> int:
        rewards = [r.reward for r in self.records]
        return int(np.argmax(rewards))

    @property
    def best(self) -> EpisodeRecord:
        return self.records[self.best_index]

    def rewards(self) -> np.ndarray:
        return np.array([r.reward for r in self.records])

    def running_max(self) -> np.ndarray:
        return np.maximum.accumulate(self.rewards())


def encode_state(s) -> np.ndarray:
    """Scale a (delta-)state vector for the networks."""
    x = np.asarray(s, dtype=float) / STATE_SCALE
    return np.clip(x, -STATE_CLIP, STATE_CLIP)


def delta_state(s: AgentState, s_hat: AgentState) -> np.ndarray:
    return s.as_array() - s_hat.as_array()


def delta_reward(r: float, r_hat: float) -> float:
    return r + max(0.0, r - r_hat)


def combine_action(a_hat_prev, a_hat, a_nn, rule: str = "verbatim") -> np.ndarray:
    """Merge model and agent actions, clipped to the box (projection is separate).

    ``verbatim``: ``3 a_hat_prev - a_nn - a_hat``;
    ``correction``: ``a_hat + a_nn``.
    """
    a_hat_prev, a_hat, a_nn = (np.asarray(x, dtype=float) for x in (a_hat_prev, a_hat, a_nn))
    if a_hat_prev.shape != a_hat.shape or a_hat.shape != a_nn.shape:
        raise ValueError("actions differ in dimension")
    if rule == "verbatim":
        a = a_hat_prev + (a_hat_prev - a_nn) + (a_hat_prev - a_hat)
    elif rule == "correction":
        a = a_hat + a_nn
    else:
        raise ValueError(f"unknown combine rule {rule!r}")
    return clip_action(a)


def _agent_reward(r: float, cfg: ExperimentConfig) -> float:
    return math.log(r) if cfg.agent_reward == "log" else r


def _make_agent(cfg: ExperimentConfig) -> DdpgAgent:
    ddpg = dataclasses.replace(cfg.ddpg, seed=cfg.seed)
    return DdpgAgent(STATE_DIM, cfg.setup.dim, ddpg)


def _record(k, a_raw, a, projected, sut: ModelPrediction, cfg, t0, **extra) -> EpisodeRecord:
    setup = cfg.setup
    p = f_act(a, setup.ranges, setup.sim)
    return EpisodeRecord(
        episode=k, action_raw=np.array(a_raw, dtype=float), action=np.array(a, dtype=float), params=p,
        rho=sut.rho_hat, reward=sut.r_hat, projected=projected,
        safety_margin=guard.safety_margin(p, setup.idm, setup.sim),
        collision_time=sut.trace_hat.collision_time(), wall_time=time.perf_counter() - t0, **extra)


def _train(agent: DdpgAgent) -> None:
    if len(agent.buffer) >= agent.cfg.batch_size:
        agent.train_step()


def _agent_loop(cfg: ExperimentConfig, guarded: bool) -> RunHistory:
    setup = cfg.setup
    agent = _make_agent(cfg)
    hist = RunHistory(cfg.to_dict())
    s = np.zeros(STATE_DIM)
    for k in range(cfg.episodes):
        t0 = time.perf_counter()
        a_raw = agent.act(encode_state(s), explore=True)
        if guarded:
            pr = guard.project_info(a_raw, setup.idm, setup.sim, setup.ranges)
            a, projected = pr.action, pr.projected
        else:
            a, projected = a_raw, False
        sut = simulate_action(a, setup, use_friction=True)
        s2 = sut.s_hat.as_array()
        agent.remember(encode_state(s), a, _agent_reward(sut.r_hat, cfg), encode_state(s2))
        _train(agent)
        hist.records.append(_record(k, a_raw, a, projected, sut, cfg, t0))
        s = s2
    hist.agent = agent
    return hist


def run_baseline(cfg: ExperimentConfig) -> RunHistory:
    return _agent_loop(cfg, guarded=False)


def run_limited(cfg: ExperimentConfig) -> RunHistory:
    return _agent_loop(cfg, guarded=cfg.guards)


def run_model_only(cfg: ExperimentConfig) -> RunHistory:
    setup = cfg.setup
    t0 = time.perf_counter()
    rep = global_search(cfg.model_starts, cfg.seed, setup, max_iters=cfg.model_max_iters)
    sut = simulate_action(rep.a_hat, setup, use_friction=True)
    hist = RunHistory(cfg.to_dict(), report=rep)
    hist.records.append(_record(0, rep.a_hat, rep.a_hat, False, sut, cfg, t0,
                                rho_hat=rep.rho_hat, r_hat=rep.r_hat))
    return hist


def run_combined(cfg: ExperimentConfig) -> RunHistory:
    setup = cfg.setup
    agent = _make_agent(cfg)
    hist = RunHistory(cfg.to_dict())
    boot = global_search(cfg.bootstrap_starts, cfg.seed, setup, max_iters=cfg.model_max_iters)
    a_hat_prev = boot.a_hat
    a_prev = setup.project(np.zeros(setup.dim))
    s_nn = np.zeros(STATE_DIM)
    for k in range(cfg.episodes):
        t0 = time.perf_counter()
        a_hat = local_search(a_prev, cfg.model_iters, setup, guarded=cfg.guards).a_hat
        a_nn = agent.act(encode_state(s_nn), explore=True)
        a_tilde = combine_action(a_hat_prev, a_hat, a_nn, cfg.combine_rule)
        if cfg.guards:
            pr = guard.project_info(a_tilde, setup.idm, setup.sim, setup.ranges)
            a, projected = pr.action, pr.projected
        else:
            a, projected = a_tilde, False
        sut = simulate_action(a, setup, use_friction=True)
        mod = predict(a, setup)
        s_nn2 = delta_state(sut.s_hat, mod.s_hat)
        r_nn = delta_reward(sut.r_hat, mod.r_hat)
        agent.remember(encode_state(s_nn), a_nn, _agent_reward(r_nn, cfg), encode_state(s_nn2))
        _train(agent)
        hist.records.append(_record(k, a_nn, a, projected, sut, cfg, t0,
                                    rho_hat=mod.rho_hat, r_hat=mod.r_hat, r_nn=r_nn))
        a_hat_prev, a_prev, s_nn = a_hat, a, s_nn2
    hist.agent = agent
    return hist


RUNNERS = {"baseline": run_baseline, "limited": run_limited, "combined": run_combined, "model": run_model_only}


def run(cfg: ExperimentConfig) -> RunHistory:
    return RUNNERS[cfg.mode](cfg)


# --- persistence -------------------------------------------------------------

def _f(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def episode_columns(n_seg: int, dim: int) -> list[str]:
    cols = ["episode", "rho", "reward", "rho_hat", "r_hat", "r_nn", "projected", "safety_margin",
            "collided", "collision_time", "v_h0", "v_f0", "d0"]
    cols += [f"a_f{i + 1}" for i in range(n_seg)] + [f"t_{i + 1}" for i in range(n_seg)]
    cols += [f"action_{i}" for i in range(dim)] + [f"raw_{i}" for i in range(dim)]
    return cols


def write_episodes_csv(hist: RunHistory, path) -> None:
    """One row per episode. Wall-clock times are left out to keep the file reproducible."""
    recs = hist.records
    n_seg = len(recs[0].params.segments)
    dim = len(recs[0].action)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(episode_columns(n_seg, dim))
        for r in recs:
            p = r.params
            w.writerow([r.episode, _f(r.rho), _f(r.reward), _f(r.rho_hat), _f(r.r_hat), _f(r.r_nn),
                        int(r.projected), _f(r.safety_margin), int(r.collision_time is not None),
                        _f(r.collision_time), _f(p.v_h0), _f(p.v_f0), _f(p.d0)]
                       + [_f(sg.a) for sg in p.segments] + [_f(sg.t) for sg in p.segments]
                       + [_f(x) for x in r.action] + [_f(x) for x in r.action_raw])


def read_episode_rewards(path) -> tuple[np.ndarray, np.ndarray]:
    """``(episode, reward)`` columns of an ``episodes.csv``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no episodes")
    if "reward" not in rows[0] or "episode" not in rows[0]:
        raise ValueError(f"{path}: not an episodes.csv file")
    return (np.array([int(r["episode"]) for r in rows]), np.array([float(r["reward"]) for r in rows]))


def run_summary(hist: RunHistory) -> dict:
    b = hist.best
    out = {
        "config": hist.config,
        "episodes": len(hist.records),
        "best_episode": hist.best_index,
        "best": {
            "reward": b.reward,
            "rho": b.rho,
            "r_hat": b.r_hat,
            "rho_hat": b.rho_hat,
            "safety_margin": b.safety_margin,
            "collision_time": b.collision_time,
            "action": [float(x) for x in b.action],
            "scenario": b.params.to_dict(),
        },
    }
    if hist.report is not None:
        out["search_report"] = hist.report.to_dict()
    return out


def write_history(hist: RunHistory, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_episodes_csv(hist, os.path.join(out_dir, "episodes.csv"))
    with open(os.path.join(out_dir, "run.json"), "w") as fh:
        json.dump(run_summary(hist), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if hist.agent is not None:
        hist.agent.save(os.path.join(out_dir, "agent.json"))
    if hist.report is not None:
        with open(os.path.join(out_dir, "search_report.json"), "w") as fh:
            json.dump(hist.report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
