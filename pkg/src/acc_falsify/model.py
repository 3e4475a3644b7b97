"""Model-based counterexample search.

The prior-knowledge model is the same closed loop as the SUT but with plain
double-integrator host dynamics (no friction term). Rewards are maximised
over the normalised action box by projected gradient ascent with
finite-difference gradients, restarted from Latin-hypercube points.
"""
from __future__ import annotations

import functools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import guard, stl
from .idm import IdmParams, make_controller
from .scenario import AgentState, ScenarioRanges, action_dim, clip_action, f_act, f_eval
from .sim import SimConfig, Trace, rollout

H_FD = 1e-4
ARMIJO_C = 1e-4
GRAD_TOL = 1e-6
STEP_TOL = 1e-9
INIT_STEP = 0.5


@dataclass(frozen=True)
class Setup:
    """Everything needed to turn an action into a reward."""

    sim: SimConfig = field(default_factory=SimConfig)
    idm: IdmParams = field(default_factory=IdmParams)
    ranges: ScenarioRanges = field(default_factory=ScenarioRanges)

    @functools.cached_property
    def spec(self) -> stl.Formula:
        return stl.build_acc_spec(self.idm, self.sim)

    @property
    def dim(self) -> int:
        return action_dim(self.ranges)

    def project(self, a) -> np.ndarray:
        return guard.project(a, self.idm, self.sim, self.ranges)

    def margin(self, a) -> float:
        return guard.safety_margin(f_act(a, self.ranges, self.sim), self.idm, self.sim)


@dataclass
class ModelPrediction:
    s_hat: AgentState
    r_hat: float
    rho_hat: float
    trace_hat: Trace


def simulate_action(a, setup: Setup, use_friction: bool) -> ModelPrediction:
    """Decode, roll out, monitor and score one action."""
    p = f_act(a, setup.ranges, setup.sim)
    tr = rollout(p, make_controller(setup.idm), setup.sim, use_friction=use_friction)
    rho = stl.robustness(setup.spec, stl.SignalTrace(tr.signals(), tr.ts))
    return ModelPrediction(f_eval(tr), stl.reward(rho), rho, tr)


def predict(a, setup: Setup) -> ModelPrediction:
    return simulate_action(a, setup, use_friction=False)


def model_reward(a, setup: Setup) -> float:
    return predict(a, setup).r_hat


def grad_reward(a, setup: Setup | None = None, f: Callable | None = None, h: float = H_FD) -> np.ndarray:
    """Finite-difference gradient of ``f`` (default: model reward).

    Central differences in the interior, one-sided within ``h`` of the box.
    """
    if f is None:
        f = functools.partial(model_reward, setup=setup)
    a = clip_action(a)
    g = np.zeros_like(a)
    f0 = None
    for i in range(len(a)):
        e = np.zeros_like(a)
        e[i] = h
        if a[i] + h > 1.0:
            f0 = f(a) if f0 is None else f0
            g[i] = (f0 - f(a - e)) / h
        elif a[i] - h < -1.0:
            f0 = f(a) if f0 is None else f0
            g[i] = (f(a + e) - f0) / h
        else:
            g[i] = (f(a + e) - f(a - e)) / (2.0 * h)
    return g


@dataclass
class SearchReport:
    a_hat: np.ndarray
    r_hat: float
    starts: int
    iterations: list[int]
    converged: list[bool]
    start_rewards: list[float]
    rho_hat: float | None = None
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "a_hat": [float(x) for x in self.a_hat],
            "r_hat": self.r_hat,
            "rho_hat": self.rho_hat,
            "starts": self.starts,
            "iterations": self.iterations,
            "converged": self.converged,
            "start_rewards": self.start_rewards,
        }


def local_search(a_init, max_iters: int, setup: Setup, f: Callable | None = None,
                 guarded: bool = True) -> SearchReport:
    """Projected gradient ascent with Armijo backtracking.

    Every iterate is clipped to the box and, if ``guarded``, projected onto
    the safe-start set. Accepted iterates never lower the reward.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    default_f = f is None
    if default_f:
        f = functools.partial(model_reward, setup=setup)
    proj = setup.project if guarded else clip_action
    a = proj(clip_action(a_init))
    r = f(a)
    history = [r]
    converged = False
    it = 0
    while it < max_iters:
        g = grad_reward(a, f=f)
        gn = float(np.linalg.norm(g))
        if not np.isfinite(gn) or gn < GRAD_TOL:
            converged = True
            break
        it += 1
        d = g / gn
        step = INIT_STEP
        accepted = False
        while step >= STEP_TOL:
            a_new = proj(clip_action(a + step * d))
            move = a_new - a
            if float(np.linalg.norm(move)) < STEP_TOL:
                break
            r_new = f(a_new)
            if r_new >= r + ARMIJO_C * max(float(g @ move), 0.0):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        a, r = a_new, r_new
        history.append(r)
    rho = predict(a, setup).rho_hat if default_f else None
    return SearchReport(a, r, 1, [it], [converged], [history[0]], rho_hat=rho, history=history)


def latin_starts(n_starts: int, dim: int, seed: int) -> np.ndarray:
    return 2.0 * qmc.LatinHypercube(d=dim, seed=seed).random(n_starts) - 1.0


def _local_from(a0, max_iters, setup):
    return local_search(a0, max_iters, setup)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("FALSIFY_THREADS", "1")))
    except ValueError:
        return 1


def global_search(n_starts: int, seed: int, setup: Setup, max_iters: int = 30,
                  starts: np.ndarray | None = None) -> SearchReport:
    """Multi-start local search; the best start wins, ties to the lower index."""
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    if starts is None:
        starts = latin_starts(n_starts, setup.dim, seed)
    workers = min(_workers(), n_starts)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            reports = list(ex.map(_local_from, starts, [max_iters] * n_starts, [setup] * n_starts))
    else:
        reports = [_local_from(a0, max_iters, setup) for a0 in starts]
    best = 0
    for i, rep in enumerate(reports):
        if rep.r_hat > reports[best].r_hat:
            best = i
    b = reports[best]
    return SearchReport(
        b.a_hat, b.r_hat, n_starts,
        [rep.iterations[0] for rep in reports],
        [rep.converged[0] for rep in reports],
        [rep.start_rewards[0] for rep in reports],
        rho_hat=predict(b.a_hat, setup).rho_hat,
        history=b.history,
    )
