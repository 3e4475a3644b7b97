"""Mapping between normalised agent actions and physical scenarios.

Action layout (all components in [-1, 1])::

    [v0_n, d0_n, a_1 .. a_n, tau_1 .. tau_n (, vf0_n)]

The trailing front-speed slot exists only when
``ScenarioRanges.front_speed_action`` is set; otherwise the front vehicle
starts at the host's initial speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sim import DURATION_TOL, ScenarioParams, Segment, SimConfig, Trace

V0 = 0
D0 = 1


@dataclass(frozen=True)
class ScenarioRanges:
    v_min: float = 5.0
    v_max: float = 40.0
    d_min: float = 5.0
    d_max: float = 120.0
    n_segments: int = 5
    t_seg_min: float = 0.5
    front_speed_action: bool = False

    def __post_init__(self):
        if not (self.v_min < self.v_max and self.d_min < self.d_max):
            raise ValueError("empty scenario range")
        if self.n_segments < 1 or self.t_seg_min < 0:
            raise ValueError("need n_segments >= 1 and t_seg_min >= 0")


def action_dim(rng: ScenarioRanges) -> int:
    return 2 + 2 * rng.n_segments + int(rng.front_speed_action)


def accel_slice(rng: ScenarioRanges) -> slice:
    return slice(2, 2 + rng.n_segments)


def tau_slice(rng: ScenarioRanges) -> slice:
    return slice(2 + rng.n_segments, 2 + 2 * rng.n_segments)


def vf0_index(rng: ScenarioRanges) -> int | None:
    return 2 + 2 * rng.n_segments if rng.front_speed_action else None


def clip_action(a) -> np.ndarray:
    return np.clip(np.asarray(a, dtype=float), -1.0, 1.0)


def _to_phys(x: float, lo: float, hi: float) -> float:
    return lo + 0.5 * (x + 1.0) * (hi - lo)


def _to_norm(y: float, lo: float, hi: float) -> float:
    return 2.0 * (y - lo) / (hi - lo) - 1.0


def _durations(tau: np.ndarray, rng: ScenarioRanges, t_dur: float) -> list[float]:
    n = rng.n_segments
    free = t_dur - n * rng.t_seg_min
    if free < 0:
        raise ValueError("t_seg_min * n_segments exceeds the scenario duration")
    w = 0.5 * (tau + 1.0)
    total = float(np.sum(w))
    if total <= 0.0:
        w, total = np.ones(n), float(n)
    t = [rng.t_seg_min + free * float(wi) / total for wi in w[:-1]]
    t.append(t_dur - math.fsum(t))
    return t


def f_act(a, rng: ScenarioRanges, cfg: SimConfig) -> ScenarioParams:
    """Decode a normalised action into scenario parameters.

    Durations are renormalised so that they always sum to ``cfg.t_dur``.
    """
    a = clip_action(a)
    if a.shape != (action_dim(rng),):
        raise ValueError(f"action must have shape ({action_dim(rng)},), got {a.shape}")
    v_h0 = _to_phys(a[V0], rng.v_min, rng.v_max)
    d0 = _to_phys(a[D0], rng.d_min, rng.d_max)
    iv = vf0_index(rng)
    v_f0 = v_h0 if iv is None else _to_phys(a[iv], rng.v_min, rng.v_max)
    acc = [_to_phys(x, cfg.a_f_min, cfg.a_f_max) for x in a[accel_slice(rng)]]
    dur = _durations(a[tau_slice(rng)], rng, cfg.t_dur)
    return ScenarioParams(float(v_h0), float(v_f0), float(d0),
                          tuple(Segment(float(x), float(t)) for x, t in zip(acc, dur)))


def f_act_inverse(p: ScenarioParams, rng: ScenarioRanges, cfg: SimConfig) -> np.ndarray:
    """A canonical action decoding to ``p`` (durations scaled so max tau = 1)."""
    a = np.zeros(action_dim(rng))
    a[V0] = _to_norm(p.v_h0, rng.v_min, rng.v_max)
    a[D0] = _to_norm(p.d0, rng.d_min, rng.d_max)
    iv = vf0_index(rng)
    if iv is not None:
        a[iv] = _to_norm(p.v_f0, rng.v_min, rng.v_max)
    a[accel_slice(rng)] = [_to_norm(sg.a, cfg.a_f_min, cfg.a_f_max) for sg in p.segments]
    w = np.array([sg.t - rng.t_seg_min for sg in p.segments])
    top = float(np.max(w))
    a[tau_slice(rng)] = 2.0 * w / top - 1.0 if top > 0 else 0.0
    return clip_action(a)


@dataclass(frozen=True)
class AgentState:
    a_min: float
    a_max: float
    t_h_min_obs: float
    v_min_obs: float
    v_max_obs: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a_min, self.a_max, self.t_h_min_obs, self.v_min_obs, self.v_max_obs])


STATE_DIM = 5


def f_eval(tr: Trace) -> AgentState:
    if len(tr) == 0:
        raise ValueError("cannot summarise an empty trace")
    return AgentState(float(np.min(tr.u_host)), float(np.max(tr.u_host)), float(np.min(tr.headway)),
                      float(np.min(tr.v_h)), float(np.max(tr.v_h)))


def constraint_residuals(p: ScenarioParams, rng: ScenarioRanges, cfg: SimConfig) -> np.ndarray:
    """Equality residual of the duration sum followed by range violations.

    Every entry is zero when the scenario is admissible; violations of range
    constraints are reported as positive amounts. Duration-sum residuals
    below 1e-9 s count as zero.
    """

    def over(x, lo, hi):
        return max(0.0, lo - x) + max(0.0, x - hi)

    dsum = math.fsum(sg.t for sg in p.segments) - cfg.t_dur
    res = [0.0 if abs(dsum) <= DURATION_TOL else dsum,
           over(p.v_h0, rng.v_min, rng.v_max),
           over(p.v_f0, rng.v_min, rng.v_max),
           over(p.d0, rng.d_min, rng.d_max)]
    res += [over(sg.a, cfg.a_f_min, cfg.a_f_max) for sg in p.segments]
    res += [max(0.0, rng.t_seg_min - sg.t) for sg in p.segments]
    return np.array(res)
