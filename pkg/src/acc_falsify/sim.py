"""Discrete-time longitudinal simulator for a host/front vehicle pair.

Vehicles are points on a line. The host is driven by a controller callback,
the front vehicle by a piecewise-constant acceleration profile.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

#: headway reported when the host is (nearly) at standstill
T_H_CAP = 1e3
#: velocity below which headway is capped
EPS_V = 1e-3
#: tolerance on the sum of profile segment durations
DURATION_TOL = 1e-9

G_CONST = 9.82


class VehicleState(NamedTuple):
    s: float
    v: float


@dataclass(frozen=True)
class SimConfig:
    """Simulator configuration.

    ``friction_alpha`` enters the host update as ``v' = (1 - alpha) v + ts u``.
    The default of -0.01 is taken verbatim and *amplifies* velocity by 1 %
    per step rather than damping it; set 0 to recover plain kinematics.
    """

    ts: float = 0.1
    t_dur: float = 30.0
    friction_alpha: float = -0.01
    a_h_min: float = -3.5
    a_h_max: float = 2.0
    a_f_min: float = -0.8 * G_CONST
    a_f_max: float = 0.4 * G_CONST
    g_const: float = G_CONST
    clamp_standstill: bool = True

    def __post_init__(self):
        if not self.ts > 0 or not self.t_dur > 0:
            raise ValueError("ts and t_dur must be positive")
        n = self.t_dur / self.ts
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            raise ValueError(f"t_dur/ts must be a positive integer, got {n}")
        if not (self.a_h_min < 0 < self.a_h_max and self.a_f_min < 0 < self.a_f_max):
            raise ValueError("acceleration bounds must straddle zero")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_dur / self.ts))


@dataclass(frozen=True)
class Segment:
    a: float
    t: float


@dataclass(frozen=True)
class ScenarioParams:
    """Initial states plus the front-vehicle acceleration profile."""

    v_h0: float
    v_f0: float
    d0: float
    segments: tuple[Segment, ...]

    def to_dict(self) -> dict:
        return {
            "v_h0": self.v_h0,
            "v_f0": self.v_f0,
            "d0": self.d0,
            "segments": [{"a": sg.a, "t": sg.t} for sg in self.segments],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioParams":
        try:
            segs = tuple(Segment(float(x["a"]), float(x["t"])) for x in d["segments"])
            return cls(float(d["v_h0"]), float(d["v_f0"]), float(d["d0"]), segs)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed scenario: {exc!r}") from exc


Controller = Callable[[VehicleState, VehicleState], float]


def _advance(s: float, v: float, v_next: float, u: float, ts: float, clamp: bool) -> VehicleState:
    if clamp and v_next < 0.0:
        # halt inside the step: advance by the distance covered until v = 0
        t_stop = min(ts, v / -u) if u < 0.0 else ts
        return VehicleState(s + v * t_stop + 0.5 * u * t_stop * t_stop, 0.0)
    return VehicleState(s + ts * v + 0.5 * ts * ts * u, v_next)


def step_kinematics(x: VehicleState, u: float, ts: float, clamp: bool = True) -> VehicleState:
    """One zero-order-hold step of the double integrator."""
    return _advance(x.s, x.v, x.v + ts * u, u, ts, clamp)


def step_host_friction(x: VehicleState, u: float, cfg: SimConfig) -> VehicleState:
    return _advance(x.s, x.v, (1.0 - cfg.friction_alpha) * x.v + cfg.ts * u, u, cfg.ts, cfg.clamp_standstill)


def headway(gap: float, v: float) -> float:
    return gap / v if v >= EPS_V else T_H_CAP


@dataclass
class Trace:
    """Sampled closed-loop trajectory; every array has length n_steps + 1."""

    ts: float
    s_h: np.ndarray
    v_h: np.ndarray
    s_f: np.ndarray
    v_f: np.ndarray
    u_host: np.ndarray
    u_front: np.ndarray
    gap: np.ndarray
    headway: np.ndarray
    collided: bool = False
    collision_step: int | None = None

    def __len__(self) -> int:
        return len(self.gap)

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self)) * self.ts

    @property
    def host(self) -> list[VehicleState]:
        return [VehicleState(float(s), float(v)) for s, v in zip(self.s_h, self.v_h)]

    @property
    def front(self) -> list[VehicleState]:
        return [VehicleState(float(s), float(v)) for s, v in zip(self.s_f, self.v_f)]

    def signals(self) -> dict[str, np.ndarray]:
        """Named signals as seen by the temporal-logic monitor."""
        return {
            "a_h": self.u_host,
            "v": self.v_h,
            "h": self.gap,
            "t_h": self.headway,
            "v_f": self.v_f,
            "a_f": self.u_front,
        }

    def collision_time(self) -> float | None:
        return None if self.collision_step is None else self.collision_step * self.ts


def profile_boundaries(p: ScenarioParams, t_dur: float) -> list[float]:
    total = math.fsum(sg.t for sg in p.segments)
    if abs(total - t_dur) > DURATION_TOL:
        raise ValueError(f"segment durations sum to {total}, expected {t_dur}")
    if any(sg.t < 0 for sg in p.segments):
        raise ValueError("negative segment duration")
    ends, acc = [], 0.0
    for sg in p.segments:
        acc += sg.t
        ends.append(acc)
    return ends


def front_accel(p: ScenarioParams, ends: Sequence[float], t: float) -> float:
    for sg, end in zip(p.segments, ends):
        if t < end:
            return sg.a
    return p.segments[-1].a


def rollout(
    p: ScenarioParams,
    controller: Controller,
    cfg: SimConfig,
    use_friction: bool = True,
) -> Trace:
    """Simulate the closed loop for ``cfg.t_dur`` seconds.

    Stops at the first sample with gap <= 0 and pads the rest of the trace
    with the collision-time values so all signals keep their full length.
    """
    ends = profile_boundaries(p, cfg.t_dur)
    n = cfg.n_steps
    ts = cfg.ts
    clamp = cfg.clamp_standstill
    host_factor = (1.0 - cfg.friction_alpha) if use_friction else 1.0
    a_h_lo, a_h_hi = cfg.a_h_min, cfg.a_h_max
    a_f_lo, a_f_hi = cfg.a_f_min, cfg.a_f_max

    host = VehicleState(0.0, float(p.v_h0))
    front = VehicleState(float(p.d0), float(p.v_f0))
    rows = []
    collision_step = None
    for k in range(n + 1):
        u_h = min(max(controller(host, front), a_h_lo), a_h_hi)
        u_f = min(max(front_accel(p, ends, k * ts), a_f_lo), a_f_hi)
        rows.append((host.s, host.v, front.s, front.v, u_h, u_f))
        if front.s - host.s <= 0.0:
            collision_step = k
            break
        if k == n:
            break
        if host_factor == 1.0:
            host = _advance(host.s, host.v, host.v + ts * u_h, u_h, ts, clamp)
        else:
            host = _advance(host.s, host.v, host_factor * host.v + ts * u_h, u_h, ts, clamp)
        front = _advance(front.s, front.v, front.v + ts * u_f, u_f, ts, clamp)

    arr = np.array(rows, dtype=float)
    if len(arr) < n + 1:
        arr = np.vstack([arr, np.repeat(arr[-1:], n + 1 - len(arr), axis=0)])
    s_h, v_h, s_f, v_f, u_h, u_f = (arr[:, i].copy() for i in range(6))
    gap = s_f - s_h
    th = np.where(v_h >= EPS_V, gap / np.where(v_h >= EPS_V, v_h, 1.0), T_H_CAP)
    return Trace(ts, s_h, v_h, s_f, v_f, u_h, u_f, gap, th,
                 collided=collision_step is not None, collision_step=collision_step)


CSV_HEADER = ["t", "s_h", "v_h", "u_h", "s_f", "v_f", "u_f", "gap", "t_h", "collided"]


def _g9(x: float) -> str:
    return format(float(x), ".9g")


def write_trace_csv(tr: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for k in range(len(tr)):
            coll = int(tr.collided and k >= tr.collision_step)
            w.writerow([_g9(k * tr.ts), _g9(tr.s_h[k]), _g9(tr.v_h[k]), _g9(tr.u_host[k]),
                        _g9(tr.s_f[k]), _g9(tr.v_f[k]), _g9(tr.u_front[k]),
                        _g9(tr.gap[k]), _g9(tr.headway[k]), coll])


def read_trace_csv(path) -> Trace:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace")
    missing = set(CSV_HEADER) - set(rows[0])
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    col = {k: np.array([float(r[k]) for r in rows]) for k in CSV_HEADER}
    ts = float(col["t"][1] - col["t"][0]) if len(rows) > 1 else 0.1
    hit = np.flatnonzero(col["collided"] > 0)
    return Trace(ts, col["s_h"], col["v_h"], col["s_f"], col["v_f"], col["u_h"], col["u_f"],
                 col["gap"], col["t_h"], collided=bool(len(hit)),
                 collision_step=int(hit[0]) if len(hit) else None)
