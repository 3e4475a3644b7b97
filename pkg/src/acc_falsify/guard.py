"""Prior-knowledge guards that exclude trivially violating scenarios.

Two start conditions are checked:

* braking: under mutual full braking the host must come to rest at least
  ``d_fh`` behind the front vehicle's resting position;
* reachability: the desired speed must be reachable within the scenario at
  comfortable acceleration.

Both depend only on the initial states, so the projection of an unsafe
action moves only the initial-speed and initial-distance coordinates.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .idm import IdmParams
from .scenario import D0, V0, ScenarioRanges, clip_action, f_act, vf0_index
from .sim import ScenarioParams, SimConfig

log = logging.getLogger(__name__)

#: margins up to this value are accepted as "on the boundary"
FEAS_TOL = 1e-7


def safety_margin(p: ScenarioParams, prm: IdmParams, cfg: SimConfig) -> float:
    """Host stopping point plus ``d_fh`` minus the front stopping point (m).

    ``<= 0`` means the start is safe.
    """
    if cfg.a_h_min == 0 or cfg.a_f_min == 0:
        raise ValueError("braking guard needs nonzero deceleration bounds")
    host_stop = p.v_h0 ** 2 / (2.0 * abs(cfg.a_h_min))
    front_stop = p.v_f0 ** 2 / (2.0 * abs(cfg.a_f_min))
    return (host_stop + prm.d_fh) - (p.d0 + front_stop)


def vd_reachable(p: ScenarioParams, prm: IdmParams, cfg: SimConfig) -> float:
    """Time short of reaching ``v_d`` at comfortable acceleration (s); ``<= 0`` is fine."""
    if prm.a_h_com <= 0:
        raise ValueError("a_h_com must be positive")
    return (prm.v_d - p.v_h0) / prm.a_h_com - cfg.t_dur


def is_safe(p: ScenarioParams, prm: IdmParams, cfg: SimConfig, tol: float = FEAS_TOL) -> bool:
    return safety_margin(p, prm, cfg) <= tol and vd_reachable(p, prm, cfg) <= tol


@dataclass(frozen=True)
class Projection:
    action: np.ndarray
    projected: bool
    feasible: bool = True


def _boundary_poly(a: np.ndarray, prm: IdmParams, cfg: SimConfig, rng: ScenarioRanges) -> Polynomial:
    """``P`` with ``safety_margin <= 0  <=>  d0_n >= P(v0_n)``."""
    cv, kv = 0.5 * (rng.v_min + rng.v_max), 0.5 * (rng.v_max - rng.v_min)
    cd, kd = 0.5 * (rng.d_min + rng.d_max), 0.5 * (rng.d_max - rng.d_min)
    ah = 1.0 / (2.0 * abs(cfg.a_h_min))
    af = 1.0 / (2.0 * abs(cfg.a_f_min))
    iv = vf0_index(rng)
    if iv is None:
        q, r = ah - af, prm.d_fh
    else:
        v_f0 = cv + kv * float(a[iv])
        q, r = ah, prm.d_fh - af * v_f0 ** 2
    v = Polynomial([cv, kv])
    return (q * v * v + (r - cd)) / kd


def _reach_lower(prm: IdmParams, cfg: SimConfig, rng: ScenarioRanges) -> float:
    cv, kv = 0.5 * (rng.v_min + rng.v_max), 0.5 * (rng.v_max - rng.v_min)
    return (prm.v_d - prm.a_h_com * cfg.t_dur - cv) / kv


def _real_roots(poly: Polynomial, lo: float, hi: float) -> list[float]:
    poly = poly.trim()
    if poly.degree() < 1:
        return []
    out = []
    for z in poly.roots():
        if abs(z.imag) <= 1e-9 * max(1.0, abs(z.real)):
            x = float(z.real)
            d = poly.deriv()
            for _ in range(2):
                dx = d(x)
                if dx != 0:
                    x -= poly(x) / dx
            if lo <= x <= hi:
                out.append(x)
    return sorted(out)


def _sublevel(poly: Polynomial, c: float, lo: float, hi: float) -> list[tuple[float, float]]:
    """Intervals of ``[lo, hi]`` on which ``poly(x) <= c``."""
    cuts = [lo] + _real_roots(poly - c, lo, hi) + [hi]
    out = []
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        if poly(0.5 * (x0 + x1)) <= c:
            out.append((x0, x1))
    if lo == hi and poly(lo) <= c:
        out.append((lo, hi))
    return out


def _candidates(x0: float, y0: float, P: Polynomial, xl: float, xu: float):
    # points on the curved boundary
    dist = (Polynomial([-x0, 1.0]) + (P - y0) * P.deriv())
    xs = _real_roots(dist, xl, xu) + [xl, xu]
    xs += _real_roots(P - 1.0, xl, xu) + _real_roots(P + 1.0, xl, xu)
    for x in xs:
        y = P(x)
        if -1.0 <= y <= 1.0:
            yield x, y
    # points on the straight box edges y = +-1
    for yc in (1.0, -1.0):
        for a, b in _sublevel(P, yc, xl, xu):
            yield min(max(x0, a), b), yc
    # points on the vertical edges
    for xc in (xl, xu):
        ylo = max(P(xc), -1.0)
        if ylo <= 1.0:
            yield xc, min(max(y0, ylo), 1.0)


def project_info(a, prm: IdmParams, cfg: SimConfig, rng: ScenarioRanges) -> Projection:
    """Nearest action (Euclidean, normalised space) whose start is safe."""
    a = clip_action(a)
    if is_safe(f_act(a, rng, cfg), prm, cfg):
        return Projection(a, projected=False)
    x0, y0 = float(a[V0]), float(a[D0])
    P = _boundary_poly(a, prm, cfg, rng)
    xl, xu = max(-1.0, _reach_lower(prm, cfg, rng)), 1.0
    best = None
    if xl <= xu:
        for x, y in _candidates(x0, y0, P, xl, xu):
            x = min(max(x, xl), xu)
            y = min(max(y, P(x)), 1.0)
            if y < P(x) - 1e-12 or y < -1.0:
                continue
            d = (x - x0) ** 2 + (y - y0) ** 2
            if best is None or d < best[0]:
                best = (d, x, y)
    out = a.copy()
    if best is None:
        xs = np.array([-1.0, 1.0]) if xl > xu else np.array([xl, xu])
        x = float(xs[np.argmin([P(x) for x in xs])]) if xl <= xu else 1.0
        out[V0], out[D0] = x, 1.0
        log.warning("safety guard infeasible over the whole range; using corner (%g, 1)", x)
        return Projection(out, projected=True, feasible=False)
    out[V0], out[D0] = best[1], best[2]
    # nudge onto the safe side of the boundary after rounding in the decode
    for _ in range(4):
        if safety_margin(f_act(out, rng, cfg), prm, cfg) <= 0.0 or out[D0] >= 1.0:
            break
        out[D0] = min(1.0, np.nextafter(out[D0], 2.0) + 1e-15)
    return Projection(out, projected=True)


def project(a, prm: IdmParams, cfg: SimConfig, rng: ScenarioRanges) -> np.ndarray:
    return project_info(a, prm, cfg, rng).action
