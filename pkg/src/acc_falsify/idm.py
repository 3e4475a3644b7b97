"""The system under test: an IDM-style ACC law and its mode logic."""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

from .sim import VehicleState


class Mode(enum.Enum):
    SET_SPEED = "SetSpeed"
    TIME_GAP = "TimeGap"


@dataclass(frozen=True)
class IdmParams:
    """ACC/IDM parameters.

    ``alpha_exp`` is the IDM velocity exponent and is unrelated to the
    simulator friction coefficient. ``s_h0`` is used as the jam-distance
    constant of the desired-gap term.

    With ``textbook_idm`` off (the default) the gap penalty is
    ``(d / d_fh)**2`` with a *constant* ``d_fh``; the controller then reacts
    to speeds only, not to the measured gap. Switching it on divides by the
    actual gap instead.
    """

    v_d: float = 30.0
    t_h_d: float = 1.5
    t_h_min: float = 0.8
    t_h_max: float = 2.5
    d_fh: float = 50.0
    a_h_max: float = 2.0
    a_h_com: float = 1.0
    a_h_min: float = -3.5
    s_h0: float = 2.0
    alpha_exp: float = 4.0
    v_d_min: float = 10.0
    v_d_max: float = 40.0
    textbook_idm: bool = False

    def __post_init__(self):
        if not 0 < self.t_h_min < self.t_h_d < self.t_h_max:
            raise ValueError("need 0 < t_h_min < t_h_d < t_h_max")
        if not self.a_h_min < 0 < self.a_h_com <= self.a_h_max:
            raise ValueError("need a_h_min < 0 < a_h_com <= a_h_max")
        if not self.v_d_min <= self.v_d <= self.v_d_max:
            raise ValueError("v_d outside [v_d_min, v_d_max]")
        if self.d_fh <= 0 or self.alpha_exp <= 0:
            raise ValueError("d_fh and alpha_exp must be positive")


def mode_of(host: VehicleState, gap: float, prm: IdmParams) -> Mode:
    return Mode.SET_SPEED if prm.v_d <= gap / prm.t_h_d else Mode.TIME_GAP


def desired_gap(v_h: float, v_f: float, prm: IdmParams) -> float:
    return prm.s_h0 + v_h * prm.t_h_d + v_h * (v_h - v_f) / (2.0 * math.sqrt(prm.a_h_max * prm.a_h_com))


def idm_accel(host: VehicleState, front: VehicleState, prm: IdmParams) -> float:
    v_h = host.v
    d = desired_gap(v_h, front.v, prm)
    if prm.textbook_idm:
        denom = max(front.s - host.s, 1e-6)
    else:
        denom = prm.d_fh
    u = prm.a_h_max * (1.0 - (v_h / prm.v_d) ** prm.alpha_exp - (d / denom) ** 2)
    return min(max(u, prm.a_h_min), prm.a_h_max)


def make_controller(prm: IdmParams):
    """Bind parameters into a ``(host, front) -> accel`` callback."""
    return functools.partial(idm_accel, prm=prm)
