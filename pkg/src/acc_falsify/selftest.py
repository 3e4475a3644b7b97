"""Fast oracle checks runnable without pytest (``acc-falsify selftest``)."""
from __future__ import annotations

import numpy as np

from . import guard, oracles, stl
from .ddpg import Mlp
from .idm import IdmParams
from .scenario import ScenarioRanges, f_act
from .sim import ScenarioParams, Segment, SimConfig, rollout


def check_monitor(n: int, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    names = ["x", "y", "z"]
    for i in range(n):
        f = oracles.random_formula(rng, names, 4)
        length = int(rng.integers(1, 13))
        sig = {k: rng.normal(0.0, 2.0, length) for k in names}
        fast = stl.robustness_signal(f, sig)
        for t in range(length):
            ref = oracles.naive_robustness(f, sig, t)
            if fast[t] != ref:
                return False, f"case {i}, t={t}: {fast[t]!r} != {ref!r}"
            if ref != 0.0 and (ref > 0) != oracles.boolean_sat(f, sig, t):
                return False, f"case {i}, t={t}: sign disagrees with Boolean semantics"
    return True, f"{n} random formulas"


def mlp_grad_error(rng, n_layers: int, width: int, h: float = 1e-6) -> float:
    """Largest relative error of backprop against central differences."""
    sizes = [int(rng.integers(1, width + 1)) for _ in range(n_layers + 1)]
    acts = [str(rng.choice(["tanh", "linear"])) for _ in range(n_layers)]
    net = Mlp(sizes, acts, rng, out_scale=1.0)
    x = rng.normal(size=(3, sizes[0]))
    c = rng.normal(size=(3, sizes[-1]))

    def loss():
        return float(np.sum(c * net(x)))

    _, cache = net.forward(x)
    dW, db, _ = net.backward(cache, c)
    worst = 0.0
    for p, g in zip(net.params, [t for pair in zip(dW, db) for t in pair]):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for j in range(flat.size):
            old = flat[j]
            flat[j] = old + h
            up = loss()
            flat[j] = old - h
            dn = loss()
            flat[j] = old
            num = (up - dn) / (2 * h)
            denom = max(abs(num), abs(gflat[j]), 1e-6)
            worst = max(worst, abs(num - gflat[j]) / denom)
    return worst


def check_gradients(n: int, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = max(mlp_grad_error(rng, int(rng.integers(1, 4)), 16) for _ in range(n))
    return worst < 1e-5, f"max relative error {worst:.2e}"


def check_guard(n: int, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    cfg = SimConfig()
    worst = 0.0
    for _ in range(n):
        v_h0, v_f0 = rng.uniform(5, 40, 2)
        d_fh = rng.uniform(1, 60)
        prm = IdmParams(d_fh=d_fh)
        host = oracles.stopping_distance_sim(v_h0, cfg.a_h_min)
        front = oracles.stopping_distance_sim(v_f0, cfg.a_f_min)
        d_sim = host + d_fh - front
        p = ScenarioParams(v_h0, v_f0, d_sim, (Segment(0.0, cfg.t_dur),))
        worst = max(worst, abs(guard.safety_margin(p, prm, cfg)))
    return worst < 0.5, f"max boundary disagreement {worst:.3f} m"


def check_kinematics() -> tuple[bool, str]:
    cfg = SimConfig(friction_alpha=0.0, clamp_standstill=False)
    p = ScenarioParams(20.0, 20.0, 1e4, (Segment(0.3, cfg.t_dur),))
    tr = rollout(p, lambda h, f: 0.0, cfg)
    t = tr.t
    err = float(np.max(np.abs(tr.s_f - (1e4 + 20.0 * t + 0.15 * t * t))))
    return err < 1e-9, f"max position error {err:.2e} m"


def check_projection(n: int, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    cfg, prm, ranges = SimConfig(), IdmParams(), ScenarioRanges()
    worst = -np.inf
    for _ in range(n):
        a = guard.project(rng.uniform(-1, 1, 12), prm, cfg, ranges)
        worst = max(worst, guard.safety_margin(f_act(a, ranges, cfg), prm, cfg))
    return worst <= 1e-6, f"max margin after projection {worst:.2e} m"


def run_selftest(quick: bool = True) -> bool:
    scale = 1 if quick else 5
    checks = [
        ("monitor oracle", lambda: check_monitor(200 * scale)),
        ("mlp gradients", lambda: check_gradients(10 * scale)),
        ("braking guard", lambda: check_guard(20 * scale)),
        ("projection", lambda: check_projection(50 * scale)),
        ("kinematics", check_kinematics),
    ]
    ok_all = True
    for name, fn in checks:
        ok, detail = fn()
        ok_all &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok_all
