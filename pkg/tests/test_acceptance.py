"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (also repeated in the
pytest terminal summary) and then asserts. Run alone with::

    pytest tests/test_acceptance.py -v -s
"""
import time

import numpy as np
import pytest

from acc_falsify import guard, loops, oracles, stl
from acc_falsify.cli import main
from acc_falsify.config import ExperimentConfig
from acc_falsify.ddpg import DdpgConfig
from acc_falsify.idm import IdmParams
from acc_falsify.model import Setup, global_search, predict, simulate_action
from acc_falsify.scenario import ScenarioRanges, f_act
from acc_falsify.selftest import mlp_grad_error
from acc_falsify.sim import ScenarioParams, Segment, SimConfig, rollout

from conftest import ACCEPTANCE_LINES

SEEDS = (0, 1, 2)
EPISODES = 350
# robustness found by the 32-start search with seed 0, recorded as a regression anchor
MODEL_RHO_ANCHOR = -23.82494971643999


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


_cache = {}


def history(mode, seed):
    key = (mode, seed)
    if key not in _cache:
        t0 = time.perf_counter()
        h = loops.run(ExperimentConfig(mode=mode, episodes=EPISODES, seed=seed))
        _cache[key] = (h, time.perf_counter() - t0)
    return _cache[key]


def test_criterion_1_monitor_oracle():
    rng = np.random.default_rng(2024)
    names = ["x", "y", "z"]
    mismatches = sign_errors = checked = 0
    t0 = time.perf_counter()
    for _ in range(1000):
        f = oracles.random_formula(rng, names, int(rng.integers(1, 5)))
        n = int(rng.integers(1, 13))
        sig = {k: rng.normal(0, 2, n) for k in names}
        fast = stl.robustness_signal(f, sig)
        for t in range(n):
            ref = oracles.naive_robustness(f, sig, t)
            mismatches += fast[t] != ref
            if ref != 0:
                checked += 1
                sign_errors += (ref > 0) != oracles.boolean_sat(f, sig, t)
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and sign_errors == 0 and dt < 10
    assert report(1, ok, f"{mismatches} mismatches, {sign_errors}/{checked} sign errors, {dt:.2f} s")


def test_criterion_2_gradients():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = max(mlp_grad_error(rng, int(rng.integers(1, 4)), 16) for _ in range(50))
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and dt < 30
    assert report(2, ok, f"max relative error {worst:.2e} over 50 nets, {dt:.2f} s")


def _grid_feasible(x, y, prm, cfg, rng):
    # independent vectorised statement of the two start conditions
    v = rng.v_min + 0.5 * (x + 1) * (rng.v_max - rng.v_min)
    d0 = rng.d_min + 0.5 * (y + 1) * (rng.d_max - rng.d_min)
    stop_gap = v ** 2 / (2 * abs(cfg.a_h_min)) + prm.d_fh - v ** 2 / (2 * abs(cfg.a_f_min)) - d0
    reach = (prm.v_d - v) / prm.a_h_com - cfg.t_dur
    return (stop_gap <= 1e-7) & (reach <= 1e-7)


def test_criterion_3_safety_guard():
    cfg, rng_cfg = SimConfig(), ScenarioRanges()
    r = np.random.default_rng(3)
    worst_boundary = 0.0
    for _ in range(100):
        v_h0, v_f0 = r.uniform(5, 40, 2)
        prm = IdmParams(d_fh=float(r.uniform(1, 60)))
        d_sim = (oracles.stopping_distance_sim(v_h0, cfg.a_h_min) + prm.d_fh
                 - oracles.stopping_distance_sim(v_f0, cfg.a_f_min))
        p = ScenarioParams(v_h0, v_f0, d_sim, (Segment(0.0, cfg.t_dur),))
        worst_boundary = max(worst_boundary, abs(guard.safety_margin(p, prm, cfg)))

    prm = IdmParams()
    n = 200
    h = 2.0 / (n - 1)
    g = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(g, g)
    feas = _grid_feasible(X, Y, prm, cfg, rng_cfg)
    idem_fail = opt_fail = 0
    worst_gap = -np.inf
    for _ in range(100):
        a = r.uniform(-1, 1, 12)
        out = guard.project(a, prm, cfg, rng_cfg)
        idem_fail += not np.array_equal(guard.project(out, prm, cfg, rng_cfg), out)
        d = np.hypot(out[0] - a[0], out[1] - a[1])
        best = np.min(np.hypot(X - a[0], Y - a[1])[feas])
        worst_gap = max(worst_gap, d - best)
        opt_fail += not (best - h * np.sqrt(2) <= d <= best + 1e-12)
    ok = worst_boundary < 0.5 and idem_fail == 0 and opt_fail == 0
    assert report(3, ok, f"boundary error {worst_boundary:.3f} m, {idem_fail} non-idempotent, "
                         f"{opt_fail} worse than grid (max excess {worst_gap:.2e}, grid step {h:.4f})")


def test_criterion_4_kinematics():
    cfg = SimConfig(friction_alpha=0.0, clamp_standstill=False)
    # host and front accelerations differ when a lies outside the host range, so the
    # gap must absorb up to 0.5 * 4.36 * 30^2 m of closing
    d0 = 2500.0
    worst = 0.0
    collided = 0
    for a in np.linspace(cfg.a_f_min, cfg.a_f_max, 21):
        for v0 in (0.0, 5.0, 22.5, 40.0):
            p = ScenarioParams(v0, v0, d0, (Segment(float(a), cfg.t_dur),))
            u = float(np.clip(a, cfg.a_h_min, cfg.a_h_max))
            tr = rollout(p, lambda hst, frt: u, cfg)
            collided += tr.collided
            t = tr.t
            worst = max(worst, float(np.max(np.abs(tr.s_f - (d0 + v0 * t + 0.5 * a * t * t)))),
                        float(np.max(np.abs(tr.s_h - (v0 * t + 0.5 * u * t * t)))))
    ok = worst < 1e-9 and collided == 0
    assert report(4, ok, f"max position error {worst:.2e} m over 30 s, 84 rollouts")


def test_criterion_5_model_exactness():
    setup = Setup(sim=SimConfig(friction_alpha=0.0))
    r = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        a = r.uniform(-1, 1, 12)
        worst = max(worst, abs(predict(a, setup).r_hat - simulate_action(a, setup, True).r_hat))
    h = loops.run(ExperimentConfig(mode="combined", episodes=20, seed=0, sim=SimConfig(friction_alpha=0.0)))
    bonuses = [rec.r_nn - rec.reward for rec in h.records]
    ok = worst < 1e-12 and all(b == 0.0 for b in bonuses)
    assert report(5, ok, f"max |R_hat - R| {worst:.1e}, nonzero bonuses {sum(b != 0 for b in bonuses)}/20")


def test_criterion_6_model_falsifier(monkeypatch):
    monkeypatch.delenv("FALSIFY_THREADS", raising=False)
    setup = Setup()
    t0 = time.perf_counter()
    rep = global_search(32, 0, setup)
    dt = time.perf_counter() - t0
    margin = setup.margin(rep.a_hat)
    reach = guard.vd_reachable(f_act(rep.a_hat, setup.ranges, setup.sim), setup.idm, setup.sim)
    ok = rep.rho_hat < 0 and margin <= 0 and reach <= 0 and dt < 300
    assert report(6, ok, f"rho_hat {rep.rho_hat:.4f}, safety margin {margin:.3f} m, {dt:.1f} s")
    assert rep.rho_hat == pytest.approx(MODEL_RHO_ANCHOR, abs=1e-6)


def _nontrivial(rec):
    return rec.rho < 0 and rec.safety_margin <= 0 and (rec.collision_time is None or rec.collision_time > 1.0)


@pytest.mark.slow
def test_criterion_7_combined_end_to_end():
    wins, total, parts = 0, 0.0, []
    for seed in SEEDS:
        h, dt = history("combined", seed)
        total += dt
        b = h.best
        ok = _nontrivial(b)
        wins += ok
        ct = "none" if b.collision_time is None else f"{b.collision_time:.1f} s"
        parts.append(f"seed {seed}: rho {b.rho:.2f}, margin {b.safety_margin:.2f}, collision {ct}")
    ok = wins >= 2 and total < 1800
    assert report(7, ok, f"{wins}/3 seeds non-trivially falsified in {total:.0f} s ({'; '.join(parts)})")


@pytest.mark.slow
def test_criterion_8_comparisons():
    lim_wins = comb_wins = 0
    parts = []
    for seed in SEEDS:
        base = history("baseline", seed)[0].best.reward
        lim = history("limited", seed)[0].best.reward
        comb = history("combined", seed)[0].best.reward
        model = history("model", seed)[0].records[0].reward
        lim_wins += lim >= base
        comb_wins += comb >= model
        parts.append(f"seed {seed}: limited {lim:.3g} vs baseline {base:.3g}, "
                     f"combined {comb:.3g} vs model {model:.3g}")
    ok = lim_wins >= 2 and comb_wins >= 2
    assert report(8, ok, f"limited>=baseline {lim_wins}/3, combined>=model {comb_wins}/3 "
                         f"({'; '.join(parts)})")


def test_criterion_9_reproducibility(tmp_path, capsys):
    mismatched = []
    for mode in ("baseline", "limited", "combined", "model"):
        cfg = ExperimentConfig(mode=mode, episodes=30, seed=1, model_starts=4, model_max_iters=10,
                               ddpg=DdpgConfig(batch_size=16))
        path = tmp_path / f"{mode}.json"
        path.write_text(cfg.to_json())
        out = tmp_path / mode
        snaps = []
        for _ in range(2):
            assert main(["run", "--config", str(path), "--out", str(out)]) == 0
            snaps.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if snaps[0] != snaps[1]:
            mismatched.append(mode)
    capsys.readouterr()
    ok = not mismatched
    assert report(9, ok, f"repeated runs byte-identical for 4 modes; mismatches: {mismatched or 'none'}")
