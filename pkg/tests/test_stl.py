import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acc_falsify import oracles, stl
from acc_falsify.stl import (
    RHO_TOP, And, Eventually, Globally, Implies, Not, Or, SignalTrace, Top, build_acc_spec, ge, le,
    parse, reward, robustness, robustness_signal, to_text,
)

V = SignalTrace({"v": [20.0, 22.0, 24.0]}, 0.1)


def test_globally_example():
    assert robustness(Globally(le("v", 25)), V) == 1.0


def test_eventually_example():
    assert robustness(Eventually(ge("v", 25)), V) == -1.0


def test_time_index_bounds():
    assert robustness(le("v", 25), V, 2) == 1.0
    with pytest.raises(IndexError):
        robustness(le("v", 25), V, 3)


def test_unknown_signal():
    with pytest.raises(KeyError):
        robustness(le("x", 1), V)


def test_trace_validation():
    with pytest.raises(ValueError):
        SignalTrace({"a": [1, 2], "b": [1]})
    with pytest.raises(ValueError):
        SignalTrace({"a": []})


def test_linear_atom_margin():
    w = SignalTrace({"h": [10.0], "v": [5.0]})
    f = stl.Atom((("h", 1.0), ("v", -0.8)), "ge", 0.0, scale=2.0)
    assert robustness(f, w) == pytest.approx((10 - 4) / 2)


def test_top_margin():
    assert robustness(Top(), V) == RHO_TOP


def _random_case(seed):
    rng = np.random.default_rng(seed)
    names = ["x", "y", "z"]
    f = oracles.random_formula(rng, names, int(rng.integers(1, 5)))
    n = int(rng.integers(1, 13))
    sig = {k: np.round(rng.normal(0, 2, n), int(rng.integers(0, 3))) for k in names}
    return f, sig, n


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_matches_naive_evaluator(seed):
    f, sig, n = _random_case(seed)
    fast = robustness_signal(f, sig)
    for t in range(n):
        assert fast[t] == oracles.naive_robustness(f, sig, t)


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_sign_agrees_with_boolean_semantics(seed):
    f, sig, n = _random_case(seed)
    for t in range(n):
        rho = oracles.naive_robustness(f, sig, t)
        if rho != 0:
            assert (rho > 0) == oracles.boolean_sat(f, sig, t)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_g_f_duality(seed):
    f, sig, _ = _random_case(seed)
    np.testing.assert_array_equal(robustness_signal(Not(Eventually(Not(f))), sig),
                                  robustness_signal(Globally(f), sig))


@given(xs=st.lists(st.floats(-50, 50), min_size=1, max_size=12))
def test_contradiction_never_positive(xs):
    phi = ge("x", 0.0)
    w = SignalTrace({"x": xs})
    assert robustness(And((phi, Not(phi))), w) <= 0
    assert robustness(Or((phi, Not(phi))), w) >= 0


def test_implication_semantics():
    w = SignalTrace({"x": [3.0]})
    assert robustness(Implies(ge("x", 5), le("x", 1)), w) == max(2.0, -2.0)


@pytest.mark.parametrize("rho,expected", [(0.0, 1.0), (-1.0, math.e), (2.0, math.exp(-2.0))])
def test_reward_examples(rho, expected):
    assert reward(rho) == pytest.approx(expected, rel=1e-15)
    assert reward(2.0) == pytest.approx(0.13534, abs=5e-6)


@given(a=st.floats(-700, 700), b=st.floats(-700, 700))
def test_reward_strictly_decreasing(a, b):
    if b - a > 1e-9 * max(1.0, abs(a)):
        assert reward(a) > reward(b)


def test_reward_finite_for_huge_violation():
    assert math.isfinite(reward(-1e9))


def test_reward_penalty():
    assert reward(0.0, [0.5, -0.25]) == pytest.approx(0.25)


def _acc_trace(n=50, v=20.0, h=60.0, a=0.0):
    return {"a_h": np.full(n, a), "v": np.full(n, v), "h": np.full(n, h)}


def test_acc_compliant_set_speed(prm, cfg):
    sig = _acc_trace()
    f = build_acc_spec(prm, cfg)
    # hand evaluation: actuator margin min(0 + 3.5, 2 - 0) = 2, speed target 30 - 20 = 10,
    # headway clauses 60 - 16 = 44 and 60 - 30 = 30
    assert robustness(f, SignalTrace(sig)) == 2.0


def test_acc_actuator_violation(prm, cfg):
    sig = _acc_trace()
    sig["a_h"][17] = cfg.a_h_min - 0.1
    assert robustness(build_acc_spec(prm, cfg), SignalTrace(sig)) == pytest.approx(-0.1, abs=1e-12)


def test_acc_collision_trace_negative(prm, cfg):
    sig = _acc_trace(h=30.0)
    sig["h"] = np.linspace(30.0, 0.0, 50)
    rho = robustness(build_acc_spec(prm, cfg), SignalTrace(sig))
    # time-gap mode holds throughout, so GF(h - 1.5 v >= 0) reduces to its last
    # sample 0 - 30, which is below the minimum-headway margin 0 - 16
    assert rho == pytest.approx(-30.0)


def test_acc_spec_signals(prm, cfg):
    assert stl.signal_names(build_acc_spec(prm, cfg)) == {"a_h", "v", "h"}


def test_parse_example():
    f = parse("(G (le v 25))")
    assert f == Globally(le("v", 25.0))
    assert robustness(f, V) == 1.0


def test_parse_linear_terms():
    f = parse("(ge (+ h (* -0.8 v)) 0 2.5)")
    assert f == stl.Atom((("h", 1.0), ("v", -0.8)), "ge", 0.0, 2.5)


def test_text_roundtrip_acc(prm, cfg):
    f = build_acc_spec(prm, cfg)
    assert parse(to_text(f)) == f


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_text_roundtrip_random(seed):
    f, _, _ = _random_case(seed)
    assert parse(to_text(f)) == f


@pytest.mark.parametrize("text", ["(G (le v 25)", "(G (le v 25)))", "(X (le v 1))", "(le v abc)",
                                  "(and)", "(implies (le v 1))", "", "(ge v 1 -1)"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse(text)
