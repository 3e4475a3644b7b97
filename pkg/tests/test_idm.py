import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from acc_falsify.idm import IdmParams, Mode, desired_gap, idm_accel, make_controller, mode_of
from acc_falsify.sim import VehicleState


def at(v, s=0.0):
    return VehicleState(s, v)


def test_mode_examples(prm):
    assert mode_of(at(20), 60.0, prm) is Mode.SET_SPEED
    assert mode_of(at(20), 30.0, prm) is Mode.TIME_GAP


@given(x=st.integers(10, 40))
def test_mode_boundary_inclusive(x):
    prm = IdmParams(v_d=float(x), t_h_d=1.5)
    assert mode_of(at(0), x * 1.5, prm) is Mode.SET_SPEED
    assert mode_of(at(0), x * 1.5 - 1e-9, prm) is Mode.TIME_GAP


def test_standstill_full_acceleration():
    prm = IdmParams(s_h0=0.0)
    assert idm_accel(at(0.0), at(17.0, 40.0), prm) == prm.a_h_max


def test_hand_evaluated_example(prm):
    assert desired_gap(20.0, 20.0, prm) == pytest.approx(32.0)
    expected = 2 * (1 - (2 / 3) ** 4 - (32 / 50) ** 2)
    assert expected == pytest.approx(0.78573, abs=1e-5)
    assert idm_accel(at(20.0), at(20.0, 50.0), prm) == pytest.approx(expected, rel=1e-12)


def test_clamp_to_a_h_min():
    # pick d_fh so the gap ratio is exactly 1 at v = v_d, then u = -a_h_max before the clamp
    prm = IdmParams(d_fh=2.0 + 30.0 * 1.5, a_h_max=4.0, a_h_min=-3.5)
    assert idm_accel(at(30.0), at(30.0, 100.0), prm) == -3.5
    prm2 = IdmParams(d_fh=2.0 + 30.0 * 1.5, a_h_max=2.0, a_h_min=-3.5)
    assert idm_accel(at(30.0), at(30.0, 100.0), prm2) == pytest.approx(-2.0)


@given(v=st.floats(0, 45), vf=st.floats(0, 45), gap=st.floats(0.1, 200))
def test_output_within_bounds(v, vf, gap):
    prm = IdmParams()
    u = idm_accel(at(v), at(vf, gap), prm)
    assert prm.a_h_min <= u <= prm.a_h_max


@given(v=st.floats(0, 40), vf1=st.floats(0, 40), vf2=st.floats(0, 40))
def test_faster_front_never_lowers_accel(v, vf1, vf2):
    prm = IdmParams()
    lo, hi = sorted((vf1, vf2))
    # the squared gap term is monotone only while the desired gap stays nonnegative
    assume(desired_gap(v, hi, prm) >= 0)
    assert idm_accel(at(v), at(lo, 50), prm) <= idm_accel(at(v), at(hi, 50), prm)


def test_default_law_ignores_gap_textbook_does_not(prm):
    assert idm_accel(at(20), at(20, 10), prm) == idm_accel(at(20), at(20, 100), prm)
    tb = IdmParams(textbook_idm=True)
    assert idm_accel(at(20), at(20, 10), tb) < idm_accel(at(20), at(20, 100), tb)


def test_controller_binding(prm):
    c = make_controller(prm)
    assert c(at(20), at(20, 50)) == idm_accel(at(20), at(20, 50), prm)


@pytest.mark.parametrize("kw", [dict(t_h_min=2.0), dict(a_h_min=1.0), dict(v_d=50.0), dict(d_fh=0.0)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        IdmParams(**kw)


@given(v1=st.floats(0, 45), v2=st.floats(0, 45), vf=st.floats(0, 45), gap=st.floats(1, 200))
def test_faster_host_never_accelerates_more(v1, v2, vf, gap):
    prm = IdmParams()
    lo, hi = sorted((v1, v2))
    assume(lo >= vf)
    assert idm_accel(at(hi), at(vf, gap), prm) <= idm_accel(at(lo), at(vf, gap), prm)


@given(v_d=st.floats(15, 20), gap=st.floats(1, 100), k=st.floats(0.67, 2.0))
def test_mode_threshold_scales(v_d, gap, k):
    base = mode_of(at(0), gap, IdmParams(v_d=v_d))
    scaled = mode_of(at(0), gap * k, IdmParams(v_d=v_d * k))
    assume(abs(v_d * 1.5 - gap) > 1e-9 * gap)
    assert base is scaled
