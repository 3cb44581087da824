import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aoisched import (
    Scheme,
    derive,
    load_config,
    mc_outage_estimate,
    mean_harvest,
    outage_noma,
    outage_oma,
    outage_wet_oma,
    sample_slot_outcome,
)
from aoisched.link import noma_decoding_order

# Frozen closed-form values at the baseline scenario, hand-computed from the
# exponential-fading outage expressions and cross-checked by the Monte Carlo
# oracle below.
OMA_D1_50 = 7.471945180861583e-3   # 1 - exp(-0.0075)
OMA_D2_50 = 1.4888060396937353e-2  # 1 - exp(-0.015)
WETOMA_D1_50 = 1.4860491494651629e-2
WETOMA_D2_50 = 2.944636492309094e-2
NOMA_9_1_60 = (0.14357113103503583, 0.15842825722346787)
NOMA_5_5_50_FIRST = 0.6059552241587749


@pytest.fixture(scope="module")
def derived50():
    return derive(load_config("snr_db = 50\n"))


@pytest.fixture(scope="module")
def derived60():
    return derive(load_config("snr_db = 60\n"))


def test_outage_oma_frozen_values(derived50):
    assert outage_oma(1, 0.01, derived50) == pytest.approx(OMA_D1_50, rel=1e-12)
    assert outage_oma(2, 0.01, derived50) == pytest.approx(OMA_D2_50, rel=1e-12)


def test_outage_oma_zero_rate():
    d = derive(load_config("r_bar = 0\n"))
    assert outage_oma(1, 0.01, d) == 0.0
    assert outage_oma(2, 0.003, d) == 0.0


def test_outage_oma_zero_power_convention(derived50):
    assert outage_oma(1, 0.0, derived50) == 1.0


def test_outage_noma_frozen_values(derived50, derived60):
    pair = outage_noma(0.009, 0.001, derived60)
    assert pair.p1 == pytest.approx(NOMA_9_1_60[0], rel=1e-9)
    assert pair.p2 == pytest.approx(NOMA_9_1_60[1], rel=1e-9)
    pair = outage_noma(0.005, 0.005, derived50)
    assert pair.p1 == pytest.approx(NOMA_5_5_50_FIRST, rel=1e-9)


def test_outage_noma_interference_limited_limit():
    # equal fading parameters, equal powers, vanishing noise -> beta/(1+beta)
    d = derive(load_config("lambda1 = 300\nlambda2 = 300\nsnr_db = 300\n"))
    pair = outage_noma(0.005, 0.005, d)
    assert pair.p1 == pytest.approx(0.75, abs=1e-9)


def test_outage_noma_decoding_order(derived50):
    # device 1 has twice the mean received power at equal transmit power
    assert noma_decoding_order(0.005, 0.005, derived50) == (1, 2)
    # skew power until device 2 leads: P1/250 < P2/500 needs P2 > 2 P1
    assert noma_decoding_order(0.001, 0.009, derived50) == (2, 1)
    # exact tie goes to device 1: P1/250 == P2/500 at P2 = 2 P1
    assert noma_decoding_order(0.002, 0.004, derived50) == (1, 2)


def test_outage_noma_zero_power_fallback(derived50):
    pair = outage_noma(0.0, 0.01, derived50)
    assert pair.p1 == 1.0
    assert pair.p2 == pytest.approx(OMA_D2_50, rel=1e-12)
    pair = outage_noma(0.01, 0.0, derived50)
    assert pair.p2 == 1.0
    assert pair.p1 == pytest.approx(OMA_D1_50, rel=1e-12)


def test_outage_wet_oma_frozen_values(derived50):
    assert outage_wet_oma(1, 0.01, derived50) == pytest.approx(WETOMA_D1_50, rel=1e-12)
    assert outage_wet_oma(2, 0.01, derived50) == pytest.approx(WETOMA_D2_50, rel=1e-12)


def test_outage_wet_oma_vanishing_self_interference():
    base = derive(load_config("snr_db = 50\n"))
    weak = derive(load_config("snr_db = 50\nlambda0 = 1e15\n"))
    assert abs(outage_wet_oma(1, 0.01, weak) - outage_oma(1, 0.01, base)) < 1e-9
    weaker = derive(load_config("snr_db = 50\nlambda0 = 1e16\n"))
    for dev in (1, 2):
        assert abs(outage_wet_oma(dev, 0.01, weaker) - outage_oma(dev, 0.01, base)) < 1e-9


def test_mean_harvest_defaults(derived50):
    assert mean_harvest(1, derived50) == pytest.approx(0.02, rel=1e-12)
    assert mean_harvest(2, derived50) == pytest.approx(0.01, rel=1e-12)


def test_mean_harvest_zero_efficiency():
    d = derive(load_config("eta = 1e-12\n"))  # eta = 0 is rejected; limit case
    assert mean_harvest(1, d) == pytest.approx(0.0, abs=1e-12)


finite_power = st.floats(min_value=1e-5, max_value=0.01)


@settings(max_examples=200, deadline=None)
@given(power=finite_power, device=st.sampled_from([1, 2]),
       snr=st.floats(min_value=0, max_value=80))
def test_outage_bounds_and_wet_oma_dominance(power, device, snr):
    d = derive(load_config(f"snr_db = {snr}\n"))
    p_oma = outage_oma(device, power, d)
    p_wo = outage_wet_oma(device, power, d)
    assert 0.0 <= p_oma <= 1.0
    assert 0.0 <= p_wo <= 1.0
    # self-interference can only hurt
    assert p_wo >= p_oma - 1e-15


@settings(max_examples=200, deadline=None)
@given(p1=finite_power, p2=finite_power, snr=st.floats(min_value=0, max_value=80))
def test_outage_noma_bounds(p1, p2, snr):
    d = derive(load_config(f"snr_db = {snr}\n"))
    pair = outage_noma(p1, p2, d)
    assert 0.0 <= pair.p1 <= 1.0
    assert 0.0 <= pair.p2 <= 1.0


@settings(max_examples=100, deadline=None)
@given(device=st.sampled_from([1, 2]),
       lo=finite_power, hi=finite_power)
def test_outage_oma_monotone_in_power(derived50, device, lo, hi):
    if lo > hi:
        lo, hi = hi, lo
    assert outage_oma(device, hi, derived50) <= outage_oma(device, lo, derived50) + 1e-15


def test_mc_matches_analytic_oma(derived50):
    mc = mc_outage_estimate(Scheme("oma", 1), (0.01, 0.0), derived50, 200_000, seed=7)
    assert abs(mc.estimate[0] - OMA_D1_50) <= 4 * mc.stderr[0]
    assert mc.estimate[1] == 1.0  # unscheduled device never succeeds


def test_mc_matches_analytic_noma_fixed_order(derived60):
    mc = mc_outage_estimate(Scheme("noma"), (0.009, 0.001), derived60, 200_000,
                            seed=11, order="mean")
    assert abs(mc.estimate[0] - NOMA_9_1_60[0]) <= 4 * mc.stderr[0]
    assert abs(mc.estimate[1] - NOMA_9_1_60[1]) <= 4 * mc.stderr[1]


def test_mc_wet_is_certain_outage(derived50):
    mc = mc_outage_estimate(Scheme("wet"), (0.0, 0.0), derived50, 1000, seed=3)
    assert mc.estimate == (1.0, 1.0)


def test_mc_deterministic(derived50):
    a = mc_outage_estimate(Scheme("wet+oma", 2), (0.0, 0.01), derived50, 50_000, seed=5)
    b = mc_outage_estimate(Scheme("wet+oma", 2), (0.0, 0.01), derived50, 50_000, seed=5)
    assert a == b


def test_sample_slot_wet_deterministic_harvest(derived50):
    rng = np.random.default_rng(0)
    out = sample_slot_outcome(Scheme("wet"), (0.0, 0.0), derived50, rng)
    assert out.success == (False, False)
    assert out.harvested == pytest.approx((0.02, 0.01), rel=1e-12)


def test_sample_slot_oma_never_harvests(derived50):
    rng = np.random.default_rng(1)
    out = sample_slot_outcome(Scheme("oma", 1), (0.01, 0.0), derived50, rng)
    assert out.harvested == (0.0, 0.0)


def test_sample_slot_half_duplex(derived50):
    # the transmitting device cannot harvest under WET+OMA
    rng = np.random.default_rng(2)
    out = sample_slot_outcome(Scheme("wet+oma", 1), (0.01, 0.0), derived50, rng,
                              harvest_mode="sampled")
    assert out.harvested[0] == 0.0
    assert out.harvested[1] > 0.0


def test_sample_slot_seed_repeatable(derived50):
    outs = [
        sample_slot_outcome(Scheme("noma"), (0.005, 0.005), derived50,
                            np.random.default_rng(9), harvest_mode="sampled")
        for _ in range(2)
    ]
    assert outs[0] == outs[1]


def test_scheme_validation():
    with pytest.raises(ValueError):
        Scheme("oma")          # missing device
    with pytest.raises(ValueError):
        Scheme("wet", device=1)
    with pytest.raises(ValueError):
        Scheme("bogus")
