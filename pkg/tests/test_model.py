import math
import warnings
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from pairlind.errors import DegenerateInput, InvalidArgument, OutsideCoolingRegime
from pairlind.model import (
    TWO_PI,
    BathParams,
    ModelParams,
    bath_rates,
    derive_rates,
    resonance_omega_r,
    resolve_rates,
    validity_flags,
)

REF = dict(omega_c=27.5e6, delta_q=3e9, g=18e6, gamma0=0.5e6, kappa=2e3)


def hand_rates(delta_omega_hz, omega_r_hz, n_bar, dev=REF):
    """Independent arithmetic in cyclic units (all rates scale linearly)."""
    s = math.sqrt(omega_r_hz**2 - delta_omega_hz**2) / omega_r_hz
    c = delta_omega_hz / omega_r_hz
    g2 = 2 * dev["g"] ** 2 * s / dev["delta_q"]
    cos2, sin2 = (1 + c) / 2, (1 - c) / 2
    gp = dev["gamma0"] * cos2**2 / 2
    gm = dev["gamma0"] * sin2**2 / 2
    g0d = dev["gamma0"] * s**2 / 8
    par = gp + gm
    perp = 4 * g0d + par
    sz0 = (gm - gp) / par
    up = g2**2 * (1 + sz0) / (2 * perp)
    down = g2**2 * (1 - sz0) / (2 * perp)
    k = dev["kappa"]
    eta = (k * (1 + n_bar) + down) / (k * n_bar + up)
    return dict(g2=g2, sz0=sz0, up=up, down=down, eta=eta, n_sat=math.sqrt(par * perp / (2 * g2**2)))


def test_symmetry_point_rates():
    p = ModelParams.from_hz(**REF, delta_omega=0.0, omega_r=55e6)
    r = derive_rates(p)
    assert r.theta == pytest.approx(math.pi / 4, rel=1e-15)
    assert r.g2 / TWO_PI == pytest.approx(216e3, rel=1e-12)
    assert r.g0 == 0.0
    for v in (r.gamma_plus, r.gamma_minus, r.gamma_0deph):
        assert v / TWO_PI == pytest.approx(0.5e6 / 8, rel=1e-12)
    assert r.sz0 == 0.0
    assert r.n_sat == pytest.approx(0.709, abs=5e-4)


def test_detuned_point_rates():
    p = ModelParams.from_hz(**REF, n_bar=2.0, delta_omega=50e6, omega_r=55e6)
    r = derive_rates(p)
    h = hand_rates(50e6, 55e6, 2.0)
    assert math.cos(2 * r.theta) == pytest.approx(10 / 11, rel=1e-14)
    assert math.sin(2 * r.theta) == pytest.approx(0.4166, abs=1e-4)
    assert r.g2 / TWO_PI == pytest.approx(h["g2"], rel=1e-12)
    assert r.g2 / TWO_PI == pytest.approx(90.0e3, rel=1e-3)
    assert r.sz0 == pytest.approx(h["sz0"], rel=1e-12)
    assert r.sz0 == pytest.approx(-0.9955, abs=1e-4)
    assert r.Gamma_down / TWO_PI == pytest.approx(h["down"], rel=1e-12)
    assert r.Gamma_down / TWO_PI == pytest.approx(29.7e3, rel=2e-3)
    assert r.Gamma_up / TWO_PI == pytest.approx(h["up"], rel=1e-12)
    assert r.Gamma_up / TWO_PI == pytest.approx(67, rel=1e-2)
    assert r.eta == pytest.approx(h["eta"], rel=1e-12)
    assert r.eta == pytest.approx(8.8, rel=1e-2)
    assert r.n_sat == pytest.approx(h["n_sat"], rel=1e-12)
    assert r.n_sat == pytest.approx(1.96, abs=5e-3)
    assert r.alpha == pytest.approx(math.log(r.eta))


def test_small_detuning_limit():
    r = derive_rates(ModelParams.from_hz(**REF, delta_omega=1e-6, omega=30e6))
    assert r.theta == pytest.approx(math.pi / 4, rel=1e-12)
    assert abs(r.g0) < 1e-6


def test_drive_errors():
    with pytest.raises(InvalidArgument):
        derive_rates(ModelParams.from_hz(**REF, delta_omega=60e6, omega_r=55e6))
    with pytest.raises(InvalidArgument):
        ModelParams.from_hz(**REF, omega_r=55e6, omega=10e6)
    with pytest.raises(InvalidArgument):
        derive_rates(ModelParams.from_hz(**REF, delta_omega=0.0, omega=0.0))


@pytest.mark.parametrize("field", ["omega_c", "delta_q", "g", "gamma0"])
def test_positive_fields(field):
    kw = dict(REF, **{field: 0.0})
    with pytest.raises(InvalidArgument):
        ModelParams.from_hz(**kw)


def test_negative_n_bar_rejected():
    with pytest.raises(InvalidArgument):
        ModelParams.from_hz(**REF, n_bar=-1.0)


def test_dispersive_warning():
    with pytest.warns(UserWarning, match="omega_c/delta_q"):
        ModelParams.from_hz(**dict(REF, omega_c=200e6))


def test_degenerate_gamma_par():
    # gamma0 > 0 is required at construction, so bypass the check to reach the guard
    p = ModelParams.from_hz(**REF, delta_omega=10e6, omega_r=55e6)
    object.__setattr__(p, "gamma0", 0.0)
    with pytest.raises(DegenerateInput):
        derive_rates(p)


dw_st = st.floats(min_value=-54e6, max_value=54e6, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(dw=dw_st, n_bar=st.floats(0, 10))
def test_rate_invariants(dw, n_bar):
    r = derive_rates(ModelParams.from_hz(**REF, n_bar=n_bar, delta_omega=dw, omega_r=55e6))
    assert math.sin(2 * r.theta) ** 2 + math.cos(2 * r.theta) ** 2 == pytest.approx(1.0)
    assert 0 < r.theta < math.pi / 2
    assert min(r.gamma_plus, r.gamma_minus, r.gamma_0deph) >= 0
    assert r.gamma_plus + r.gamma_minus == pytest.approx(r.Gamma_par, rel=1e-14)
    assert r.Gamma_perp == pytest.approx(4 * r.gamma_0deph + r.Gamma_par, rel=1e-14)
    assert abs(r.sz0) <= 1
    assert r.Gamma_up >= 0 and r.Gamma_down >= 0
    assert r.Gamma_up + r.Gamma_down == pytest.approx(r.g2**2 / r.Gamma_perp, rel=1e-13)
    assert r.eta > 0


@settings(max_examples=40, deadline=None)
@given(dw=st.floats(min_value=1e3, max_value=54e6))
def test_sign_flip(dw):
    kw = dict(REF, kappa=0.0)
    a = derive_rates(ModelParams.from_hz(**kw, delta_omega=dw, omega_r=55e6))
    b = derive_rates(ModelParams.from_hz(**kw, delta_omega=-dw, omega_r=55e6))
    assert b.theta == pytest.approx(math.pi / 2 - a.theta, rel=1e-12)
    assert b.gamma_plus == pytest.approx(a.gamma_minus, rel=1e-12)
    assert b.gamma_minus == pytest.approx(a.gamma_plus, rel=1e-12)
    assert b.sz0 == pytest.approx(-a.sz0, rel=1e-12)
    assert b.Gamma_up == pytest.approx(a.Gamma_down, rel=1e-9)
    assert b.eta == pytest.approx(1 / a.eta, rel=1e-9)


def test_bath_rates_examples():
    wc = TWO_PI * 27.5e6
    k, cb = bath_rates(BathParams(nu=2 * wc, chi_tilde=3.0, chi=2.0), wc)
    assert cb == 0.0 and k == pytest.approx(36 / 2)
    k, cb = bath_rates(BathParams(nu=2 * wc + 5.0, chi_tilde=3.0, chi=5.0), wc)
    assert k == pytest.approx(36 / 10, rel=1e-6) and cb == pytest.approx(36 / 10, rel=1e-6)
    assert bath_rates(BathParams(nu=1e8, chi_tilde=0.0, chi=1.0), wc) == (0.0, 0.0)


def test_bath_rejects_bad_chi():
    with pytest.raises(InvalidArgument):
        BathParams(1.0, 1.0, 0.0)
    with pytest.raises(InvalidArgument):
        BathParams(1.0, -1.0, 1.0)


def test_resonance_symmetry_point_is_exact():
    p = ModelParams.from_hz(**REF, n_bar=2.0, delta_omega=0.0)
    assert resonance_omega_r(p, 0.25) == 2 * p.omega_c


def test_resonance_ref_point():
    p = ModelParams.from_hz(**REF, n_bar=2.0, delta_omega=50e6)
    om = resonance_omega_r(p, 0.25)
    assert 0 < om / TWO_PI - 55e6 < 0.5e6
    r = derive_rates(replace(p, omega_r=om))
    bz = 0.25 + 1 / (r.eta - 1)
    assert om - 2 * r.g0 * bz == pytest.approx(2 * p.omega_c, rel=1e-11)


def test_resonance_chi_bar_shift():
    base = ModelParams.from_hz(**REF, n_bar=1.0, delta_omega=0.0)
    shifted = ModelParams.from_hz(**REF, n_bar=1.0, chi_bar=1e6, delta_omega=0.0)
    diff = resonance_omega_r(shifted, 0.25) - resonance_omega_r(base, 0.25)
    assert diff == pytest.approx(TWO_PI * 2e6, rel=1e-12)


def test_resonance_outside_cooling():
    p = ModelParams.from_hz(**REF, n_bar=2.0, delta_omega=-30e6)
    with pytest.raises(OutsideCoolingRegime) as info:
        resonance_omega_r(p, 0.25)
    assert info.value.eta <= 1


def test_resolve_rates_respects_explicit_drive():
    p = ModelParams.from_hz(**REF, n_bar=2.0, delta_omega=50e6, omega_r=55e6)
    q, r = resolve_rates(p, 0.25)
    assert q is p and r.omega_r == p.omega_r


def test_validity_flags_ref_point():
    p = ModelParams.from_hz(**REF, n_bar=2.0, delta_omega=50e6, omega_r=55e6)
    r = derive_rates(p)
    f = validity_flags(r, p, 0.26)
    assert f.good_cavity and f.below_saturation and f.cooling_regime and f.all


def test_validity_flags_symmetry_point():
    p = ModelParams.from_hz(**REF, n_bar=2.0, delta_omega=0.0, omega_r=55e6)
    r = derive_rates(p)
    n = 2 / (r.eta - 1)
    assert r.eta == pytest.approx(1.03, abs=0.01)
    assert n > 60
    assert not validity_flags(r, p, n).below_saturation


def test_validity_flags_kappa_zero():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        p = ModelParams.from_hz(**dict(REF, kappa=0.0), delta_omega=50e6, omega_r=55e6)
    r = derive_rates(p)
    assert validity_flags(r, p, 0.1).good_cavity == (r.g2 < p.gamma0)
    assert validity_flags(r, p, None).below_saturation is False
