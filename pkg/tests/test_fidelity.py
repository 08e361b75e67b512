import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdrepeater import fidelity
from qdrepeater.params import TWO_PI, default_parameters, with_physical

# Frozen oracle values, computed independently with adaptive 2D quadrature
# (scipy dblquad, epsrel 1e-10) over the Gaussian-weighted heralding fidelity.
F_ENT_500_AT_275 = 0.9946133416
F_ENT_200_AT_200 = 0.9926551476
F_BK_NOMINAL_500 = 0.9950519849


# ------------------------------------------------------------ purcell / BK

def test_purcell_on_resonance(params):
    assert fidelity.purcell_at_detuning(500.0, params.physical.kappa, 0.0) == 500.0


def test_purcell_paper_anchors():
    kappa = TWO_PI * 100e9
    assert fidelity.purcell_at_detuning(500, kappa, TWO_PI * 275e9) == \
        pytest.approx(16.0, abs=0.1)
    # hand evaluation: 200 * 100^2 / (4*200^2 + 100^2)
    expected = 200 * 100.0**2 / (4 * 200.0**2 + 100.0**2)
    assert fidelity.purcell_at_detuning(200, kappa, TWO_PI * 200e9) == \
        pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(11.76, abs=0.01)


def test_enhanced_rates():
    gp, Gp = fidelity.enhanced_rates(1.0, 0.0, 0.0, 0.0)
    assert (gp, Gp) == (1.0, 1.0)
    gamma_r = TWO_PI * 0.59e9
    gp, Gp = fidelity.enhanced_rates(gamma_r, 0.0, 0.0, 16.0)
    assert gp == pytest.approx(17 * gamma_r, rel=1e-12)
    assert gp == pytest.approx(TWO_PI * 10.03e9, rel=1e-3)
    _, Gp = fidelity.enhanced_rates(1.0, 0.0, 0.25, 0.0)
    assert Gp == 1.5


def test_barrett_kok_symmetric_ideal():
    assert fidelity.barrett_kok_fidelity(1.0, 1.0, 1.0, 1.0, 0.0) == 1.0


def test_barrett_kok_hand_case():
    # gamma' = 1, gamma* = 0.5 each, so Gamma' = 2: 0.5*(1 + 4/16)
    assert fidelity.barrett_kok_fidelity(1.0, 1.0, 2.0, 2.0, 0.0) == \
        pytest.approx(0.625, rel=1e-12)


def test_barrett_kok_large_detuning_limit():
    assert fidelity.barrett_kok_fidelity(1.0, 1.0, 1.0, 1.0, 1e12) == \
        pytest.approx(0.5, abs=1e-12)


# ------------------------------------------------------------ F_ent

def test_entanglement_fidelity_zero_width_equals_nominal(params):
    phys = with_physical(params, sigma_sd=0.0).physical
    f = fidelity.entanglement_fidelity(phys)
    gp, Gp = fidelity.enhanced_rates(phys.gamma_r, phys.gamma_nr,
                                     phys.gamma_star, 16.0)
    assert f == pytest.approx(
        float(fidelity.barrett_kok_fidelity(gp, gp, Gp, Gp, 0.0)), rel=1e-12)
    assert f == pytest.approx(F_BK_NOMINAL_500, abs=1e-9)


def test_entanglement_fidelity_paper_anchors(params):
    f500 = fidelity.entanglement_fidelity(params.physical)
    assert f500 == pytest.approx(0.995, abs=0.002)
    assert f500 == pytest.approx(F_ENT_500_AT_275, abs=1e-8)
    phys200 = with_physical(params, F_res=200.0,
                            detuning=TWO_PI * 200e9).physical
    f200 = fidelity.entanglement_fidelity(phys200)
    assert f200 == pytest.approx(0.993, abs=0.002)
    assert f200 == pytest.approx(F_ENT_200_AT_200, abs=1e-8)


def test_entanglement_fidelity_quadrature_converges(params):
    a = fidelity.entanglement_fidelity_fixed_nodes(params.physical, 42)
    b = fidelity.entanglement_fidelity_fixed_nodes(params.physical, 84)
    assert abs(a - b) < 1e-6
    assert 0.5 <= fidelity.entanglement_fidelity(params.physical) <= 1.0


def test_entanglement_fidelity_nonconvergence_raises(params):
    # a one-node start cannot resolve the integrand; force exhaustion
    with pytest.raises(fidelity.ConvergenceError) as err:
        fidelity.entanglement_fidelity(params.physical, rtol=1e-300,
                                       start_nodes=1, max_doublings=1)
    assert len(err.value.estimates) == 2


# ------------------------------------------------------------ transfer

def test_electron_init_is_configured_value(params):
    assert fidelity.electron_init_fidelity(params.physical) == 0.99996
    assert fidelity.electron_init_fidelity(
        with_physical(params, F_e_init=1.0).physical) == 1.0


def test_nuclear_init_anchors():
    assert fidelity.nuclear_init_fidelity(0.95) == pytest.approx(0.998, abs=1e-12)
    assert fidelity.nuclear_init_fidelity(0.80) == pytest.approx(0.977, abs=1e-12)
    assert fidelity.nuclear_init_fidelity(1.0) == pytest.approx(1.0, abs=1e-12)


def test_nuclear_init_no_extrapolation():
    with pytest.raises(ValueError, match="tabulated range"):
        fidelity.nuclear_init_fidelity(0.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.80, max_value=0.999))
def test_nuclear_init_monotone(p):
    assert fidelity.nuclear_init_fidelity(p + 1e-3) >= \
        fidelity.nuclear_init_fidelity(p)


def test_quadrupolar_factor_values():
    assert fidelity.quadrupolar_factor(5e4, 2, 0.0) == 1.0
    # hand evaluation: exp(-16 * (5e4 * 330e-9)^2) = exp(-16 * 0.0165^2)
    expected = math.exp(-16 * (5e4 * 330e-9) ** 2)
    assert expected == pytest.approx(0.99565, abs=1e-5)
    assert fidelity.quadrupolar_factor(5e4, 2, 330e-9) == \
        pytest.approx(expected, rel=1e-12)
    assert fidelity.quadrupolar_factor(5e4, 1, 330e-9) == \
        pytest.approx(math.exp(-(5e4 * 330e-9) ** 2), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e3, max_value=1e6),
       st.floats(min_value=1e-9, max_value=1e-5))
def test_quadrupolar_mode_power_law(sigma, t):
    one = fidelity.quadrupolar_factor(sigma, 1, t)
    two = fidelity.quadrupolar_factor(sigma, 2, t)
    assert two == pytest.approx(one**16, rel=1e-9)


def test_transfer_fidelity_products():
    f95 = fidelity.transfer_fidelity(0.99996, 0.998, 0.9956534736)
    assert f95 == pytest.approx(0.993, abs=0.002)
    assert f95 == pytest.approx(0.99996 * 0.998 * 0.9956534736, rel=1e-12)
    f80 = fidelity.transfer_fidelity(0.99996, 0.977, 0.9956534736)
    assert f80 == pytest.approx(0.973, abs=0.002)
    assert fidelity.transfer_fidelity(1.0, 1.0, 1.0) == 1.0


# ------------------------------------------------------------ gate

def test_gate_fidelity_anchors(params):
    g500 = fidelity.gate_fidelity(params.physical)
    assert g500.fidelity == pytest.approx(0.995, abs=0.001)
    assert g500.fidelity == pytest.approx(0.9948039404, abs=1e-9)
    assert g500.gate_time == pytest.approx(2e-9, abs=5e-11)
    assert g500.warnings == ()
    g200 = fidelity.gate_fidelity(with_physical(params, F_res=200.0).physical)
    assert g200.fidelity == pytest.approx(0.986, abs=0.001)
    assert g200.fidelity == pytest.approx(0.9863776511, abs=1e-9)


def test_gate_detuning_symmetry_term_vanishes(params):
    base = fidelity.gate_fidelity(params.physical).fidelity
    shifted = fidelity.gate_fidelity(
        with_physical(params, delta_eps1=TWO_PI * 3e9,
                      delta_eps2=TWO_PI * 3e9).physical).fidelity
    assert shifted == base


def test_gate_asymmetric_detuning_costs_fidelity(params):
    skew = fidelity.gate_fidelity(
        with_physical(params, delta_eps1=TWO_PI * 1e9).physical).fidelity
    assert skew < fidelity.gate_fidelity(params.physical).fidelity


def test_gate_ideal_limit(params):
    ideal = with_physical(params, F_res=1e12, T2_electron=1e12).physical
    assert fidelity.gate_fidelity(ideal).fidelity == pytest.approx(1.0, abs=1e-9)


def test_gate_validity_warning_out_of_regime(params):
    weak = fidelity.gate_fidelity(with_physical(params, F_res=20.0).physical)
    assert weak.warnings
    assert "1/C" in weak.warnings[0]


# ------------------------------------------------------------ readout

def test_readout_anchor():
    gamma_prime = 501 * TWO_PI * 0.59e9
    f = fidelity.readout_fidelity(600e-9, 500.0, 0.9, 0.9, TWO_PI * 1e9,
                                  gamma_prime)
    assert f == pytest.approx(0.99983, abs=2e-5)
    assert f == pytest.approx(0.9998337131, abs=1e-9)


def test_readout_no_window_is_coin_flip():
    assert fidelity.readout_fidelity(0.0, 500.0, 0.9, 0.9, 1e9, 1e12) == 0.5


def test_readout_dark_free_limit():
    f = fidelity.readout_fidelity(1.0, 0.0, 0.9, 0.9, 1e9, 1e12)
    assert f == pytest.approx(1.0, abs=1e-12)


def test_readout_strong_drive_warns():
    with pytest.warns(UserWarning, match="weak"):
        fidelity.readout_fidelity(600e-9, 500.0, 0.9, 0.9, 1e12, 1e12)


def test_invert_readout_drive_round_trip():
    gamma_prime = 501 * TWO_PI * 0.59e9
    omega = fidelity.invert_readout_drive(0.99983, 600e-9, 500.0, 0.9, 0.9,
                                          gamma_prime)
    assert abs(omega - TWO_PI * 1e9) / (TWO_PI * 1e9) < 0.05
    back = fidelity.readout_fidelity(600e-9, 500.0, 0.9, 0.9, omega,
                                     gamma_prime)
    assert back == pytest.approx(0.99983, abs=1e-12)


# ------------------------------------------------------------ splittings

def test_zeeman_splittings_anchor():
    s = fidelity.zeeman_splittings(6.6, -0.076, 1.309, 0.80, 31e9)
    assert s.dE_g == pytest.approx(32e9, abs=0.5e9)
    assert s.dE_e == pytest.approx(146e9, abs=1e9)
    assert s.dE_OH == pytest.approx(24.8e9, rel=1e-12)


def test_zeeman_splittings_zero_field():
    s = fidelity.zeeman_splittings(0.0, -0.076, 1.309, 0.0, 31e9)
    assert (s.dE_g, s.dE_e, s.dE_OH) == (0.0, 0.0, 0.0)


def test_pulse_spacing():
    omega_z = TWO_PI * 7.22e6 * 6.6
    tau2 = fidelity.pulse_spacing(omega_z, 2)
    # independent arithmetic: 3*pi / (4 * omega_z * 2)
    assert tau2 == pytest.approx(3 * math.pi / (8 * omega_z), rel=1e-12)
    assert tau2 == pytest.approx(3.935e-9, abs=5e-12)
    assert fidelity.pulse_spacing(omega_z, 1) == pytest.approx(2 * tau2, rel=1e-12)
    assert fidelity.pulse_spacing(2 * omega_z, 2) == pytest.approx(tau2 / 2,
                                                                   rel=1e-12)


# ------------------------------------------------------------ composition

def _budget(F_e, F_ro, F_ent, F_tr, F_gate):
    return fidelity.FidelityBudget(
        F_e_init=F_e, F_n_init=1.0, F_quad=1.0, F_transfer=F_tr,
        F_BK_nominal=F_ent, F_ent=F_ent, F_gate=F_gate, F_readout=F_ro,
        F_total=math.nan, gate_time=0.0, n_nest=0, warnings=())


def test_overall_fidelity_composition_value():
    budget = _budget(0.99996, 0.99983, 0.995, 0.99397, 0.9948)
    value = fidelity.overall_fidelity(budget, 3)
    # independent arithmetic for l = 8
    expected = (0.99996**16 * 0.99983**14
                * (0.995 * 0.99397**2) ** 8 * 0.9948**7)
    assert value == pytest.approx(expected, rel=1e-12)
    assert value == pytest.approx(0.831, abs=0.01)


def test_overall_fidelity_trivial_cases():
    assert fidelity.overall_fidelity(_budget(1, 1, 1, 1, 1), 4) == 1.0
    budget = _budget(0.9, 0.8, 0.7, 0.6, 0.5)
    # l = 1: no readout or gate factors
    assert fidelity.overall_fidelity(budget, 0) == \
        pytest.approx(0.9**2 * 0.7 * 0.6**2, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.9, max_value=1.0),
       st.integers(min_value=0, max_value=4))
def test_overall_fidelity_monotone(f, n):
    lo = _budget(f, f, f, f, f)
    hi = _budget(min(1.0, f + 1e-3), f, f, f, f)
    assert fidelity.overall_fidelity(hi, n) >= fidelity.overall_fidelity(lo, n)
    if f < 1.0 and n < 4:
        assert fidelity.overall_fidelity(lo, n + 1) < \
            fidelity.overall_fidelity(lo, n)


def test_electron_init_override_propagates_linearly(params):
    base = fidelity.fidelity_budget(params)
    poor = fidelity.fidelity_budget(with_physical(params, F_e_init=0.9))
    assert poor.F_transfer / base.F_transfer == pytest.approx(0.9 / 0.99996,
                                                              rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1.0, max_value=1000.0),
       st.floats(min_value=0.0, max_value=TWO_PI * 400e9),
       st.floats(min_value=0.0, max_value=TWO_PI * 500e6))
def test_entanglement_fidelity_stays_in_physical_range(f_res, det, sigma):
    phys = with_physical(default_parameters(), F_res=f_res, detuning=det,
                         sigma_sd=sigma).physical
    value = fidelity.entanglement_fidelity(phys)
    assert 0.5 <= value <= 1.0


def test_budget_pipeline_matches_components(params):
    b = fidelity.fidelity_budget(params)
    assert b.F_ent == pytest.approx(F_ENT_500_AT_275, abs=1e-8)
    assert b.F_BK_nominal == pytest.approx(F_BK_NOMINAL_500, abs=1e-9)
    assert b.F_transfer == pytest.approx(
        b.F_e_init * b.F_n_init * b.F_quad, rel=1e-12)
    assert b.F_total == pytest.approx(
        fidelity.overall_fidelity(b, params.link.n_nest), rel=1e-12)
    assert b.in_regime


def test_contour_anchors(params):
    contour = fidelity.fidelity_contour(params, [200.0, 500.0],
                                        [0.80, 0.95, 0.999], n_nest=3)
    def at(fp, pol):
        return contour.total[contour.fp_grid.index(fp),
                             contour.polarization_grid.index(pol)]
    assert at(500.0, 0.95) == pytest.approx(0.831, abs=0.01)
    assert at(200.0, 0.95) == pytest.approx(0.734, abs=0.01)
    assert at(500.0, 0.80) == pytest.approx(0.596, abs=0.01)
    assert at(200.0, 0.80) == pytest.approx(0.526, abs=0.01)
    assert at(500.0, 0.999) == pytest.approx(0.858, abs=0.01)
    assert at(200.0, 0.999) == pytest.approx(0.758, abs=0.01)
    # regression pin for the headline point
    assert at(500.0, 0.95) == pytest.approx(0.8310932545, abs=1e-8)


def test_contour_rejects_empty_grid(params):
    with pytest.raises(ValueError):
        fidelity.fidelity_contour(params, [], [0.9])
