import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import least_squares

from cmetwoport.errors import DegenerateSweep, PoleSingularity
from cmetwoport.lcr import ImpedanceSweep, LcrModel, fit_lcr, lcr_impedance, lcr_resonance
from cmetwoport.synthetic import REFERENCE_LCR, lcr_sweep


def test_low_frequency_limit():
    z = lcr_impedance(REFERENCE_LCR, 1.0)
    # w*L = 2*pi*998e-6, denominator 1 - 3.2e-9
    assert z.real == 998
    assert z.imag == pytest.approx(2 * math.pi * 998e-6, rel=1e-8)
    assert z.imag == pytest.approx(0.00627, rel=1e-3)


def test_value_at_u1_mode():
    z = lcr_impedance(REFERENCE_LCR, 448e3)
    w = 2 * math.pi * 448e3
    wl, wwlc = w * 998e-6, w * w * 998e-6 * 82e-12
    assert wl == pytest.approx(2809.3, abs=0.1)
    assert wwlc == pytest.approx(0.6485, abs=2e-4)
    assert z.real == 998
    assert z.imag == pytest.approx(7991, rel=1e-4)
    assert abs(z) == pytest.approx(8053, rel=1e-4)


def test_pole_raises():
    f0 = lcr_resonance(REFERENCE_LCR)
    assert f0 == pytest.approx(556.36e3, rel=1e-4)
    with pytest.raises(PoleSingularity):
        lcr_impedance(REFERENCE_LCR, f0)
    with pytest.raises(PoleSingularity):
        lcr_impedance(REFERENCE_LCR, np.array([1e5, f0, 6e5]))


def test_resonance_rules():
    assert lcr_resonance(LcrModel(0, 1, 1)) == pytest.approx(1 / (2 * math.pi))
    m = LcrModel(1, 1e-3, 1e-9)
    assert lcr_resonance(LcrModel(1, 4e-3, 1e-9)) == pytest.approx(lcr_resonance(m) / 2)


def test_model_validation():
    with pytest.raises(ValueError):
        LcrModel(-1, 1, 1)
    with pytest.raises(ValueError):
        LcrModel(1, 0, 1)


model_st = st.builds(LcrModel, st.floats(0, 1e4), st.floats(1e-7, 1e-1), st.floats(1e-13, 1e-6))


@settings(max_examples=100)
@given(model_st, st.floats(1.0, 1e8))
def test_real_part_is_r_everywhere(m, f):
    if abs(f / lcr_resonance(m) - 1) < 1e-9:
        return
    assert lcr_impedance(m, f).real == m.r


@settings(max_examples=50)
@given(model_st)
def test_reactance_changes_sign_once(m):
    f0 = lcr_resonance(m)
    f = np.geomspace(f0 / 100, f0 * 100, 1001)
    f = f[np.abs(f / f0 - 1) > 1e-6]
    x = lcr_impedance(m, f).imag
    assert np.all(x[f < f0] > 0) and np.all(x[f > f0] < 0)


def test_noiseless_recovery():
    f, z = lcr_sweep()
    fit = fit_lcr(ImpedanceSweep(f, z))
    assert fit.converged
    assert fit.model.r == pytest.approx(998, rel=1e-3)
    assert fit.model.l == pytest.approx(998e-6, rel=1e-3)
    assert fit.model.c == pytest.approx(82e-12, rel=1e-3)
    assert fit.rms_rel_residual < 1e-10


def test_recovery_across_the_pole():
    f, z = lcr_sweep(f_lo=100e3, f_hi=1e6, n=301)
    fit = fit_lcr(ImpedanceSweep(f, z))
    assert fit.model.c == pytest.approx(82e-12, rel=1e-6)


def test_matches_independent_solver(rng):
    f, z = lcr_sweep(rel_noise=1e-3, rng=rng)
    ours = fit_lcr(ImpedanceSweep(f, z)).model

    def resid(p):
        r, l, c = np.exp(p)
        w = 2 * np.pi * f
        e = (r + 1j * w * l / (1 - w * w * l * c) - z) / np.abs(z)
        return np.concatenate([e.real, e.imag])

    ref = np.exp(least_squares(resid, np.log([900, 1e-3, 8e-11]), xtol=1e-14, ftol=1e-14).x)
    np.testing.assert_allclose([ours.r, ours.l, ours.c], ref, rtol=1e-6)


def test_scale_equivariance(rng):
    f, z = lcr_sweep(rel_noise=1e-3, rng=rng)
    a = fit_lcr(ImpedanceSweep(f, z)).model
    b = fit_lcr(ImpedanceSweep(f, 7.5 * z)).model
    assert b.r == pytest.approx(7.5 * a.r, rel=1e-6)
    assert b.l == pytest.approx(7.5 * a.l, rel=1e-6)
    assert b.c == pytest.approx(a.c / 7.5, rel=1e-6)


def test_degenerate_and_preconditions():
    f = np.linspace(1e5, 5e5, 20)
    with pytest.raises(DegenerateSweep):
        fit_lcr(ImpedanceSweep(f, np.full(20, 100.0)))
    with pytest.raises(ValueError):
        fit_lcr(ImpedanceSweep(f[:5], lcr_impedance(REFERENCE_LCR, f[:5])))
    narrow = np.linspace(1e5, 1.5e5, 20)
    with pytest.raises(ValueError):
        fit_lcr(ImpedanceSweep(narrow, lcr_impedance(REFERENCE_LCR, narrow)))


def test_iteration_cap_reports_not_converged(rng):
    f, z = lcr_sweep(rel_noise=1e-3, rng=rng)
    fit = fit_lcr(ImpedanceSweep(f, z), max_iter=1)
    assert not fit.converged and fit.iterations == 1


def test_report_keys():
    f, z = lcr_sweep()
    rep = fit_lcr(ImpedanceSweep(f, z)).report()
    assert list(rep) == ["r_ohm", "l_h", "c_f", "f0_hz", "rms_rel_residual", "converged"]
    assert rep["f0_hz"] == pytest.approx(556.36e3, rel=1e-4)
