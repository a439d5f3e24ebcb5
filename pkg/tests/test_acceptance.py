"""Acceptance suite. Each test carries a ``criterion`` mark; the terminal
summary prints one PASS/FAIL line per criterion."""

import math
import time

import numpy as np
import pytest

from cmetwoport.errors import TouchstoneSyntaxError
from cmetwoport.lcr import ImpedanceSweep, fit_lcr, lcr_resonance
from cmetwoport.network import TwoPortNetwork, s_to_z, z_to_s
from cmetwoport.noise import (
    BOLTZMANN,
    ReadoutCircuit,
    OpAmpNoiseSpec,
    gain,
    get_opamp,
    noise_psd,
    opamp_figure,
    quadrature_total,
)
from cmetwoport.synthetic import REFERENCE_LCR, bandpass_mode, lcr_sweep, random_passive_s, sensor_network
from cmetwoport.touchstone import TouchstoneOptions, parse_touchstone, write_touchstone
from cmetwoport.transfer import (
    TransferFunction,
    detect_resonances,
    evaluate_fitted,
    fit_resonance_sum,
    fitted_transfer,
    h_open_circuit,
)

crit = pytest.mark.criterion
READOUT = ReadoutCircuit(16.0, 300.0)


def best_time(fn, repeat=5):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


@crit(1, "Av(16, 300) == 19.75 exactly, < 1 ms")
def test_gain():
    av, dt = best_time(lambda: gain(READOUT))
    assert av == 19.75
    assert dt < 1e-3


@crit(2, "R_opamp(9 nV, 1 pA) == 9 kOhm exactly, < 1 ms")
def test_opamp_figure():
    r, dt = best_time(lambda: opamp_figure(OpAmpNoiseSpec("x", 9e-9, 1e-12)))
    assert r == 9000.0
    assert opamp_figure(get_opamp("LT1363")) == 9000.0
    assert dt < 1e-3


@crit(3, "current term 15.8 nV within 10% of 15 nV; voltage term 9.0 nV exactly")
def test_current_and_voltage_terms():
    b = noise_psd(READOUT, get_opamp("LT1363"), 15.8e3)
    current = b.asd("current", "in")
    # sqrt((R2/Av)^2 + |Z|^2) * i_n with R2/Av = 15.19 ohm
    assert current == pytest.approx(15.8e-9, rel=1e-4)
    assert abs(current - 15e-9) <= 0.10 * 15e-9
    assert b.asd("voltage", "in") == 9e-9


@crit(4, "quadrature total 19.24 nV within 2% of 19 and in 18-20; thermal oracle 9.91 nV +-0.5%")
def test_quadrature_and_thermal():
    total = quadrature_total([8e-9, 15e-9, 9e-9])
    assert total == pytest.approx(19.235e-9, rel=1e-4)
    assert abs(total - 19e-9) <= 0.02 * 19e-9
    assert 18e-9 <= total <= 20e-9
    thermal = noise_psd(READOUT, get_opamp("LT1363"), 0.0).asd("thermal")
    assert thermal == pytest.approx(9.91e-9, rel=0.005)
    assert thermal ** 2 == pytest.approx(4 * BOLTZMANN * 300 * 19.75 * 300, rel=1e-12)


@crit(5, "LCR fit: >= 19/20 noisy trials within 1%, noiseless within 0.1%, f0 556.36 kHz, < 1 s per fit")
def test_lcr_round_trip():
    assert lcr_resonance(REFERENCE_LCR) == pytest.approx(556.36e3, rel=1e-4)
    truth = np.array([REFERENCE_LCR.r, REFERENCE_LCR.l, REFERENCE_LCR.c])

    def params(fit):
        return np.array([fit.model.r, fit.model.l, fit.model.c])

    fit, dt = best_time(lambda: fit_lcr(ImpedanceSweep(*lcr_sweep())), repeat=1)
    assert fit.converged and dt < 1.0
    assert np.all(np.abs(params(fit) / truth - 1) < 1e-3)

    ok, worst_dt = 0, 0.0
    for seed in range(20):
        sweep = ImpedanceSweep(*lcr_sweep(rel_noise=1e-3, rng=np.random.default_rng(seed)))
        t0 = time.perf_counter()
        fit = fit_lcr(sweep)
        worst_dt = max(worst_dt, time.perf_counter() - t0)
        ok += bool(np.all(np.abs(params(fit) / truth - 1) < 0.01))
    assert ok >= 19
    assert worst_dt < 1.0


@crit(6, "1000 random passive S: S->Z->S error < 1e-10, reciprocity kept, < 1 s")
def test_conversion_properties():
    rng = np.random.default_rng(6)
    f = np.linspace(1e5, 1e6, 1000)
    for reciprocal in (False, True):
        s = random_passive_s(rng, 1000, max_norm=0.9, reciprocal=reciprocal)
        assert np.max(np.abs(s)) <= 0.9
        net = TwoPortNetwork("S", f, s, z_ref=50.0)
        t0 = time.perf_counter()
        z = s_to_z(net)
        back = z_to_s(z)
        dt = time.perf_counter() - t0
        err = np.linalg.norm(back.matrices - s, axis=(1, 2)) / np.linalg.norm(s, axis=(1, 2))
        assert err.max() < 1e-10
        assert dt < 1.0
        if reciprocal:
            zm = z.matrices
            assert np.max(np.abs(zm[:, 0, 1] - zm[:, 1, 0]) / np.abs(zm[:, 0, 1])) < 1e-12


@crit(7, "Touchstone RI/MA/DB agree < 1e-9, round trip < 1e-9, errors cite the line")
def test_touchstone_conformance():
    rng = np.random.default_rng(7)
    s = random_passive_s(rng, 64)
    net = TwoPortNetwork("S", np.linspace(1e6, 2e9, 64), s, z_ref=50.0)
    parsed = {}
    for fmt in ("RI", "MA", "DB"):
        text = write_touchstone(net, TouchstoneOptions("GHz", "S", fmt, 50.0))
        parsed[fmt] = parse_touchstone(text)[1]
        m = parsed[fmt].matrices
        assert np.max(np.abs(m - s) / np.abs(s)) < 1e-9, fmt
        np.testing.assert_allclose(parsed[fmt].freq, net.freq, rtol=1e-15)
    for fmt in ("MA", "DB"):
        assert np.max(np.abs(parsed[fmt].matrices - parsed["RI"].matrices) / np.abs(parsed["RI"].matrices)) < 1e-9

    lines = write_touchstone(net, TouchstoneOptions("GHz", "S", "RI", 50.0)).splitlines()
    lines[9] = lines[9].replace(" ", " x", 1)
    with pytest.raises(TouchstoneSyntaxError) as exc:
        parse_touchstone("\n".join(lines))
    assert exc.value.line == 10
    assert "line 10" in str(exc.value)


@crit(8, "two modes on a 1 Hz grid: detected within one step, fit within 1%, RMS < 0.5%, additive, < 5 s")
def test_resonance_fixed_point():
    truth = [bandpass_mode(448e3, 100, 1.0, 0.1), bandpass_mode(650e3, 80, 0.6, -0.2)]
    f = np.arange(400e3, 700e3 + 1, 1.0)
    step = 1.0

    t0 = time.perf_counter()
    # full path: synthetic Z network -> S file values -> Z -> H_oc
    net = s_to_z(z_to_s(sensor_network(f, truth), 50.0))
    tf = h_open_circuit(net)
    found = detect_resonances(tf)
    fits = fit_resonance_sum(tf, found)
    again = detect_resonances(fitted_transfer(fits, f))
    dt = time.perf_counter() - t0
    assert dt < 5.0

    assert len(found) == 2 and len(fits) == 2
    for m, d in zip(truth, found):
        # peak of |sum H| sits a few tens of Hz off f_r because of the other
        # mode's leakage; compare against a dense scan of the generator
        g = np.arange(m.f_r - 500, m.f_r + 500, 0.01)
        peak = g[np.argmax(np.abs(evaluate_fitted(truth, g)))]
        assert abs(d.f_r - peak) <= step
    for t, m in zip(truth, fits):
        for name in ("f_r", "q", "b1", "b0"):
            assert getattr(m, name) == pytest.approx(getattr(t, name), rel=0.01), name
    rel = np.abs(evaluate_fitted(fits, f) / evaluate_fitted(truth, f) - 1)
    assert np.sqrt(np.mean(rel ** 2)) < 5e-3
    assert [round(a.f_r) for a in again] == [round(b.f_r) for b in found]

    # superposition: sum over sections equals the sum of single-section sums
    total = evaluate_fitted(fits, f)
    assert np.array_equal(total, evaluate_fitted(fits[:1], f) + evaluate_fitted(fits[1:], f))
    assert np.array_equal(total, fits[0].response(f) + fits[1].response(f))


@crit(9, "noise model: exact term additivity and monotonicity in e_n, i_n, |Z|, T over 100 random points")
def test_noise_invariants():
    rng = np.random.default_rng(9)
    for _ in range(100):
        c = ReadoutCircuit(rng.uniform(1, 1e3), rng.uniform(0, 1e4), rng.uniform(4, 400))
        a = OpAmpNoiseSpec("r", rng.uniform(0.5e-9, 50e-9), rng.uniform(0.1e-12, 10e-12))
        z = complex(rng.uniform(0, 2e4), rng.uniform(-2e4, 2e4))
        b = noise_psd(c, a, z)
        assert b.psd_total == b.psd_thermal + b.psd_current + b.psd_voltage
        assert b.in_total == b.in_thermal + b.in_current + b.in_voltage
        k = rng.uniform(1.01, 3.0)
        bumped = [
            noise_psd(c, OpAmpNoiseSpec("r", a.e_n * k, a.i_n), z),
            noise_psd(c, OpAmpNoiseSpec("r", a.e_n, a.i_n * k), z),
            noise_psd(c, a, z * k),
            noise_psd(ReadoutCircuit(c.r1, c.r2, c.temperature * k), a, z),
        ]
        for other in bumped:
            assert other.psd_total > b.psd_total
            assert other.in_total > b.in_total
