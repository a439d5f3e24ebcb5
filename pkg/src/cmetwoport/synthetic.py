"""Synthetic sensors and sweeps for tests, demos and golden files.

Nothing here is measured data.
"""

import numpy as np

from .lcr import LcrModel, lcr_impedance
from .network import TwoPortNetwork
from .transfer import ResonanceMode, evaluate_fitted

# series-R + parallel-LC values identified for the reference sensor
REFERENCE_LCR = LcrModel(998.0, 998e-6, 82e-12)
U1_HZ = 448e3


def bandpass_mode(f_r, q, peak_gain=1.0, b0_frac=0.0):
    """Second-order mode whose b1 term alone peaks at ``peak_gain``.

    ``b0_frac`` adds a real numerator term b0 = b0_frac * peak_gain * w_r**2 / q.
    """
    w = 2 * np.pi * f_r
    return ResonanceMode(f_r, q, b1=peak_gain * w / q, b0=b0_frac * peak_gain * w * w / q)


def sensor_network(freq, modes, r_cant=998.0, l_cant=998e-6, r_coil=50.0, l_coil=100e-6):
    """Reciprocal Z network whose Z21/Z11 equals the sum of ``modes``.

    Z11 is a series R-L cantilever branch, Z22 a series R-L coil and
    Z12 = Z21 = H * Z11.
    """
    f = np.asarray(freq, dtype=float)
    w = 2 * np.pi * f
    z11 = r_cant + 1j * w * l_cant
    z22 = r_coil + 1j * w * l_coil
    z21 = evaluate_fitted(modes, f) * z11
    m = np.empty((f.size, 2, 2), dtype=complex)
    m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1] = z11, z21, z21, z22
    return TwoPortNetwork("Z", f, m, z_ref=50.0)


def lcr_sweep(model=REFERENCE_LCR, f_lo=100e3, f_hi=500e3, n=400, rel_noise=0.0, rng=None):
    """Impedance sweep of ``model`` with optional complex multiplicative noise.

    The noise is 1 + rel_noise * (x + jy)/sqrt(2) with x, y standard normal,
    so ``rel_noise`` is the RMS relative error per sample.
    """
    f = np.linspace(f_lo, f_hi, n)
    z = lcr_impedance(model, f)
    if rel_noise:
        rng = np.random.default_rng() if rng is None else rng
        z = z * (1 + rel_noise * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2))
    return f, z


def random_passive_s(rng, n, max_norm=0.9, reciprocal=False):
    """``n`` random complex 2x2 matrices with spectral norm <= max_norm."""
    a = rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))
    if reciprocal:
        a[:, 1, 0] = a[:, 0, 1]
    norms = np.linalg.norm(a, ord=2, axis=(1, 2))
    scale = max_norm * rng.uniform(0.05, 1.0, n) / norms
    return a * scale[:, None, None]
