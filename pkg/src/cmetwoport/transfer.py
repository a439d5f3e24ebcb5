"""Sensor transfer functions from Z-parameters and multi-resonance models.

Each U-mode is modelled as one second-order section::

    H_r(s) = (b1*s + b0) / (s**2 + (w_r/q)*s + w_r**2),   w_r = 2*pi*f_r

and the sensor response is the plain sum over modes, evaluated at s = j*w.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import (
    DivisionByZeroError,
    GridMismatch,
    IllConditionedFit,
    OutOfGrid,
    SingularDeterminant,
)
from .fmt import fmt
from .network import TwoPortNetwork, as_grid

LABELS = ("OpenCircuit", "ShortCircuitTransadmittance", "Combined", "FittedSum")

Z11_FLOOR = 1e-15  # ohm
DET_RTOL = 1e-12
COND_LIMIT = 1e12
BAND_WIDTHS = 3.0  # half-power widths on each side of a peak
MIN_BAND_SAMPLES = 8


@dataclass(frozen=True)
class TransferFunction:
    freq: np.ndarray
    h: np.ndarray
    label: str = "OpenCircuit"

    def __post_init__(self):
        freq = as_grid(self.freq)
        h = np.array(self.h, dtype=complex, ndmin=1)
        if h.shape != freq.shape:
            raise ValueError("h must have one sample per grid point")
        if not np.all(np.isfinite(h)):
            raise ValueError("transfer function samples must be finite")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        h.setflags(write=False)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class ResonanceMode:
    """One resonance. ``q`` is None when a half-power crossing fell off the grid;
    ``b1``/``b0``/``band`` are filled in by :func:`fit_resonance_sum`."""

    f_r: float
    q: float | None
    b1: float | None = None
    b0: float | None = None
    band: tuple[float, float] | None = None
    rms_rel_error: float | None = None

    def __post_init__(self):
        if not self.f_r > 0:
            raise ValueError("f_r must be > 0")
        if self.q is not None and not self.q > 0:
            raise ValueError("q must be > 0")
        if self.band is not None and not self.band[0] <= self.f_r <= self.band[1]:
            raise ValueError("fit band must contain f_r")

    @property
    def fitted(self) -> bool:
        return self.q is not None and self.b1 is not None and self.b0 is not None

    def response(self, f):
        if not self.fitted:
            raise ValueError(f"mode at {self.f_r} Hz has no fitted coefficients")
        w_r = 2 * np.pi * self.f_r
        s = 2j * np.pi * np.asarray(f, dtype=float)
        return (self.b1 * s + self.b0) / (s * s + (w_r / self.q) * s + w_r * w_r)


@dataclass(frozen=True)
class AmResponse:
    f_c: float
    f_m: float
    h_carrier: complex
    h_lower: complex
    h_upper: complex


def h_open_circuit(net: TwoPortNetwork) -> TransferFunction:
    """Coil voltage over excitation voltage with the coil unloaded: Z21/Z11."""
    _require_z(net)
    z11, z21 = net.param(1, 1), net.param(2, 1)
    bad = np.abs(z11) < Z11_FLOOR
    if np.any(bad):
        raise DivisionByZeroError(float(net.freq[np.argmax(bad)]))
    return TransferFunction(net.freq, z21 / z11, "OpenCircuit")


def h_short_circuit(net: TwoPortNetwork) -> TransferFunction:
    """Coil current over excitation voltage with the coil shorted (A/V)."""
    _require_z(net)
    z11, z12, z21, z22 = (net.param(1, 1), net.param(1, 2), net.param(2, 1), net.param(2, 2))
    a, b = z11 * z22, z12 * z21
    det = a - b
    bad = (det == 0) | (np.abs(det) <= DET_RTOL * (np.abs(a) + np.abs(b)))
    if np.any(bad):
        raise SingularDeterminant(float(net.freq[np.argmax(bad)]))
    return TransferFunction(net.freq, -z21 / det, "ShortCircuitTransadmittance")


def combine_output(h_oc: TransferFunction, h_sc: TransferFunction, u_res, i_coil) -> np.ndarray:
    """u_coil = H_oc*u_res + H_sc*i_coil at every grid point.

    The second product keeps the superposition as the sensor model writes it:
    H_sc is a transadmittance (A/V), so ``h_sc * i_coil`` is carried through
    numerically as the loaded-output correction in volts without any extra
    scaling. With ``i_coil = 0`` this is exactly ``h_oc * u_res``.
    """
    if h_oc.freq.shape != h_sc.freq.shape or not np.array_equal(h_oc.freq, h_sc.freq):
        raise GridMismatch("h_oc and h_sc are sampled on different grids")
    return h_oc.h * u_res + h_sc.h * i_coil


def _require_z(net):
    if net.kind != "Z":
        raise ValueError(f"expected a Z network, got {net.kind}")


# -- resonance detection ----------------------------------------------------

def _peak_indices(mag):
    """Interior local maxima; a flat top reports its lowest index."""
    starts = np.flatnonzero(np.r_[True, mag[1:] != mag[:-1]])
    v = mag[starts]
    if v.size < 3:
        return np.array([], dtype=int)
    inner = np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1
    return starts[inner]


def _crossing(f, mag, i_in, i_out, level):
    """Linear interpolation of the frequency where mag crosses ``level``
    between an inside sample ``i_in`` (>= level) and an outside one."""
    m0, m1 = mag[i_in], mag[i_out]
    t = (m0 - level) / (m0 - m1)
    return f[i_in] + t * (f[i_out] - f[i_in])


def _separate_lobes(mag, cands):
    """Keep candidates that dip below their own half-power level before
    reaching a taller kept peak; the rest are ripples on another lobe."""
    kept = []
    # tallest first; stable sort keeps lower frequency first on ties
    for p in sorted(cands, key=lambda k: -mag[k]):
        level = mag[p] / math.sqrt(2.0)
        pos = bisect.bisect_left(kept, p)
        same_lobe = False
        if pos > 0 and np.min(mag[kept[pos - 1]:p + 1]) >= level:
            same_lobe = True
        if pos < len(kept) and np.min(mag[p:kept[pos] + 1]) >= level:
            same_lobe = True
        if not same_lobe:
            kept.insert(pos, p)
    return kept


def detect_resonances(h: TransferFunction, prominence_db: float = 6.0) -> list[ResonanceMode]:
    """Peaks of |h| at least ``prominence_db`` above the median of |h|.

    A local maximum that does not fall below its half-power level before
    meeting a taller peak is treated as ripple on that peak, not a mode.
    Q is f_r over the half-power width. The search for each -3 dB crossing
    stops at the neighbouring reported peak; a crossing that is not found
    leaves ``q=None``.
    """
    f = h.freq
    if f.size < 5:
        raise ValueError("resonance detection needs at least 5 samples")
    mag = np.abs(h.h)
    floor = np.median(mag) * 10.0 ** (prominence_db / 20.0)
    cands = [int(p) for p in _peak_indices(mag) if mag[p] >= floor and mag[p] > 0]
    peaks = _separate_lobes(mag, cands)

    modes = []
    for n, p in enumerate(peaks):
        level = mag[p] / math.sqrt(2.0)
        lo_lim = peaks[n - 1] if n > 0 else 0
        hi_lim = peaks[n + 1] if n + 1 < len(peaks) else f.size - 1
        left = np.flatnonzero(mag[lo_lim:p] < level)
        right = np.flatnonzero(mag[p + 1:hi_lim + 1] < level)
        q = None
        if left.size and right.size:
            k_lo = lo_lim + left[-1]
            k_hi = p + 1 + right[0]
            f_lo = _crossing(f, mag, k_lo + 1, k_lo, level)
            f_hi = _crossing(f, mag, k_hi - 1, k_hi, level)
            q = float(f[p] / (f_hi - f_lo))
        modes.append(ResonanceMode(float(f[p]), q))
    return modes


# -- rational fitting -------------------------------------------------------

def _realify(a):
    return np.concatenate([a.real, a.imag], axis=0)


def _solve_scaled(A, b, index):
    """Least squares with column equilibration; rejects ill-conditioned systems."""
    Ar, br = _realify(A), _realify(b)
    norms = np.linalg.norm(Ar, axis=0)
    if np.any(norms == 0):
        raise IllConditionedFit(index, "degenerate design matrix")
    As = Ar / norms
    sv = np.linalg.svd(As, compute_uv=False)
    cond_normal = (sv[0] / sv[-1]) ** 2 if sv[-1] > 0 else math.inf
    if cond_normal > COND_LIMIT:
        raise IllConditionedFit(index, f"normal-equation condition number {cond_normal:.3g}")
    x, *_ = np.linalg.lstsq(As, br, rcond=None)
    return x / norms


def _levy(s, h, index):
    """Linearized fit in normalized s: b1 s + b0 - a1 s h - a0 h = s^2 h."""
    A = np.column_stack([s, np.ones_like(s), -s * h, -h])
    return _solve_scaled(A, s * s * h, index)


def _refine(s, h, p, index, max_iter=20, tol=1e-12):
    """Gauss-Newton on relative residuals (model - h)/h in normalized s."""
    for _ in range(max_iter):
        b1, b0, a1, a0 = p
        den = s * s + a1 * s + a0
        model = (b1 * s + b0) / den
        r = (model - h) / h
        J = np.column_stack([s / den, 1 / den, -model * s / den, -model / den]) / h[:, None]
        step = _solve_scaled(J, -r, index)
        p = p + step
        if np.max(np.abs(step) / np.maximum(np.abs(p), 1e-300)) < tol:
            break
    return p


def _bands(modes):
    out = []
    for n, m in enumerate(modes):
        half = BAND_WIDTHS * m.f_r / m.q
        lo, hi = m.f_r - half, m.f_r + half
        if n > 0:
            lo = max(lo, 0.5 * (modes[n - 1].f_r + m.f_r))
        if n + 1 < len(modes):
            hi = min(hi, 0.5 * (m.f_r + modes[n + 1].f_r))
        out.append((max(lo, 0.0), hi))
    return out


def fit_resonance_sum(h: TransferFunction, modes: Sequence[ResonanceMode],
                      max_sweeps: int = 30, tol: float = 1e-10) -> list[ResonanceMode]:
    """Fit one second-order section per detected mode.

    Each mode is fitted on its own band: a Levy linearization gives the
    starting point, then Gauss-Newton polishes the relative residual. Later
    sweeps refit each band against ``h`` minus the other fitted sections, so
    the sum (not each term alone) matches the data. Modes without a Q are
    skipped. Returned modes carry the band and the RMS relative error of the
    full sum over that band.
    """
    usable = sorted((m for m in modes if m.q is not None), key=lambda m: m.f_r)
    if not usable:
        return []
    bands = _bands(usable)
    f = h.freq
    sel, s_norm, w_ref = [], [], []
    for n, (m, (lo, hi)) in enumerate(zip(usable, bands)):
        idx = np.flatnonzero((f >= lo) & (f <= hi))
        if idx.size < MIN_BAND_SAMPLES:
            raise ValueError(f"mode {n} band [{lo:.6g}, {hi:.6g}] Hz holds {idx.size} samples, "
                             f"need {MIN_BAND_SAMPLES}")
        sel.append(idx)
        w_ref.append(2 * np.pi * m.f_r)
        s_norm.append(1j * f[idx] / m.f_r)

    params = [None] * len(usable)
    for sweep in range(max_sweeps):
        worst = 0.0
        for n, idx in enumerate(sel):
            target = h.h[idx].copy()
            for k, p in enumerate(params):
                if k != n and p is not None:
                    target -= _eval_norm(p, 1j * f[idx] / usable[k].f_r)
            if np.any(target == 0):
                raise IllConditionedFit(n, "zero target sample inside the fit band")
            p0 = params[n] if params[n] is not None else _levy(s_norm[n], target, n)
            p1 = _refine(s_norm[n], target, p0, n)
            if params[n] is not None:
                worst = max(worst, float(np.max(np.abs(p1 - p0) / np.maximum(np.abs(p1), 1e-300))))
            else:
                worst = math.inf
            params[n] = p1
        if len(usable) == 1 or worst < tol:
            break

    fitted = []
    for n, p in enumerate(params):
        b1, b0, a1, a0 = p
        if not (a0 > 0 and a1 > 0):
            raise IllConditionedFit(n, "fit produced an unstable or non-resonant section (q <= 0)")
        w = w_ref[n]
        w_r = math.sqrt(a0) * w
        fitted.append(ResonanceMode(
            f_r=w_r / (2 * np.pi), q=math.sqrt(a0) / a1, b1=float(b1 * w), b0=float(b0 * w * w)))

    out = []
    for n, (m, idx) in enumerate(zip(fitted, sel)):
        band = (float(f[idx[0]]), float(f[idx[-1]]))
        band = (min(band[0], m.f_r), max(band[1], m.f_r))
        err = evaluate_fitted(fitted, f[idx]) - h.h[idx]
        rms = float(np.sqrt(np.mean(np.abs(err / h.h[idx]) ** 2)))
        out.append(replace(m, band=band, rms_rel_error=rms))
    return out


def _eval_norm(p, s):
    b1, b0, a1, a0 = p
    return (b1 * s + b0) / (s * s + a1 * s + a0)


def evaluate_fitted(modes: Sequence[ResonanceMode], f):
    """Sum of the fitted sections at frequency ``f`` (scalar or array, Hz)."""
    f = np.asarray(f, dtype=float)
    total = np.zeros(f.shape, dtype=complex)
    for m in modes:
        total = total + m.response(f)
    return complex(total) if total.ndim == 0 else total


def fitted_transfer(modes, freq) -> TransferFunction:
    return TransferFunction(freq, evaluate_fitted(modes, as_grid(freq)), "FittedSum")


def am_response(source, f_c: float, f_m: float) -> AmResponse:
    """Gains at the carrier and both sidebands f_c -/+ f_m.

    ``source`` is either a list of fitted modes (model evaluation) or a
    sampled :class:`TransferFunction` (linear interpolation of re/im).
    """
    if not (f_m > 0 and f_c > f_m):
        raise ValueError("need f_c > f_m > 0")
    pts = np.array([f_c - f_m, f_c, f_c + f_m])
    if isinstance(source, TransferFunction):
        lo, hi = source.freq[0], source.freq[-1]
        for x in pts:
            if x < lo or x > hi:
                raise OutOfGrid(float(x), float(lo), float(hi))
        vals = (np.interp(pts, source.freq, source.h.real)
                + 1j * np.interp(pts, source.freq, source.h.imag))
    else:
        vals = evaluate_fitted(list(source), pts)
    lower, carrier, upper = (complex(v) for v in vals)
    return AmResponse(float(f_c), float(f_m), carrier, lower, upper)


# -- reports ----------------------------------------------------------------

TF_CSV_HEADER = "freq_hz,h_re,h_im,h_mag_db,h_phase_deg"
_DB_FLOOR = -999.0


def tf_csv(tf: TransferFunction) -> str:
    lines = [TF_CSV_HEADER]
    mag = np.abs(tf.h)
    with np.errstate(divide="ignore"):
        db = np.where(mag > 0, 20 * np.log10(np.where(mag > 0, mag, 1.0)), _DB_FLOOR)
    ph = np.degrees(np.angle(tf.h))
    for k, f in enumerate(tf.freq):
        v = tf.h[k]
        lines.append(",".join(fmt(x) for x in (f, v.real, v.imag, db[k], ph[k])))
    return "\n".join(lines) + "\n"


def mode_record(m: ResonanceMode) -> dict:
    return {
        "f_r_hz": m.f_r,
        "q": m.q,
        "b1": m.b1,
        "b0": m.b0,
        "band_lo_hz": m.band[0] if m.band else None,
        "band_hi_hz": m.band[1] if m.band else None,
        "rms_rel_error": m.rms_rel_error,
    }


def am_record(am: AmResponse) -> dict:
    def c(z):
        return {"re": z.real + 0.0, "im": z.imag + 0.0, "mag": abs(z)}
    return {"f_c_hz": am.f_c, "f_m_hz": am.f_m, "carrier": c(am.h_carrier),
            "lower": c(am.h_lower), "upper": c(am.h_upper)}


def modes_json(modes: Sequence[ResonanceMode]) -> str:
    return json.dumps([mode_record(m) for m in modes], indent=2) + "\n"
