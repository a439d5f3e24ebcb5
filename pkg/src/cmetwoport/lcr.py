"""Series-R plus parallel-LC equivalent circuit: evaluation and fitting.

    Z(w) = R + j*w*L / (1 - w**2*L*C)

The tank is lossless, so Re Z == R at every frequency and the reactance
changes sign once, at the pole 1/(2*pi*sqrt(L*C)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSweep, PoleSingularity
from .network import as_grid

POLE_RTOL = 1e-12


@dataclass(frozen=True)
class LcrModel:
    r: float
    l: float
    c: float

    def __post_init__(self):
        if not (self.r >= 0 and self.l > 0 and self.c > 0):
            raise ValueError(f"need r >= 0, l > 0, c > 0; got {self}")


@dataclass(frozen=True)
class ImpedanceSweep:
    freq: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        freq = as_grid(self.freq)
        z = np.array(self.z, dtype=complex, ndmin=1)
        if z.shape != freq.shape:
            raise ValueError("one impedance sample per frequency is required")
        if not np.all(np.isfinite(z)):
            raise ValueError("impedance samples must be finite")
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class LcrFit:
    model: LcrModel
    rms_rel_residual: float
    converged: bool
    iterations: int

    def report(self) -> dict:
        m = self.model
        return {
            "r_ohm": m.r,
            "l_h": m.l,
            "c_f": m.c,
            "f0_hz": lcr_resonance(m),
            "rms_rel_residual": self.rms_rel_residual,
            "converged": self.converged,
        }


def lcr_resonance(m: LcrModel) -> float:
    return 1.0 / (2 * math.pi * math.sqrt(m.l * m.c))


def lcr_impedance(m: LcrModel, f):
    """Impedance at ``f`` Hz (scalar or array). Raises at the ideal pole."""
    f = np.asarray(f, dtype=float)
    f0 = lcr_resonance(m)
    hit = np.abs(f / f0 - 1.0) < POLE_RTOL
    if np.any(hit):
        raise PoleSingularity(float(np.atleast_1d(f)[np.argmax(np.atleast_1d(hit))]))
    w = 2 * np.pi * f
    x = w * m.l / (1.0 - w * w * m.l * m.c)
    z = m.r + 1j * x
    return complex(z) if np.ndim(z) == 0 else z


def _residual(theta, w, z, absz):
    r, l, c = np.exp(theta)
    d = 1.0 - w * w * l * c
    x = w * l / d
    res = (r + 1j * x - z) / absz
    # d/dlog(p) of the model, column per parameter
    jac = np.column_stack([
        np.full(w.shape, r, dtype=complex),
        1j * (w * l / (d * d)),
        1j * (w ** 3 * l * l * c / (d * d)),
    ]) / absz[:, None]
    return np.concatenate([res.real, res.imag]), np.concatenate([jac.real, jac.imag])


def _initial_guess(f, z):
    w = 2 * np.pi * f
    re_med = float(np.median(z.real))
    r0 = re_med if re_med > 0 else float(np.min(np.abs(z)))
    # 1/X = (1/L)(1/w) - C*w is linear in (1/L, C)
    x = z.imag
    ok = np.abs(x) > 0
    if np.count_nonzero(ok) >= 2:
        A = np.column_stack([1.0 / w[ok], -w[ok]])
        (inv_l, c0), *_ = np.linalg.lstsq(A, 1.0 / x[ok], rcond=None)
        if inv_l > 0 and c0 > 0:
            return r0, 1.0 / inv_l, c0
    # fallback: peak of |Z| as the pole and the low-frequency reactance slope
    f0 = f[np.argmax(np.abs(z))]
    l0 = abs(x[0]) / w[0] if x[0] != 0 else 1e-6
    c0 = 1.0 / ((2 * np.pi * f0) ** 2 * l0)
    return r0, l0, c0


def fit_lcr(sweep: ImpedanceSweep, max_iter: int = 200, xtol: float = 1e-9) -> LcrFit:
    """Levenberg-Marquardt fit of (R, L, C) to an impedance sweep.

    Residuals are relative, (Z_model - Z)/|Z|, and the parameters are
    optimized in log space so they stay positive. Hitting ``max_iter``
    returns the best iterate with ``converged=False``.
    """
    f, z = sweep.freq, sweep.z
    if f.size < 10:
        raise ValueError(f"LCR fit needs at least 10 points, got {f.size}")
    if f[-1] < 2 * f[0]:
        raise ValueError("LCR fit needs a sweep spanning at least a factor of 2 in frequency")
    absz = np.abs(z)
    if np.any(absz == 0):
        raise DegenerateSweep("sweep contains zero impedance samples")
    if (absz.max() - absz.min()) < 0.01 * absz.max():
        raise DegenerateSweep("|Z| varies by less than 1% over the sweep")

    w = 2 * np.pi * f
    theta = np.log(_initial_guess(f, z))
    res, jac = _residual(theta, w, z, absz)
    cost = float(res @ res)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = jac.T @ res
        jtj = jac.T @ jac
        a = jtj + lam * np.diag(np.diag(jtj))
        try:
            step = np.linalg.solve(a, -g)
        except np.linalg.LinAlgError:
            lam *= 10
            continue
        if np.max(np.abs(step)) < xtol:
            converged = True
            break
        trial = theta + step
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            res_t, jac_t = _residual(trial, w, z, absz)
        cost_t = float(res_t @ res_t)
        if np.isfinite(cost_t) and cost_t < cost:
            theta, res, jac, cost = trial, res_t, jac_t, cost_t
            lam /= 10
        else:
            lam *= 10
            if lam > 1e16:
                # stuck: no descent direction left at working precision
                break
    r, l, c = (float(v) for v in np.exp(theta))
    rms = math.sqrt(cost / f.size)
    return LcrFit(LcrModel(r, l, c), rms, converged, it)
