"""Output-referred noise of a non-inverting amplifier reading out the sensor.

With gain Av = 1 + R2/R1, sensor output impedance Z and flat op-amp
densities e_n, i_n, the output PSD (V^2/Hz) is the sum of

    thermal  4kT * Av * (R2 + Re{Z} * Av)
    current  i_n^2 * (R2^2 + |Z|^2 * Av^2)
    voltage  e_n^2 * Av^2

The thermal term equals 4kT * ((R1 || R2) + Re{Z}) * Av^2, because
Av * R2 == (R1 || R2) * Av^2. Input-referred figures are the same PSDs
divided by Av^2.

Only |Z_sen| ~ 15.8 kOhm at the 448 kHz U1 mode is known for the reference
sensor. A thermal contribution of 8 nV/rtHz (input-referred) would need
Re{Z_sen} of about 3.85 kOhm; that is an inference, not measured data.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from importlib import resources

BOLTZMANN = 1.380649e-23  # J/K, exact SI value
DEFAULT_TEMPERATURE = 300.0


@dataclass(frozen=True)
class OpAmpNoiseSpec:
    name: str
    e_n: float  # V/rtHz
    i_n: float  # A/rtHz

    def __post_init__(self):
        if not (self.e_n > 0 and self.i_n > 0):
            raise ValueError(f"{self.name}: e_n and i_n must be > 0")


@dataclass(frozen=True)
class ReadoutCircuit:
    r1: float
    r2: float
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        if not self.r1 > 0:
            raise ValueError("r1 must be > 0")
        if not self.r2 >= 0:
            raise ValueError("r2 must be >= 0")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0 K")


TERMS = ("thermal", "current", "voltage")


@dataclass(frozen=True)
class NoiseBudget:
    """Per-term PSDs (V^2/Hz) at one frequency, output- and input-referred.

    Input-referred terms are evaluated from their own closed forms rather
    than by dividing by Av^2, so e.g. the voltage term is exactly e_n^2.
    """

    f: float | None
    av: float
    psd_thermal: float
    psd_current: float
    psd_voltage: float
    psd_total: float
    in_thermal: float
    in_current: float
    in_voltage: float
    in_total: float

    @property
    def asd_total(self) -> float:
        return math.sqrt(self.psd_total)

    def psd(self, term: str, referral: str = "out") -> float:
        if referral == "out":
            return getattr(self, f"psd_{term}")
        if referral == "in":
            return getattr(self, f"in_{term}")
        raise ValueError(f"referral must be 'in' or 'out', got {referral!r}")

    def asd(self, term: str, referral: str = "out") -> float:
        return math.sqrt(self.psd(term, referral))

    def report(self, referral: str = "out") -> dict:
        names = TERMS + ("total",)
        return {
            "f_hz": self.f,
            "referral": referral,
            "psd": {t: self.psd(t, referral) for t in names},
            "asd": {t: self.asd(t, referral) for t in names},
        }


def gain(c: ReadoutCircuit) -> float:
    return 1.0 + c.r2 / c.r1


def noise_psd(c: ReadoutCircuit, a: OpAmpNoiseSpec, z_sen: complex, f: float | None = None) -> NoiseBudget:
    """Noise budget of the readout for sensor output impedance ``z_sen`` (ohm).

    ``f`` is carried along for reporting only; the op-amp densities are flat.
    """
    z_sen = complex(z_sen)
    if not (math.isfinite(z_sen.real) and math.isfinite(z_sen.imag)):
        raise ValueError("z_sen must be finite")
    av = gain(c)
    four_kt = 4.0 * BOLTZMANN * c.temperature
    mag2 = abs(z_sen) ** 2
    thermal = four_kt * av * (c.r2 + z_sen.real * av)
    current = a.i_n ** 2 * (c.r2 ** 2 + mag2 * av ** 2)
    voltage = a.e_n ** 2 * av ** 2
    thermal_in = four_kt * (c.r2 / av + z_sen.real)
    current_in = a.i_n ** 2 * ((c.r2 / av) ** 2 + mag2)
    voltage_in = a.e_n ** 2
    return NoiseBudget(f, av, thermal, current, voltage, thermal + current + voltage,
                       thermal_in, current_in, voltage_in, thermal_in + current_in + voltage_in)


def quadrature_total(contributions) -> float:
    vals = [float(v) for v in contributions]
    if any(not v >= 0 for v in vals):
        raise ValueError("noise contributions must be >= 0")
    return math.hypot(*vals)


def opamp_figure(a: OpAmpNoiseSpec) -> float:
    """Source resistance e_n/i_n at which voltage and current noise are equal."""
    return a.e_n / a.i_n


class Dominance(str, enum.Enum):
    VOLTAGE = "VoltageDominated"
    CURRENT = "CurrentDominated"
    THERMAL = "ThermalDominated"


_TERM_DOMINANCE = {"thermal": Dominance.THERMAL, "current": Dominance.CURRENT, "voltage": Dominance.VOLTAGE}


@dataclass(frozen=True)
class DominanceReport:
    dominant: Dominance
    fractions: dict  # term -> share of the total PSD

    def as_dict(self) -> dict:
        return {"dominant": self.dominant.value, "fractions": dict(self.fractions)}


def dominance_report(a: OpAmpNoiseSpec, z_sen: complex, c: ReadoutCircuit) -> DominanceReport:
    b = noise_psd(c, a, z_sen)
    parts = {t: b.psd(t) for t in TERMS}
    # ties resolve in TERMS order
    top = max(TERMS, key=lambda t: parts[t])
    total = b.psd_total
    fractions = {t: (parts[t] / total if total > 0 else 0.0) for t in TERMS}
    return DominanceReport(_TERM_DOMINANCE[top], fractions)


# -- presets ----------------------------------------------------------------

def load_presets(path=None) -> dict:
    """Read op-amp preset records ``{name, e_n_v_rthz, i_n_a_rthz}``.

    Missing figures are kept as ``None``; :func:`get_opamp` refuses to use
    them without explicit values.
    """
    if path is None:
        text = resources.files("cmetwoport").joinpath("data/opamps.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    out = {}
    for rec in json.loads(text):
        out[rec["name"]] = (rec.get("e_n_v_rthz"), rec.get("i_n_a_rthz"))
    return out


def get_opamp(name: str, e_n: float | None = None, i_n: float | None = None,
              presets: dict | None = None) -> OpAmpNoiseSpec:
    presets = load_presets() if presets is None else presets
    if name not in presets:
        raise KeyError(f"unknown op-amp preset {name!r}; known: {', '.join(sorted(presets))}")
    pe, pi = presets[name]
    e_n = pe if e_n is None else e_n
    i_n = pi if i_n is None else i_n
    if e_n is None or i_n is None:
        raise ValueError(f"preset {name!r} has no noise figures; supply e_n and i_n explicitly")
    return OpAmpNoiseSpec(name, float(e_n), float(i_n))
