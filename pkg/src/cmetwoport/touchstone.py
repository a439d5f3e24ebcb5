"""Touchstone v1 (.s2p) reader/writer and Z-sweep CSV/JSON files.

Z-format Touchstone data is read as raw ohms by default. Pass
``z_normalized=True`` to treat it as normalized to the option-line R value
(the other common reading of the v1 standard).

Z-sweep CSV columns::

    freq_hz,z11_re,z11_im,z12_re,z12_im,z21_re,z21_im,z22_re,z22_im

The JSON mirror is a list of ``{"freq_hz": f, "z11": {"re": .., "im": ..}, ...}``
records in grid order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    NonMonotonicFrequency,
    SweepFormatError,
    TouchstoneSyntaxError,
    UnsupportedPortCount,
)
from .fmt import fmt
from .network import TwoPortNetwork

FREQ_SCALE = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_UNIT_NAME = {"HZ": "Hz", "KHZ": "kHz", "MHZ": "MHz", "GHZ": "GHz"}
FORMATS = ("RI", "MA", "DB")
# column order of a v1 2-port row
_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))
_DB_FLOOR = -999.0

Z_CSV_HEADER = "freq_hz,z11_re,z11_im,z12_re,z12_im,z21_re,z21_im,z22_re,z22_im"
_Z_KEYS = ("z11", "z12", "z21", "z22")
_Z_IDX = {"z11": (0, 0), "z12": (0, 1), "z21": (1, 0), "z22": (1, 1)}


@dataclass(frozen=True)
class TouchstoneOptions:
    freq_unit: str = "GHz"
    param: str = "S"
    format: str = "MA"
    z_ref: float = 50.0

    def __post_init__(self):
        unit = self.freq_unit.upper()
        if unit not in FREQ_SCALE:
            raise ValueError(f"unknown frequency unit {self.freq_unit!r}")
        object.__setattr__(self, "freq_unit", _UNIT_NAME[unit])
        object.__setattr__(self, "param", self.param.upper())
        object.__setattr__(self, "format", self.format.upper())
        if self.param not in ("S", "Z"):
            raise ValueError(f"unsupported parameter type {self.param!r}")
        if self.format not in FORMATS:
            raise ValueError(f"unknown data format {self.format!r}")
        if not (math.isfinite(self.z_ref) and self.z_ref > 0):
            raise ValueError("z_ref must be finite and > 0")

    @property
    def scale(self) -> float:
        return FREQ_SCALE[self.freq_unit.upper()]

    def option_line(self) -> str:
        return f"# {self.freq_unit.upper()} {self.param} {self.format} R {fmt(self.z_ref)}"


def _cis_deg(mag, deg):
    """mag * exp(j*deg), exact on the axes so (1, 90) gives exactly 1j."""
    q, r = divmod(deg, 90.0)
    if r == 0.0:
        return mag * (1, 1j, -1, -1j)[int(q) % 4]
    th = math.radians(deg)
    return complex(mag * math.cos(th), mag * math.sin(th))


def _decode(a, b, form):
    if form == "RI":
        return complex(a, b)
    if form == "MA":
        return _cis_deg(a, b)
    return _cis_deg(10.0 ** (a / 20.0), b)


def _encode(z, form):
    if form == "RI":
        return z.real, z.imag
    mag = abs(z)
    ang = math.degrees(math.atan2(z.imag, z.real)) if mag else 0.0
    if form == "MA":
        return mag, ang
    return (20.0 * math.log10(mag) if mag else _DB_FLOOR), ang


def _parse_options(tokens, lineno):
    kw = {}
    it = iter(tokens)
    for tok in it:
        t = tok.upper()
        if t in FREQ_SCALE:
            kw["freq_unit"] = t
        elif t in ("S", "Z"):
            kw["param"] = t
        elif t in ("Y", "H", "G"):
            raise TouchstoneSyntaxError(lineno, f"parameter type {t} is not supported (S or Z only)")
        elif t in FORMATS:
            kw["format"] = t
        elif t == "R":
            val = next(it, None)
            try:
                kw["z_ref"] = float(val)
            except (TypeError, ValueError):
                raise TouchstoneSyntaxError(lineno, "option 'R' needs a numeric reference impedance") from None
        else:
            raise TouchstoneSyntaxError(lineno, f"unknown option token {tok!r}")
    try:
        return TouchstoneOptions(**kw)
    except ValueError as exc:
        raise TouchstoneSyntaxError(lineno, str(exc)) from None


def _port_count_from_name(name):
    ext = os.path.splitext(str(name))[1].lower()
    if len(ext) >= 4 and ext[1] == "s" and ext[-1] == "p" and ext[2:-1].isdigit():
        return int(ext[2:-1])
    return None


def parse_touchstone(text, *, z_normalized=False, name=None):
    """Parse a Touchstone v1 2-port file.

    ``text`` may be ``str`` or ``bytes``. ``name`` (a filename) is only used to
    reject other port counts by extension. Returns ``(options, network)``.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    if name is not None:
        nports = _port_count_from_name(name)
        if nports is not None and nports != 2:
            raise UnsupportedPortCount(0, f"{nports}-port file; only 2-port data is supported")

    opts = None
    freqs, rows = [], []
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            kw = line.split("]", 1)[0] + "]"
            raise TouchstoneSyntaxError(lineno, f"Touchstone v2 keyword {kw} is not supported (v1 only)")
        if line.startswith("#"):
            if opts is not None:
                raise TouchstoneSyntaxError(lineno, "duplicate option line")
            if freqs:
                raise TouchstoneSyntaxError(lineno, "option line must precede the data")
            opts = _parse_options(line[1:].split(), lineno)
            continue
        tokens = line.split()
        if len(tokens) != 9:
            if len(tokens) in (3, 7):
                raise UnsupportedPortCount(
                    lineno, f"{len(tokens)} columns look like {(len(tokens) - 1) // 2}-port data; expected 9")
            raise TouchstoneSyntaxError(lineno, f"expected 9 numeric columns, got {len(tokens)}")
        try:
            vals = [float(t) for t in tokens]
        except ValueError:
            bad = next(t for t in tokens if not _is_float(t))
            raise TouchstoneSyntaxError(lineno, f"non-numeric value {bad!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise TouchstoneSyntaxError(lineno, "non-finite value")
        freqs.append((vals[0], lineno))
        rows.append(vals[1:])

    if opts is None:
        opts = TouchstoneOptions()
    if not rows:
        raise TouchstoneSyntaxError(max(lineno, 1), "no network data found")

    scale = opts.scale
    f = np.array([v * scale for v, _ in freqs])
    if f[0] <= 0:
        raise TouchstoneSyntaxError(freqs[0][1], "frequency must be > 0")
    for k in range(1, f.size):
        if f[k] <= f[k - 1]:
            raise NonMonotonicFrequency(freqs[k][1])

    m = np.empty((f.size, 2, 2), dtype=complex)
    for k, vals in enumerate(rows):
        for p, (i, j) in enumerate(_ORDER):
            m[k, i, j] = _decode(vals[2 * p], vals[2 * p + 1], opts.format)

    if opts.param == "Z" and z_normalized:
        m *= opts.z_ref
    net = TwoPortNetwork(opts.param, f, m, z_ref=opts.z_ref)
    return opts, net


def _is_float(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_touchstone(path, *, z_normalized=False):
    with open(path, "rb") as fh:
        return parse_touchstone(fh.read(), z_normalized=z_normalized, name=path)


def write_touchstone(net: TwoPortNetwork, opts: TouchstoneOptions | None = None,
                     *, z_normalized=False, comments=()) -> str:
    """Serialize ``net`` as Touchstone v1 text.

    With no ``opts`` the v1 defaults are written explicitly (GHz, MA, R 50),
    except that the parameter letter and R follow the network.
    """
    if opts is None:
        opts = TouchstoneOptions(param=net.kind, z_ref=net.z_ref or 50.0)
    if opts.param != net.kind:
        raise ValueError(f"options say {opts.param} but the network holds {net.kind} parameters")
    if net.kind == "S" and opts.z_ref != net.z_ref:
        raise ValueError(f"S data is referenced to {net.z_ref} ohm, options say {opts.z_ref}")

    m = net.matrices
    if net.kind == "Z" and z_normalized:
        m = m / opts.z_ref
    out = [f"! {c}" for c in comments]
    out.append(opts.option_line())
    for k, f in enumerate(net.freq):
        cols = [fmt(f / opts.scale)]
        for i, j in _ORDER:
            a, b = _encode(complex(m[k, i, j]), opts.format)
            cols += [fmt(a), fmt(b)]
        out.append(" ".join(cols))
    return "\n".join(out) + "\n"


def export_z_csv(net: TwoPortNetwork) -> str:
    if net.kind != "Z":
        raise ValueError("export_z_csv needs a Z network")
    lines = [Z_CSV_HEADER]
    for k, f in enumerate(net.freq):
        cols = [fmt(f)]
        for key in _Z_KEYS:
            v = net.matrices[k][_Z_IDX[key]]
            cols += [fmt(v.real), fmt(v.imag)]
        lines.append(",".join(cols))
    return "\n".join(lines) + "\n"


def export_z_json(net: TwoPortNetwork) -> str:
    if net.kind != "Z":
        raise ValueError("export_z_json needs a Z network")
    records = []
    for k, f in enumerate(net.freq):
        rec = {"freq_hz": float(f)}
        for key in _Z_KEYS:
            v = net.matrices[k][_Z_IDX[key]]
            rec[key] = {"re": float(v.real) + 0.0, "im": float(v.imag) + 0.0}
        records.append(rec)
    return json.dumps(records, indent=1) + "\n"


def _rows(text):
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        yield lineno, [c.strip() for c in row]


def _float_cells(lineno, row, ncols):
    if len(row) != ncols:
        raise SweepFormatError(lineno, f"expected {ncols} columns, got {len(row)}")
    try:
        vals = [float(c) for c in row]
    except ValueError:
        raise SweepFormatError(lineno, "non-numeric cell") from None
    if not all(math.isfinite(v) for v in vals):
        raise SweepFormatError(lineno, "non-finite cell")
    return vals


def read_z_csv(text, z_ref=None) -> TwoPortNetwork:
    rows = _rows(text)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise SweepFormatError(None, "empty file") from None
    if ",".join(h.lower() for h in header) != Z_CSV_HEADER:
        raise SweepFormatError(lineno, f"expected header {Z_CSV_HEADER!r}")
    freqs, mats = [], []
    for lineno, row in rows:
        v = _float_cells(lineno, row, 9)
        freqs.append(v[0])
        mats.append([[complex(v[1], v[2]), complex(v[3], v[4])],
                     [complex(v[5], v[6]), complex(v[7], v[8])]])
    return _sweep_network(freqs, mats, z_ref)


def read_z_json(text, z_ref=None) -> TwoPortNetwork:
    try:
        records = json.loads(text)
        freqs = [float(r["freq_hz"]) for r in records]
        mats = [[[complex(r[a]["re"], r[a]["im"]) for a in pair] for pair in (("z11", "z12"), ("z21", "z22"))]
                for r in records]
    except (ValueError, KeyError, TypeError) as exc:
        raise SweepFormatError(None, f"bad Z-sweep JSON: {exc}") from None
    return _sweep_network(freqs, mats, z_ref)


def _sweep_network(freqs, mats, z_ref):
    if not freqs:
        raise SweepFormatError(None, "no data rows")
    try:
        return TwoPortNetwork("Z", freqs, mats, z_ref=z_ref)
    except ValueError as exc:
        raise SweepFormatError(None, str(exc)) from None


def read_impedance_csv(text):
    """One-port impedance sweep for equivalent-circuit fitting.

    Accepts ``freq_hz,z_re,z_im`` or a full Z-sweep CSV (Z11 is used).
    Returns ``(freq, z)`` arrays.
    """
    rows = _rows(text)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise SweepFormatError(None, "empty file") from None
    cols = [h.lower() for h in header]
    if cols == ["freq_hz", "z_re", "z_im"]:
        pick = (1, 2)
    elif ",".join(cols) == Z_CSV_HEADER:
        pick = (1, 2)
    else:
        raise SweepFormatError(lineno, "expected header 'freq_hz,z_re,z_im' or a Z-sweep header")
    f, z = [], []
    for lineno, row in rows:
        v = _float_cells(lineno, row, len(cols))
        f.append(v[0])
        z.append(complex(v[pick[0]], v[pick[1]]))
    return np.array(f), np.array(z, dtype=complex)


def write_impedance_csv(freq, z) -> str:
    lines = ["freq_hz,z_re,z_im"]
    for f, v in zip(freq, z):
        lines.append(f"{fmt(f)},{fmt(v.real)},{fmt(v.imag)}")
    return "\n".join(lines) + "\n"
