"""Two-port network containers and S <-> Z conversion.

Parameters are stored as an ``(N, 2, 2)`` complex array indexed
``[k, row, col]`` so ``m[:, 1, 0]`` is the forward term (S21 or Z21).
Everything is evaluated on the imaginary axis s = j*2*pi*f.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import SingularConversion

Kind = Literal["S", "Z"]

# |det(M)| <= SINGULAR_RTOL * ||M||_F**2 counts as singular
SINGULAR_RTOL = 1e-12


def as_grid(points) -> np.ndarray:
    """Validate a frequency grid (Hz) and return it as a read-only float array."""
    f = np.array(points, dtype=float, ndmin=1)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("frequency grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise ValueError("frequency grid points must be finite and > 0")
    if f.size > 1 and np.any(np.diff(f) <= 0):
        raise ValueError("frequency grid must be strictly increasing")
    f.setflags(write=False)
    return f


@dataclass(frozen=True)
class TwoPortNetwork:
    """Per-frequency 2x2 S (unitless) or Z (ohm) matrices.

    ``z_ref`` is the common real reference impedance of both ports. It is
    required for S data and kept as metadata on Z data produced by
    :func:`s_to_z`.
    """

    kind: Kind
    freq: np.ndarray
    matrices: np.ndarray
    z_ref: float | None = None

    def __post_init__(self):
        if self.kind not in ("S", "Z"):
            raise ValueError(f"kind must be 'S' or 'Z', got {self.kind!r}")
        freq = as_grid(self.freq)
        m = np.array(self.matrices, dtype=complex)
        if m.shape != (freq.size, 2, 2):
            raise ValueError(f"matrices must have shape ({freq.size}, 2, 2), got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("network parameters must be finite")
        if self.kind == "S" and (self.z_ref is None or not self.z_ref > 0):
            raise ValueError("S networks need a reference impedance z_ref > 0")
        if self.z_ref is not None and not (np.isfinite(self.z_ref) and self.z_ref > 0):
            raise ValueError("z_ref must be finite and > 0")
        m.setflags(write=False)
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "matrices", m)
        if self.z_ref is not None:
            object.__setattr__(self, "z_ref", float(self.z_ref))

    def __len__(self):
        return self.freq.size

    def param(self, i: int, j: int) -> np.ndarray:
        """1-based accessor, ``net.param(2, 1)`` is S21/Z21 over the grid."""
        return self.matrices[:, i - 1, j - 1]


@dataclass(frozen=True)
class PortSignals:
    u_res: complex
    u_coil: complex
    i_res: complex
    i_coil: complex


def _det(m):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def _inv_checked(m, freq):
    """Batched 2x2 inverse via the adjugate; raises on the first singular point."""
    det = _det(m)
    scale = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    bad = np.abs(det) <= SINGULAR_RTOL * scale
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SingularConversion(float(freq[k]), f"|det| = {abs(det[k]):.3g}")
    adj = np.empty_like(m)
    adj[..., 0, 0] = m[..., 1, 1]
    adj[..., 1, 1] = m[..., 0, 0]
    adj[..., 0, 1] = -m[..., 0, 1]
    adj[..., 1, 0] = -m[..., 1, 0]
    return adj / det[..., None, None]


def s_to_z(net: TwoPortNetwork) -> TwoPortNetwork:
    """Z = z_ref (I + S)(I - S)^-1, evaluated point by point."""
    if net.kind != "S":
        raise ValueError(f"s_to_z expects an S network, got {net.kind}")
    eye = np.eye(2)
    s = net.matrices
    z = net.z_ref * ((eye + s) @ _inv_checked(eye - s, net.freq))
    return TwoPortNetwork("Z", net.freq, z, z_ref=net.z_ref)


def z_to_s(net: TwoPortNetwork, z_ref: float | None = None) -> TwoPortNetwork:
    """S = (Z - z_ref I)(Z + z_ref I)^-1.

    ``z_ref`` defaults to the reference recorded on ``net``; one of the two
    must be present.
    """
    if net.kind != "Z":
        raise ValueError(f"z_to_s expects a Z network, got {net.kind}")
    z0 = net.z_ref if z_ref is None else float(z_ref)
    if z0 is None or not z0 > 0:
        raise ValueError("z_to_s needs a reference impedance > 0")
    eye = np.eye(2)
    z = net.matrices
    s = (z - z0 * eye) @ _inv_checked(z + z0 * eye, net.freq)
    return TwoPortNetwork("S", net.freq, s, z_ref=z0)


def solve_ports(z, i_res, i_coil) -> PortSignals:
    """Port voltages from port currents through one 2x2 impedance matrix."""
    z = np.asarray(z, dtype=complex)
    u_res = z[0, 0] * i_res + z[0, 1] * i_coil
    u_coil = z[1, 0] * i_res + z[1, 1] * i_coil
    return PortSignals(complex(u_res), complex(u_coil), complex(i_res), complex(i_coil))
