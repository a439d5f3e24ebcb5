"""Regenerate the synthetic fixtures under tests/data.

All files are synthetic; none of them is instrument data. Run from the repo
root:  python scripts/make_golden.py
"""

from pathlib import Path

import numpy as np

from cmetwoport.network import TwoPortNetwork, s_to_z, z_to_s
from cmetwoport.synthetic import bandpass_mode, lcr_sweep, sensor_network
from cmetwoport.touchstone import (
    TouchstoneOptions,
    export_z_csv,
    parse_touchstone,
    write_impedance_csv,
    write_touchstone,
)

OUT = Path(__file__).resolve().parents[1] / "tests" / "data"
NOTE = "SYNTHETIC data generated by scripts/make_golden.py, not a measurement"
RI_HZ = TouchstoneOptions("Hz", "S", "RI", 50.0)

# two U-modes; the second one is weaker and inverted in sign
MODES = [bandpass_mode(448e3, 100, 0.05, 0.1), bandpass_mode(650e3, 80, -0.02, 0.0)]


def s2p(name, net, comments=()):
    (OUT / name).write_text(write_touchstone(net, RI_HZ, comments=(NOTE, *comments)))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    f = np.arange(400e3, 700e3 + 1, 500.0)

    sensor = z_to_s(sensor_network(f, MODES), 50.0)
    s2p("synthetic_sensor.s2p", sensor, [
        "modes: 448 kHz q=100 and 650 kHz q=80, Z11 = 998 ohm + j w 998 uH"])
    # golden convert output is produced from the file as written
    _, parsed = parse_touchstone((OUT / "synthetic_sensor.s2p").read_text())
    (OUT / "synthetic_sensor.z.csv").write_text(export_z_csv(s_to_z(parsed)))

    coarse = f[::50]
    s2p("flat_sensor.s2p", TwoPortNetwork("S", coarse, _flat_coupled(coarse), z_ref=50.0))

    g = np.array([1e3, 2e3, 3e3])
    s2p("matched_load.s2p", TwoPortNetwork("S", g, np.zeros((3, 2, 2)), z_ref=50.0))
    s = np.zeros((3, 2, 2), dtype=complex)
    s[1] = np.eye(2)
    s2p("total_reflection.s2p", TwoPortNetwork("S", g, s, z_ref=50.0), ["row 2 is S = I (open circuit)"])

    fl, zl = lcr_sweep()
    (OUT / "lcr_sweep.csv").write_text(write_impedance_csv(fl, zl))
    (OUT / "lcr_short.csv").write_text(write_impedance_csv(fl[:5], zl[:5]))
    (OUT / "lcr_constant.csv").write_text(write_impedance_csv(fl[::10], np.full(40, 100.0 + 0j)))


def _flat_coupled(freq):
    """Frequency-independent coupling: Z21/Z11 constant, no resonance."""
    z = np.empty((freq.size, 2, 2), dtype=complex)
    z[:, 0, 0], z[:, 1, 1] = 200.0, 80.0
    z[:, 0, 1] = z[:, 1, 0] = 20.0
    return z_to_s(TwoPortNetwork("Z", freq, z), 50.0).matrices


if __name__ == "__main__":
    main()
