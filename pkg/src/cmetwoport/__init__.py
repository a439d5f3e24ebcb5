"""Two-port impedance modeling of resonant magnetoelectric sensors."""

from .errors import (
    CmeError,
    DegenerateSweep,
    DivisionByZeroError,
    GridMismatch,
    IllConditionedFit,
    NonMonotonicFrequency,
    OutOfGrid,
    PoleSingularity,
    SingularConversion,
    SingularDeterminant,
    SweepFormatError,
    TouchstoneError,
    TouchstoneSyntaxError,
    UnsupportedPortCount,
)
from .lcr import ImpedanceSweep, LcrFit, LcrModel, fit_lcr, lcr_impedance, lcr_resonance
from .network import PortSignals, TwoPortNetwork, as_grid, s_to_z, solve_ports, z_to_s
from .noise import (
    Dominance,
    NoiseBudget,
    OpAmpNoiseSpec,
    ReadoutCircuit,
    dominance_report,
    gain,
    get_opamp,
    noise_psd,
    opamp_figure,
    quadrature_total,
)
from .touchstone import (
    TouchstoneOptions,
    export_z_csv,
    export_z_json,
    parse_touchstone,
    read_z_csv,
    read_z_json,
    write_touchstone,
)
from .transfer import (
    AmResponse,
    ResonanceMode,
    TransferFunction,
    am_response,
    combine_output,
    detect_resonances,
    evaluate_fitted,
    fit_resonance_sum,
    h_open_circuit,
    h_short_circuit,
)

__version__ = "0.1.0"
