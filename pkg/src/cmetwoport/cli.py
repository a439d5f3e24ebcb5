"""Command-line entry point: ``cmetwoport {convert,tf,fit-lcr,noise}``.

Reports go to stdout, diagnostics to stderr. Every failure prints a single
``ERROR <code>: <message>`` line. Exit codes:

    0  success
    2  bad input (parse error, malformed CSV, missing or invalid parameter)
    3  singular S->Z conversion
    4  Z11 vanishes on the grid (open-circuit ratio undefined)
    5  degenerate impedance sweep (nothing to fit)

A JSON config file (``--config``) may set any AnalysisConfig field; flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import lcr, noise, touchstone, transfer
from .errors import (
    CmeError,
    DegenerateSweep,
    DivisionByZeroError,
    IllConditionedFit,
    SingularConversion,
)
from .network import s_to_z

EXIT_INPUT, EXIT_SINGULAR, EXIT_Z11, EXIT_DEGENERATE = 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


@dataclass
class AnalysisConfig:
    z_ref: float | None = None
    temperature: float = noise.DEFAULT_TEMPERATURE
    opamp: str | dict = "LT1363"
    r1: float | None = None
    r2: float | None = None
    prominence_db: float = 6.0
    output_format: str = "csv"

    def validate(self):
        if self.z_ref is not None and not self.z_ref > 0:
            raise CliError(EXIT_INPUT, "z_ref must be > 0")
        if not self.temperature > 0:
            raise CliError(EXIT_INPUT, "temperature must be > 0 K")
        if self.output_format not in ("csv", "json"):
            raise CliError(EXIT_INPUT, f"output_format must be csv or json, not {self.output_format!r}")
        if self.r1 is not None and not self.r1 > 0:
            raise CliError(EXIT_INPUT, "r1 must be > 0")
        if self.r2 is not None and not self.r2 >= 0:
            raise CliError(EXIT_INPUT, "r2 must be >= 0")
        if isinstance(self.opamp, str):
            if self.opamp not in noise.load_presets():
                raise CliError(EXIT_INPUT, f"unknown op-amp preset {self.opamp!r}")
        elif isinstance(self.opamp, dict):
            try:
                noise.OpAmpNoiseSpec(str(self.opamp.get("name", "custom")),
                                     float(self.opamp["e_n_v_rthz"]), float(self.opamp["i_n_a_rthz"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise CliError(EXIT_INPUT, f"invalid inline op-amp spec: {exc}") from None
        else:
            raise CliError(EXIT_INPUT, "opamp must be a preset name or an inline spec object")
        return self


def load_config(path) -> AnalysisConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"cannot read config {path}: {exc}") from None
    known = {f.name for f in fields(AnalysisConfig)}
    unknown = set(raw) - known
    if unknown:
        raise CliError(EXIT_INPUT, f"unknown config keys: {', '.join(sorted(unknown))}")
    return AnalysisConfig(**raw).validate()


def resolve_config(args) -> AnalysisConfig:
    cfg = load_config(args.config) if args.config else AnalysisConfig()
    for f in fields(AnalysisConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            setattr(cfg, f.name, val)
    return cfg.validate()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _floats(text, n=None, what="value"):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise CliError(EXIT_INPUT, f"{what} must be comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise CliError(EXIT_INPUT, f"{what} needs {n} comma-separated numbers, got {text!r}")
    if not all(np.isfinite(vals)):
        raise CliError(EXIT_INPUT, f"{what} must be finite")
    return vals


def _load_z_network(path, cfg, z_normalized=False):
    """Any supported input as a Z network: .sNp Touchstone, Z-sweep CSV or JSON."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc}") from None
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return touchstone.read_z_csv(data, z_ref=cfg.z_ref)
    if suffix == ".json":
        return touchstone.read_z_json(data, z_ref=cfg.z_ref)
    opts, net = touchstone.parse_touchstone(data, z_normalized=z_normalized, name=path.name)
    if net.kind == "S":
        if cfg.z_ref is not None and cfg.z_ref != net.z_ref:
            net = type(net)("S", net.freq, net.matrices, z_ref=cfg.z_ref)
        net = s_to_z(net)
    return net


# -- subcommands ------------------------------------------------------------

def _convert_one(src, out, cfg, args):
    net = _load_z_network(src, cfg, args.z_normalized)
    if cfg.output_format == "json":
        text = touchstone.export_z_json(net)
    else:
        text = touchstone.export_z_csv(net)
    _emit(text, out)


def cmd_convert(args, cfg):
    return _for_inputs(args, lambda src, out: _convert_one(src, out, cfg, args),
                       lambda stem: f"{stem}.{cfg.output_format}")


def _tf_one(src, tf_out, modes_out, cfg, args):
    net = _load_z_network(src, cfg, args.z_normalized)
    h = transfer.h_open_circuit(net)
    detected = transfer.detect_resonances(h, cfg.prominence_db) if h.freq.size >= 5 else []
    report = {"modes": [], "fit_error": None}
    fitted = []
    if detected and not args.no_fit:
        try:
            fitted = transfer.fit_resonance_sum(h, detected)
        except (IllConditionedFit, ValueError) as exc:
            report["fit_error"] = str(exc)
    unfit = [m for m in detected if m.q is None] if fitted else detected
    modes = sorted(fitted + unfit, key=lambda m: m.f_r)
    report["modes"] = [transfer.mode_record(m) for m in modes]

    if args.sidebands:
        fc, fm = _floats(args.sidebands, 2, "--sidebands")
        if args.sideband_source == "fitted":
            if not fitted:
                raise CliError(EXIT_INPUT, "no fitted modes available for --sideband-source fitted")
            source = fitted
        else:
            source = h
        try:
            am = transfer.am_response(source, fc, fm)
        except ValueError as exc:
            raise CliError(EXIT_INPUT, str(exc)) from None
        report["sidebands"] = transfer.am_record(am)

    if tf_out is not None:
        Path(tf_out).write_text(transfer.tf_csv(h))
    if modes_out is not None:
        Path(modes_out).write_text(transfer.modes_json(modes))
    return report


def cmd_tf(args, cfg):
    src = Path(args.input)
    if src.is_dir():
        def run(path, outdir):
            stem = Path(path).stem
            _tf_one(path, outdir / f"{stem}.tf.csv", outdir / f"{stem}.modes.json", cfg, args)
        return _for_dir(src, args.output, run)
    report = _tf_one(src, args.output, args.modes_out, cfg, args)
    sys.stdout.write(_dump(report))
    return 0


def cmd_fit_lcr(args, cfg):
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {args.input}: {exc}") from None
    f, z = touchstone.read_impedance_csv(data)
    if f.size < 10:
        raise CliError(EXIT_INPUT, f"fit-lcr needs at least 10 rows, got {f.size}")
    try:
        sweep = lcr.ImpedanceSweep(f, z)
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    fit = lcr.fit_lcr(sweep)
    _emit(_dump(fit.report()), args.output)
    return 0


def _opamp_from(cfg, args):
    if isinstance(cfg.opamp, dict):
        name = str(cfg.opamp.get("name", "custom"))
        e_n, i_n = cfg.opamp["e_n_v_rthz"], cfg.opamp["i_n_a_rthz"]
        presets = {name: (e_n, i_n)}
    else:
        name, presets = cfg.opamp, None
        if args.opamp_presets:
            presets = noise.load_presets(args.opamp_presets)
    try:
        return noise.get_opamp(name, args.en, args.in_, presets=presets)
    except (KeyError, ValueError) as exc:
        raise CliError(EXIT_INPUT, str(exc).strip('"')) from None


def cmd_noise(args, cfg):
    out = {}
    if args.contrib:
        vals = _floats(args.contrib, what="--contrib")
        try:
            out["contributions"] = vals
            out["quadrature_total"] = noise.quadrature_total(vals)
        except ValueError as exc:
            raise CliError(EXIT_INPUT, str(exc)) from None
        circuit_given = any(v is not None for v in (args.r1, args.r2, args.zsen, args.zsen_mag))
        if not circuit_given:
            sys.stdout.write(_dump(out))
            return 0

    missing = [n for n, v in (("--r1", cfg.r1), ("--r2", cfg.r2)) if v is None]
    if args.zsen is None and args.zsen_mag is None:
        missing.append("--zsen or --zsen-mag")
    if missing:
        raise CliError(EXIT_INPUT, f"missing parameters: {', '.join(missing)}")
    if args.zsen is not None and args.zsen_mag is not None:
        raise CliError(EXIT_INPUT, "give either --zsen or --zsen-mag, not both")

    lower_bound = args.zsen is None
    if lower_bound:
        if not args.zsen_mag >= 0:
            raise CliError(EXIT_INPUT, "--zsen-mag must be >= 0")
        z = complex(0.0, args.zsen_mag)
    else:
        re, im = _floats(args.zsen, 2, "--zsen")
        z = complex(re, im)

    amp = _opamp_from(cfg, args)
    try:
        circuit = noise.ReadoutCircuit(cfg.r1, cfg.r2, cfg.temperature)
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    budget = noise.noise_psd(circuit, amp, z, args.freq)
    dom = noise.dominance_report(amp, z, circuit)

    report = {
        "opamp": {"name": amp.name, "e_n_v_rthz": amp.e_n, "i_n_a_rthz": amp.i_n,
                  "r_opamp_ohm": noise.opamp_figure(amp)},
        "circuit": {"r1_ohm": circuit.r1, "r2_ohm": circuit.r2,
                    "temperature_k": circuit.temperature, "gain": budget.av},
        "z_sen": {"re": z.real, "im": z.imag, "mag": abs(z)},
        "thermal_term_lower_bound": lower_bound,
        "output_referred": budget.report("out"),
        "input_referred": budget.report("in"),
        "dominance": dom.as_dict(),
    }
    report.update(out)
    sys.stdout.write(_dump(report))
    return 0


# -- directory handling -----------------------------------------------------

def _for_dir(src: Path, outdir, run):
    if outdir is None:
        raise CliError(EXIT_INPUT, "a directory input needs -o/--output pointing to a directory")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = sorted(p for p in src.iterdir() if p.suffix.lower() == ".s2p")

    def guarded(path):
        try:
            run(path, outdir)
            return 0, None
        except CliError as exc:
            return exc.code, f"{path.name}: {exc}"
        except Exception as exc:  # noqa: BLE001 - mapped per file below
            code = _exit_code(exc)
            if code is None:
                raise
            return code, f"{path.name}: {exc}"

    with ThreadPoolExecutor(max_workers=min(8, os.cpu_count() or 1)) as pool:
        results = list(pool.map(guarded, files))
    worst = 0
    for code, msg in results:
        if code:
            print(f"ERROR {code}: {msg}", file=sys.stderr)
            worst = max(worst, code)
    return worst


def _for_inputs(args, run, out_name):
    src = Path(args.input)
    if src.is_dir():
        return _for_dir(src, args.output, lambda p, d: run(p, d / out_name(Path(p).stem)))
    run(src, args.output)
    return 0


def _exit_code(exc):
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, SingularConversion):
        return EXIT_SINGULAR
    if isinstance(exc, DivisionByZeroError):
        return EXIT_Z11
    if isinstance(exc, DegenerateSweep):
        return EXIT_DEGENERATE
    if isinstance(exc, (CmeError, ValueError, OSError)):
        return EXIT_INPUT
    return None


# -- parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"ERROR {EXIT_INPUT}: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cmetwoport", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file with AnalysisConfig keys")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def net_flags(sp):
        sp.add_argument("input", help=".s2p file, Z-sweep CSV/JSON, or a directory of .s2p files")
        sp.add_argument("--z-ref", dest="z_ref", type=float, help="reference impedance override (ohm)")
        sp.add_argument("--z-normalized", action="store_true",
                        help="read Z-format Touchstone data as normalized to R")

    c = sub.add_parser("convert", help="S-parameters to a Z-parameter sweep")
    net_flags(c)
    c.add_argument("-o", "--output", help="output file (or directory for directory input)")
    c.add_argument("--format", dest="output_format", choices=("csv", "json"))
    c.set_defaults(func=cmd_convert)

    t = sub.add_parser("tf", help="open-circuit transfer function and resonance table")
    net_flags(t)
    t.add_argument("-o", "--output", help="transfer-function CSV path (directory for directory input)")
    t.add_argument("--modes-out", help="write the resonance list JSON here")
    t.add_argument("--prominence-db", dest="prominence_db", type=float)
    t.add_argument("--sidebands", metavar="FC,FM", help="evaluate H at FC-FM, FC, FC+FM (Hz)")
    t.add_argument("--sideband-source", choices=("sampled", "fitted"), default="sampled")
    t.add_argument("--no-fit", action="store_true", help="detect resonances only")
    t.set_defaults(func=cmd_tf)

    f = sub.add_parser("fit-lcr", help="fit series R + parallel LC to an impedance CSV")
    f.add_argument("input", help="CSV with freq_hz,z_re,z_im (or a Z-sweep CSV, Z11 is used)")
    f.add_argument("-o", "--output", help="write the fit report here instead of stdout")
    f.set_defaults(func=cmd_fit_lcr)

    n = sub.add_parser("noise", help="readout noise budget")
    n.add_argument("--opamp", help="preset name (default LT1363)")
    n.add_argument("--opamp-presets", help="JSON preset file replacing the built-in list")
    n.add_argument("--en", type=float, help="op-amp voltage noise override (V/rtHz)")
    n.add_argument("--in", dest="in_", type=float, help="op-amp current noise override (A/rtHz)")
    n.add_argument("--r1", type=float)
    n.add_argument("--r2", type=float)
    n.add_argument("--zsen", metavar="RE,IM", help="sensor output impedance (ohm)")
    n.add_argument("--zsen-mag", dest="zsen_mag", type=float,
                   help="|Z_sen| only; thermal term then assumes Re{Z}=0 (lower bound)")
    n.add_argument("--temp", dest="temperature", type=float, help="temperature (K)")
    n.add_argument("--freq", type=float, help="evaluation frequency (Hz), for the report")
    n.add_argument("--contrib", metavar="A,B,...", help="ASD contributions to add in quadrature")
    n.set_defaults(func=cmd_noise)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except Exception as exc:  # noqa: BLE001
        code = _exit_code(exc)
        if code is None:
            raise
        print(f"ERROR {code}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
