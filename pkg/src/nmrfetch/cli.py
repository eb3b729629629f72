"""Command line interface: simulate, validate, plot, oracle."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .acquire import Spectrum
from .config import load_config
from .errors import NMRFetchError
from .experiment import ascii_plot, emit_plot, run_experiment, summary_structured, summary_text, write_outputs
from .oracle import compile_oracle, normalize_marked, parse_marked, pulse_unitary
from .prep import parse_sequence
from .spinops import validate

EXIT_ERROR = 1
EXIT_MISMATCH = 3


def _marked_arg(text, n):
    return normalize_marked(parse_marked(text), n)


def _bits_lines(items):
    return "".join(f"{b}\n" for b in sorted(items))


def cmd_simulate(args):
    config = load_config(args.system)
    n = config.system.n_register
    if args.marked is not None:
        config.marked = _marked_arg(args.marked, n)
    oracle = None
    if args.sequence:
        oracle = pulse_unitary(parse_sequence(Path(args.sequence).read_text(encoding="utf-8")), config.system)
    report = run_experiment(config, oracle)
    sys.stdout.write(_bits_lines(report.recovered))
    if args.ascii_plot:
        sys.stderr.write(ascii_plot(report.dft))
    if args.summary:
        fmt = summary_structured if args.summary_format == "structured" else summary_text
        sys.stderr.write(fmt(report))
    if args.out:
        write_outputs(report, args.out, args.summary_format, args.force)
    if args.expect is not None and report.recovered != _marked_arg(args.expect, n):
        sys.stderr.write("recovered marked set differs from --expect\n")
        return EXIT_MISMATCH
    return 0


def cmd_validate(args):
    config = load_config(args.system)
    report = validate(config.system, config.effective_resolution())
    print(report)
    return 0 if report.ok else EXIT_ERROR


def cmd_plot(args):
    spectrum = Spectrum.from_csv(Path(args.csv).read_text(encoding="utf-8"))
    if len(spectrum.freqs) == 0:
        raise NMRFetchError("spectrum CSV has no rows")
    if args.out:
        emit_plot(spectrum, args.out)
    if args.ascii_plot or not args.out:
        sys.stdout.write(ascii_plot(spectrum))
    return 0


def cmd_oracle(args):
    config = load_config(args.system)
    marked = config.marked if args.marked is None else _marked_arg(args.marked, config.system.n_register)
    U = compile_oracle(config.system, marked).matrix.astype(int)
    np.savetxt(sys.stdout, U, fmt="%d")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nmrfetch",
        description="Simulate single-query fetching of marked database items from an ancilla NMR spectrum.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the full pipeline and print the recovered marked items")
    sim.add_argument("--system", required=True, help="experiment configuration file")
    sim.add_argument("--marked", help="comma-separated bitstrings; overrides the file")
    sim.add_argument("--sequence", help="pulse-sequence listing used as the oracle instead of --marked")
    sim.add_argument("--out", help="directory for spectrum CSV, summary and SVG plot")
    sim.add_argument("--expect", help="comma-separated bitstrings; exit nonzero if the readout differs")
    sim.add_argument("--ascii-plot", action="store_true", help="print a text plot to stderr")
    sim.add_argument("--summary", action="store_true", help="print the summary to stderr")
    sim.add_argument("--summary-format", choices=("text", "structured"), default="text")
    sim.add_argument("--force", action="store_true", help="overwrite existing output files")
    sim.set_defaults(func=cmd_simulate)

    val = sub.add_parser("validate", help="check the spin system only")
    val.add_argument("--system", required=True)
    val.set_defaults(func=cmd_validate)

    plot = sub.add_parser("plot", help="re-render a spectrum CSV")
    plot.add_argument("csv")
    plot.add_argument("--out", help="SVG path")
    plot.add_argument("--ascii-plot", action="store_true")
    plot.set_defaults(func=cmd_plot)

    orc = sub.add_parser("oracle", help="print the compiled oracle matrix")
    orc.add_argument("--system", required=True)
    orc.add_argument("--marked")
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NMRFetchError, ValueError, OSError) as exc:
        print(f"nmrfetch: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
