"""The three-step fetch experiment and its exports.

1. prepare the ancilla-alpha state spanning every database item;
2. apply the oracle exactly once;
3. acquire the ancilla spectrum and read marked items off downward peaks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acquire import closed_form_spectrum, dft_spectrum, readout_pulse, synthesize_fid
from .oracle import OracleUnitary, apply_query, compile_oracle
from .prep import prepare_I0alpha
from .readout import DEFAULT_THRESHOLD, default_tolerance, fetch_marked
from .spinops import transition_table


class QueryCountError(RuntimeError):
    pass


@dataclass
class ExperimentReport:
    system: object
    params: object
    table: object
    oracle_marked: frozenset | None
    oracle_applications: int
    prepared: object
    queried: object
    acquired: object
    fid: object
    dft: object
    closed_form: object
    max_deviation: float
    relative_deviation: float
    readout: object
    closed_form_readout: object
    defaults: tuple = ()

    @property
    def recovered(self):
        return self.readout.marked


def run_pipeline(system, oracle, params, threshold=DEFAULT_THRESHOLD, tol=None, defaults=()):
    """Run prepare -> query (once) -> acquire -> read out.

    ``oracle`` is an :class:`OracleUnitary` or any unitary matrix of the
    right size (e.g. one built from a pulse sequence). The DFT spectrum is
    read out; the closed-form spectrum on the same grid is read out too as
    a cross-check.
    """
    applications = 0

    def query(state):
        nonlocal applications
        applications += 1
        return apply_query(state, oracle)

    table = transition_table(system)
    if tol is None:
        tol = default_tolerance(table)
    prepared = prepare_I0alpha(system)
    queried = query(prepared)
    if applications != 1:
        raise QueryCountError(f"oracle applied {applications} times")
    acquired = readout_pulse(queried, system)
    fid = synthesize_fid(acquired, system, params)
    dft = dft_spectrum(fid, params.reference)
    closed = closed_form_spectrum(acquired, system, dft.freqs, params)
    deviation = float(np.max(np.abs(dft.real - closed.real)))
    tallest = float(np.max(np.abs(closed.real)))
    readout = fetch_marked(dft, table, threshold, tol)
    closed_readout = fetch_marked(closed, table, threshold, tol)
    return ExperimentReport(
        system=system,
        params=params,
        table=table,
        oracle_marked=oracle.marked if isinstance(oracle, OracleUnitary) else None,
        oracle_applications=applications,
        prepared=prepared,
        queried=queried,
        acquired=acquired,
        fid=fid,
        dft=dft,
        closed_form=closed,
        max_deviation=deviation,
        relative_deviation=deviation / tallest if tallest else 0.0,
        readout=readout,
        closed_form_readout=closed_readout,
        defaults=tuple(defaults),
    )


def run_experiment(config, oracle=None):
    """Run the configured experiment; ``oracle`` overrides ``config.marked``."""
    if oracle is None:
        oracle = compile_oracle(config.system, config.marked)
    return run_pipeline(
        config.system,
        oracle,
        config.acquisition,
        config.threshold,
        config.effective_tol(),
        config.defaults,
    )


def _sorted_bits(items):
    return sorted(items, key=lambda b: (len(b), b))


def summary_dict(report):
    s = report.system
    p = report.params
    return {
        "system": {
            "n_register": s.n_register,
            "offset_hz": s.offset.tolist(),
            "coupling_hz": s.coupling.tolist(),
            "t2_s": s.t2,
            "t2_override_s": dict(sorted(s.t2_override.items())),
        },
        "acquisition": {
            "dwell_s": p.dwell,
            "points": p.points,
            "reference_hz": p.reference,
            "scale": p.scale,
            "bin_hz": p.resolution,
        },
        "defaults_applied": list(report.defaults),
        "transitions": [{"register": b, "freq_hz": f} for b, f in report.table.rows],
        "oracle_marked": None if report.oracle_marked is None else _sorted_bits(report.oracle_marked),
        "oracle_applications": report.oracle_applications,
        "peaks": [
            {
                "freq_hz": pk.frequency,
                "height": pk.height,
                "sign": "down" if pk.height < 0 else "up",
                "assigned": pk.assigned,
            }
            for pk in report.readout.peaks
        ],
        "recovered_marked": _sorted_bits(report.readout.marked),
        "unmarked": _sorted_bits(report.readout.unmarked),
        "unseen": _sorted_bits(report.readout.unseen),
        "closed_form_recovered_marked": _sorted_bits(report.closed_form_readout.marked),
        "dft_vs_closed_form_max_deviation": report.max_deviation,
        "dft_vs_closed_form_relative_deviation": report.relative_deviation,
    }


def summary_structured(report):
    return json.dumps(summary_dict(report), indent=2, sort_keys=True) + "\n"


def summary_text(report):
    d = summary_dict(report)
    out = []
    s = d["system"]
    out.append(f"register spins: {s['n_register']}")
    for j in range(s["n_register"] + 1):
        out.append(f"  offset.{j} = {s['offset_hz'][j]:g} Hz")
    for k in range(1, s["n_register"] + 1):
        out.append(f"  J.0.{k} = {s['coupling_hz'][0][k]:g} Hz")
    out.append(f"  t2 = {s['t2_s']:g} s")
    a = d["acquisition"]
    out.append(f"acquisition: dwell {a['dwell_s']:.6g} s, {a['points']} points, bin {a['bin_hz']:.6g} Hz")
    for line in d["defaults_applied"]:
        out.append(f"  default: {line}")
    out.append("transitions (left to right):")
    for row in d["transitions"]:
        out.append(f"  {row['register'] or '-':>10}  {row['freq_hz']:+.4f} Hz")
    out.append(f"oracle applications: {d['oracle_applications']}")
    out.append("peaks (left to right):")
    for pk in d["peaks"]:
        label = pk["assigned"] if pk["assigned"] is not None else "unassigned"
        out.append(f"  {pk['freq_hz']:+.4f} Hz  {pk['sign']:>4}  height {pk['height']:+.5g}  -> {label}")
    out.append("recovered marked: " + (",".join(d["recovered_marked"]) or "(none)"))
    if d["unseen"]:
        out.append("unseen: " + ",".join(d["unseen"]))
    out.append(f"dft vs closed form: max deviation {d['dft_vs_closed_form_relative_deviation']:.3%} of tallest peak")
    return "\n".join(out) + "\n"


def ascii_plot(spectrum, width=72, height=9):
    """Signed text plot of the real part, frequency descending left to right."""
    f = np.asarray(spectrum.freqs)
    y = np.asarray(spectrum.values).real
    order = np.argsort(-f)
    f, y = f[order], y[order]
    cols = np.array_split(np.arange(len(y)), min(width, len(y)))
    vals = np.array([y[c][np.argmax(np.abs(y[c]))] for c in cols])
    top = np.max(np.abs(vals)) or 1.0
    half = height // 2
    levels = np.rint(vals / top * half).astype(int)
    rows = []
    for r in range(half, -half - 1, -1):
        line = []
        for lv in levels:
            if r == 0:
                line.append("-" if lv == 0 else "+")
            elif (r > 0 and lv >= r) or (r < 0 and lv <= r):
                line.append("|")
            else:
                line.append(" ")
        rows.append("".join(line).rstrip())
    rows.append(f"{f[0]:+.1f} Hz".ljust(len(cols) - 10) + f"{f[-1]:+.1f} Hz")
    return "\n".join(rows) + "\n"


def emit_plot(spectrum, path, table=None, title=None):
    """Write an SVG of the absorption spectrum with an NMR-style axis."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "nmrfetch", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 3.5))
        ax.plot(spectrum.freqs, spectrum.real, lw=1.0, color="k")
        ax.axhline(0, color="0.6", lw=0.5)
        if table is not None:
            top = float(np.max(np.abs(spectrum.real))) or 1.0
            for bits, freq in table.rows:
                ax.annotate(bits, (freq, 1.08 * top), ha="center", fontsize=8)
            ax.set_ylim(-1.2 * top, 1.2 * top)
            pad = max(table.span * 0.25, 5.0)
            ax.set_xlim(table.frequencies.max() + pad, table.frequencies.min() - pad)
        else:
            ax.set_xlim(spectrum.freqs.max(), spectrum.freqs.min())
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("absorption (a.u.)")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return Path(path)


def write_outputs(report, out_dir, summary_format="text", force=False):
    """Write spectrum.csv, spectrum_closed_form.csv, summary and spectrum.svg.

    Existing files are an error unless ``force`` is set.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary_name = "summary.json" if summary_format == "structured" else "summary.txt"
    files = {
        "spectrum.csv": report.dft.to_csv(),
        "spectrum_closed_form.csv": report.closed_form.to_csv(),
        summary_name: summary_structured(report) if summary_format == "structured" else summary_text(report),
    }
    targets = [out / name for name in (*files, "spectrum.svg")]
    if not force:
        clash = [str(t) for t in targets if t.exists()]
        if clash:
            raise FileExistsError("refusing to overwrite " + ", ".join(clash))
    for name, text in files.items():
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    emit_plot(report.dft, out / "spectrum.svg", report.table, "ancilla spectrum")
    return targets
