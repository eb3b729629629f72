"""Line-oriented experiment configuration.

Example::

    [system]
    spins = 2            # register spins; the ancilla (spin 0) is implicit
    offset.0 = 0.0       # Hz, default 0 for every spin
    J.0.1 = 35.1         # Hz
    J.0.2 = 54.2
    t2 = 1.0             # s
    t2.11 = 0.8          # optional per-transition override

    [acquisition]        # every key optional; defaults from AcqParams.auto
    dwell = 0.001953125
    points = 4096
    reference = 0.0
    scale = 1.0

    [readout]
    marked = 10,11
    threshold = 0.2
    tol = 4.775          # Hz, default min line gap / 4
    resolution = 1.0     # Hz, default max(3 linewidths, 4 DFT bins)
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

from .acquire import AcqParams
from .errors import ConfigError
from .oracle import normalize_marked, parse_marked
from .readout import DEFAULT_THRESHOLD, default_tolerance
from .spinops import MAX_REGISTER, SpinSystem, transition_table, validate

_SECTIONS = ("system", "acquisition", "readout")
_J_KEY = re.compile(r"^J\.(\d+)\.(\d+)$")
_OFFSET_KEY = re.compile(r"^offset\.(\d+)$")
_T2_KEY = re.compile(r"^t2\.([01]+)$")


@dataclass
class ExperimentConfig:
    system: SpinSystem
    acquisition: AcqParams
    marked: frozenset
    threshold: float = DEFAULT_THRESHOLD
    tol: float | None = None
    resolution: float | None = None
    defaults: list = field(default_factory=list)

    def effective_tol(self):
        if self.tol is not None:
            return self.tol
        return default_tolerance(transition_table(self.system))

    def effective_resolution(self):
        if self.resolution is not None:
            return self.resolution
        return default_resolution(self.system, self.acquisition)


def default_resolution(system, params):
    t2_min = min([system.t2, *system.t2_override.values()])
    return max(3 / (math.pi * t2_min), 4 * params.resolution)


def _line_index(text):
    """Map (section, key) -> 1-based line number, for error messages."""
    where = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            where.setdefault((section, None), lineno)
        elif line and not line.startswith(("#", ";")):
            key = re.split(r"[=:]", line, maxsplit=1)[0].strip()
            where.setdefault((section, key), lineno)
    return where


def _number(value, kind, lineno, key):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}", lineno) from None


def parse_config(text):
    """Parse and validate a configuration; raises :class:`ConfigError`."""
    parser = configparser.ConfigParser(
        interpolation=None,
        strict=True,
        inline_comment_prefixes=("#", ";"),
        default_section="__unused__",
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", lineno) from None

    where = _line_index(text)
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]", where.get((section, None)))
    if not parser.has_section("system"):
        raise ConfigError("missing [system] section")

    defaults = []
    sysec = parser["system"]
    if "spins" not in sysec:
        raise ConfigError("[system] needs 'spins' (number of register spins)", where.get(("system", None)))
    n = _number(sysec["spins"], int, where.get(("system", "spins")), "spins")
    if not 0 <= n <= MAX_REGISTER:
        raise ConfigError(f"spins must be in [0, {MAX_REGISTER}]", where.get(("system", "spins")))

    offsets, couplings, t2_override = {}, {}, {}
    t2 = None
    for key, value in sysec.items():
        lineno = where.get(("system", key))
        if key == "spins":
            continue
        if key == "t2":
            t2 = _number(value, float, lineno, key)
        elif m := _OFFSET_KEY.match(key):
            j = int(m.group(1))
            if j > n:
                raise ConfigError(f"{key}: spin index {j} exceeds {n}", lineno)
            offsets[j] = _number(value, float, lineno, key)
        elif m := _J_KEY.match(key):
            j, k = sorted((int(m.group(1)), int(m.group(2))))
            if j == k or k > n:
                raise ConfigError(f"{key}: invalid spin pair", lineno)
            if (j, k) in couplings:
                raise ConfigError(f"{key}: coupling between spins {j} and {k} given twice", lineno)
            couplings[(j, k)] = _number(value, float, lineno, key)
        elif m := _T2_KEY.match(key):
            if len(m.group(1)) != n:
                raise ConfigError(f"{key}: bitstring must have length {n}", lineno)
            t2_override[m.group(1)] = _number(value, float, lineno, key)
        else:
            raise ConfigError(f"unknown key {key!r} in [system]", lineno)
    if t2 is None:
        t2 = 1.0
        defaults.append("system.t2 = 1.0")
    try:
        system = SpinSystem.build(n, couplings, offsets, t2, t2_override)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    structural = validate(system, 0.0)
    if not structural.ok:
        raise ConfigError("invalid spin system: " + "; ".join(structural.violations))

    acq = parser["acquisition"] if parser.has_section("acquisition") else {}
    acq_vals = {}
    for key, value in acq.items():
        lineno = where.get(("acquisition", key))
        if key == "points":
            acq_vals[key] = _number(value, int, lineno, key)
        elif key in ("dwell", "reference", "scale"):
            acq_vals[key] = _number(value, float, lineno, key)
        else:
            raise ConfigError(f"unknown key {key!r} in [acquisition]", lineno)
    reference = acq_vals.get("reference", 0.0)
    scale = acq_vals.get("scale", 1.0)
    auto = AcqParams.auto(system, reference, scale)
    for key in ("dwell", "points"):
        if key not in acq_vals:
            acq_vals[key] = getattr(auto, key)
            defaults.append(f"acquisition.{key} = {acq_vals[key]!r}")
    for key, value in (("reference", 0.0), ("scale", 1.0)):
        if key not in acq:
            defaults.append(f"acquisition.{key} = {value!r}")
    try:
        params = AcqParams(acq_vals["dwell"], acq_vals["points"], reference, scale)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    rd = parser["readout"] if parser.has_section("readout") else {}
    marked = frozenset()
    threshold, tol, resolution = DEFAULT_THRESHOLD, None, None
    for key, value in rd.items():
        lineno = where.get(("readout", key))
        if key == "marked":
            marked = parse_marked(value)
            try:
                marked = normalize_marked(marked, n)
            except ValueError as exc:
                raise ConfigError(f"marked: {exc}", lineno) from None
        elif key == "threshold":
            threshold = _number(value, float, lineno, key)
            if not 0 < threshold < 1:
                raise ConfigError("threshold must lie in (0, 1)", lineno)
        elif key == "tol":
            tol = _number(value, float, lineno, key)
        elif key == "resolution":
            resolution = _number(value, float, lineno, key)
        else:
            raise ConfigError(f"unknown key {key!r} in [readout]", lineno)
    if "marked" not in rd:
        defaults.append("readout.marked = (none)")
    if "threshold" not in rd:
        defaults.append(f"readout.threshold = {DEFAULT_THRESHOLD!r}")

    config = ExperimentConfig(system, params, marked, threshold, tol, resolution, defaults)
    if resolution is None:
        defaults.append(f"readout.resolution = {config.effective_resolution()!r}")
    report = validate(system, config.effective_resolution())
    if not report.ok:
        raise ConfigError("invalid spin system: " + "; ".join(report.violations))
    try:
        params.check_covers(system)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if tol is None:
        defaults.append(f"readout.tol = {config.effective_tol()!r}")
    return config


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
