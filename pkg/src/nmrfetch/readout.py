"""Decode a spectrum into the marked set: peak sign is the answer bit."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from .errors import AmbiguousAssignment, DuplicateAssignment, NoPeaks

DEFAULT_THRESHOLD = 0.2


@dataclass(frozen=True)
class Peak:
    frequency: float
    height: float
    assigned: str | None = None


@dataclass(frozen=True)
class Readout:
    """Result of :func:`fetch_marked`.

    ``marked`` holds bitstrings with downward peaks, ``unmarked`` those
    with upward peaks, and ``unseen`` table rows without any peak.
    """

    marked: frozenset
    unmarked: frozenset
    unseen: frozenset
    peaks: tuple


def _parabolic(x, y, i):
    """Vertex of the parabola through points i-1, i, i+1."""
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a == 0:
        return x1, y1
    xv = -b / (2 * a)
    c = y1 - a * x1 * x1 - b * x1
    return xv, a * xv * xv + b * xv + c


def detect_peaks(spectrum, threshold_fraction=DEFAULT_THRESHOLD):
    """Signed extrema of the absorption (real) spectrum.

    Returns peaks sorted by descending frequency (left to right on an NMR
    axis). Raises :class:`NoPeaks` when nothing reaches the threshold.
    """
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie in (0, 1)")
    f = np.asarray(spectrum.freqs, dtype=float)
    y = np.asarray(spectrum.values).real
    if len(y) < 3:
        raise ValueError("spectrum needs at least 3 points")
    top = np.max(np.abs(y))
    if top == 0:
        raise NoPeaks("spectrum is identically zero")
    level = threshold_fraction * top
    peaks = []
    for sign in (1.0, -1.0):
        idx, _ = find_peaks(sign * y, height=level)
        for i in idx:
            freq, height = _parabolic(f, y, i)
            peaks.append(Peak(float(freq), float(height)))
    if not peaks:
        raise NoPeaks(f"no extremum above {threshold_fraction:g} of the maximum")
    return sorted(peaks, key=lambda p: -p.frequency)


def assign_peaks(peaks, table, tol):
    """Attach each peak to the unique transition within ``tol`` Hz."""
    rows = list(table.rows)
    taken = {}
    out = []
    for peak in peaks:
        hits = [bits for bits, freq in rows if abs(freq - peak.frequency) <= tol]
        if len(hits) > 1:
            raise AmbiguousAssignment(
                f"peak at {peak.frequency:.4f} Hz is within {tol:g} Hz of transitions {', '.join(hits)}"
            )
        if not hits:
            out.append(replace(peak, assigned=None))
            continue
        bits = hits[0]
        if bits in taken:
            raise DuplicateAssignment(
                f"peaks at {taken[bits]:.4f} and {peak.frequency:.4f} Hz both match transition {bits}"
            )
        taken[bits] = peak.frequency
        out.append(replace(peak, assigned=bits))
    return out


def default_tolerance(table):
    return table.min_gap / 4 if len(table) > 1 else 1.0


def fetch_marked(spectrum, table, threshold_fraction=DEFAULT_THRESHOLD, tol=None):
    """Marked items are the transitions whose peaks point down."""
    if tol is None:
        tol = default_tolerance(table)
    peaks = assign_peaks(detect_peaks(spectrum, threshold_fraction), table, tol)
    marked = frozenset(p.assigned for p in peaks if p.assigned is not None and p.height < 0)
    unmarked = frozenset(p.assigned for p in peaks if p.assigned is not None and p.height > 0)
    unseen = frozenset(table.bitstrings) - marked - unmarked
    return Readout(marked, unmarked, unseen, tuple(peaks))


def lorentzian(f, height, center, fwhm, baseline):
    hw = fwhm / 2
    return height * hw**2 / ((f - center) ** 2 + hw**2) + baseline


def fit_linewidth(spectrum, center, window):
    """Least-squares Lorentzian fit of the real part within +/-window Hz.

    Returns ``(fwhm_hz, center_hz)``.
    """
    f = np.asarray(spectrum.freqs)
    y = np.asarray(spectrum.values).real
    sel = np.abs(f - center) <= window
    fs, ys = f[sel], y[sel]
    i = np.argmax(np.abs(ys))
    # initial width from the half-height crossing count
    above = np.abs(ys) >= abs(ys[i]) / 2
    step = np.median(np.diff(fs))
    p0 = [ys[i], fs[i], max(step, above.sum() * step), 0.0]
    popt, _ = curve_fit(lorentzian, fs, ys, p0=p0)
    return abs(popt[2]), popt[1]
