"""Acquisition: readout pulse, FID synthesis, and spectra.

The detected signal is Tr{I_0^+ rho(t)}: only the ancilla is observed. In
the eigenbasis of the diagonal Hamiltonian every element rho_sr evolves
independently, so the FID is a sum of damped complex exponentials

    s(t) = scale * sum_rs F+_rs rho_sr exp((i w_rs - lambda_rs) t),
    w_rs = H_rr - H_ss,   lambda_rs = 1 / T2.

Frequencies are reported in Hz relative to ``AcqParams.reference``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import SpectralFold
from .prep import Rotation, apply_pulse, as_density
from .spinops import collective, hamiltonian_diagonal, int_to_bits, transition_table


@dataclass(frozen=True)
class AcqParams:
    """Sampling parameters.

    Parameters
    ----------
    dwell : float
        Seconds between samples; the spectral width is 1/dwell.
    points : int
        Number of complex samples, a power of two and at least 16.
    reference : float
        Hz value of the rotating-frame origin.
    scale : float
        Overall signal constant (stands for N gamma hbar).
    """

    dwell: float
    points: int
    reference: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.dwell > 0:
            raise ValueError("dwell must be positive")
        if self.points < 16 or self.points & (self.points - 1):
            raise ValueError(f"points must be a power of two >= 16, got {self.points}")

    @property
    def spectral_width(self):
        return 1.0 / self.dwell

    @property
    def acquisition_time(self):
        return self.points * self.dwell

    @property
    def resolution(self):
        """DFT bin width in Hz."""
        return 1.0 / (self.points * self.dwell)

    @classmethod
    def auto(cls, system, reference=0.0, scale=1.0):
        """Pick sampling that resolves every ancilla line of ``system``.

        Spectral width: a power of two covering the line span plus 40
        linewidths on either side of the reference, and wide enough that
        the DFT's first-point bias (dwell/2 per unit amplitude and line)
        stays below 1% of a single line's peak height.
        Acquisition time: at least 8 T2 and 2 / linewidth.
        """
        t2_min = min([system.t2, *system.t2_override.values()])
        t2_max = max([system.t2, *system.t2_override.values()])
        fwhm = 1.0 / (math.pi * t2_min)
        freqs = transition_table(system).frequencies - reference
        needed = 2 * (np.max(np.abs(freqs)) + 20 * fwhm)
        needed = max(needed, 100 * 2**system.n_register / t2_min)
        sw = 2.0 ** math.ceil(math.log2(needed))
        t_acq = max(8 * t2_max, 2 / fwhm)
        points = max(16, 2 ** math.ceil(math.log2(t_acq * sw)))
        return cls(1.0 / sw, points, reference, scale)

    def check_covers(self, system):
        """Raise ValueError unless 1/dwell exceeds line span + 4 linewidths."""
        t2_min = min([system.t2, *system.t2_override.values()])
        need = transition_table(system).span + 4 / (math.pi * t2_min)
        if self.spectral_width <= need:
            raise ValueError(
                f"spectral width {self.spectral_width:g} Hz does not exceed span + 4 linewidths ({need:g} Hz)"
            )


@dataclass(frozen=True, eq=False)
class Fid:
    samples: np.ndarray
    dwell: float

    @property
    def times(self):
        return np.arange(len(self.samples)) * self.dwell


@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray
    values: np.ndarray
    provenance: str

    @property
    def real(self):
        return self.values.real

    def to_csv(self):
        """CSV text with header ``freq_hz,real,imag``, ascending frequency."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["freq_hz", "real", "imag"])
        for f, v in zip(self.freqs, self.values):
            writer.writerow([repr(float(f)), repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, provenance="csv"):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["freq_hz", "real", "imag"]:
            raise ValueError("spectrum CSV must start with header freq_hz,real,imag")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1] + 1j * data[:, 2], provenance)


@dataclass(frozen=True)
class Line:
    """One observable ancilla transition."""

    bits: str
    amplitude: complex  # F+_rs rho_sr
    omega: float  # rad/s, relative to the reference
    rate: float  # 1/s


def readout_pulse(state, system):
    """(pi/2)_y on the ancilla only."""
    return apply_pulse(state, Rotation("y", math.pi / 2, (0,)))


def detection_operator(system):
    """Ancilla raising operator I_0^+."""
    return collective("Fplus", [0], system)


def observable_lines(state, system, reference=0.0):
    """Residues of the detected signal, one per ancilla transition.

    Lines are returned in register-bitstring order, which fixes the
    summation order of FIDs and spectra.
    """
    rho = as_density(state).matrix
    F = detection_operator(system)
    E = hamiltonian_diagonal(system)
    n = system.n_register
    lines = []
    for r, s in zip(*np.nonzero(F)):
        bits = int_to_bits(int(r) & ((1 << n) - 1), n)
        lines.append(
            Line(
                bits=bits,
                amplitude=complex(F[r, s] * rho[s, r]),
                omega=float(E[r] - E[s] - 2 * np.pi * reference),
                rate=1.0 / system.t2_for(bits),
            )
        )
    return sorted(lines, key=lambda ln: ln.bits)


def synthesize_fid(state, system, params):
    lines = observable_lines(state, system, params.reference)
    nyquist = 1.0 / (2 * params.dwell)
    for ln in lines:
        if abs(ln.omega / (2 * np.pi)) >= nyquist:
            raise SpectralFold(
                f"line {ln.bits} at {ln.omega / (2 * np.pi) + params.reference:g} Hz lies outside "
                f"+/-{nyquist:g} Hz around the reference"
            )
    t = np.arange(params.points) * params.dwell
    samples = np.zeros(params.points, dtype=complex)
    for ln in lines:
        if ln.amplitude != 0:
            samples += ln.amplitude * np.exp((1j * ln.omega - ln.rate) * t)
    return Fid(params.scale * samples, params.dwell)


def dft_frequencies(points, dwell):
    """Ascending grid k/(N dwell) for k = -N/2+1 .. N/2."""
    k = np.arange(-points // 2 + 1, points // 2 + 1)
    return k / (points * dwell)


def dft_spectrum(fid, reference=0.0):
    """Complex spectrum dwell * sum_k s_k exp(-2 pi i f t_k).

    The grid spans (-1/(2 dwell), +1/(2 dwell)] and is shifted by
    ``reference`` so it lines up with absolute Hz.
    """
    N = len(fid.samples)
    if N < 16:
        raise ValueError("need at least 16 samples")
    raw = np.fft.fft(fid.samples) * fid.dwell
    k = np.arange(-N // 2 + 1, N // 2 + 1)
    return Spectrum(k / (N * fid.dwell) + reference, raw[k % N], "dft")


def closed_form_spectrum(state, system, grid, params=None):
    """Sum of complex Lorentzians scale * a / (i (2 pi f - w) + lambda)."""
    reference = params.reference if params is not None else 0.0
    scale = params.scale if params is not None else 1.0
    grid = np.asarray(grid, dtype=float)
    w = 2 * np.pi * (grid - reference)
    values = np.zeros(grid.shape, dtype=complex)
    for ln in observable_lines(state, system, reference):
        if ln.amplitude != 0:
            values += ln.amplitude / (1j * (w - ln.omega) + ln.rate)
    return Spectrum(grid, scale * values, "closed_form")
