"""Operator algebra for weakly coupled spin-1/2 registers with one ancilla.

Basis conventions
-----------------
Spin 0 is the ancilla, spins 1..n form the database register. A basis
index is ``(ancilla_bit << n) | register_bits`` with spin 1 as the most
significant register bit, so Kronecker products run spin 0, 1, ..., n.
Bit 0 is ``|alpha>`` (I_z = +1/2), bit 1 is ``|beta>`` (I_z = -1/2).

Units: offsets, couplings and transition tables are in Hz; the Hamiltonian
and eigen-energies are in rad/s.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations, product
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateTransitions

MAX_REGISTER = 10

# 2x2 single-spin matrices in the {|alpha>, |beta>} basis
_SINGLE = {
    "Identity": np.eye(2, dtype=complex),
    "Ialpha": np.array([[1, 0], [0, 0]], dtype=complex),
    "Ibeta": np.array([[0, 0], [0, 1]], dtype=complex),
    "Ix": 0.5 * np.array([[0, 1], [1, 0]], dtype=complex),
    "Iy": 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Iz": 0.5 * np.array([[1, 0], [0, -1]], dtype=complex),
    "Iplus": np.array([[0, 1], [0, 0]], dtype=complex),
    "Iminus": np.array([[0, 0], [1, 0]], dtype=complex),
}

_COLLECTIVE = {"Fx": "Ix", "Fy": "Iy", "Fz": "Iz", "Fplus": "Iplus", "Fminus": "Iminus"}


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """Parameters of the weak-coupling Hamiltonian.

    Parameters
    ----------
    n_register : int
        Number of register spins. The ancilla (spin 0) is always present.
    offset : array_like, shape (n+1,)
        Rotating-frame chemical-shift offsets in Hz.
    coupling : array_like, shape (n+1, n+1)
        Scalar couplings J_jk in Hz. Only the upper triangle enters the
        Hamiltonian; symmetry is checked by :func:`validate`.
    t2 : float
        Transverse relaxation time in seconds, shared by all transitions.
    t2_override : mapping of str to float, optional
        Per-transition T2 keyed by register bitstring.
    """

    n_register: int
    offset: np.ndarray
    coupling: np.ndarray
    t2: float = 1.0
    t2_override: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        n = int(self.n_register)
        if not 0 <= n <= MAX_REGISTER:
            raise ValueError(f"n_register must be in [0, {MAX_REGISTER}], got {n}")
        offset = np.array(self.offset, dtype=float)
        coupling = np.array(self.coupling, dtype=float)
        if offset.shape != (n + 1,):
            raise ValueError(f"offset must have length {n + 1}, got shape {offset.shape}")
        if coupling.shape != (n + 1, n + 1):
            raise ValueError(f"coupling must be {n + 1}x{n + 1}, got shape {coupling.shape}")
        if not self.t2 > 0:
            raise ValueError("t2 must be positive")
        override = dict(self.t2_override)
        for bits, value in override.items():
            _check_bits(bits, n)
            if not value > 0:
                raise ValueError(f"t2 override for {bits!r} must be positive")
        offset.setflags(write=False)
        coupling.setflags(write=False)
        object.__setattr__(self, "n_register", n)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "t2", float(self.t2))
        object.__setattr__(self, "t2_override", override)

    @classmethod
    def build(cls, n_register, couplings, offsets=None, t2=1.0, t2_override=None):
        """Construct from sparse dictionaries.

        ``couplings`` maps ``(j, k)`` pairs to J in Hz and is symmetrised;
        ``offsets`` maps spin index to Hz (missing spins sit at 0 Hz).
        """
        size = n_register + 1
        coupling = np.zeros((size, size))
        for (j, k), value in couplings.items():
            if j == k:
                raise ValueError(f"self-coupling J[{j}][{k}] is not allowed")
            coupling[j, k] = coupling[k, j] = value
        offset = np.zeros(size)
        for j, value in (offsets or {}).items():
            offset[j] = value
        return cls(n_register, offset, coupling, t2, t2_override or {})

    @property
    def n_spins(self):
        return self.n_register + 1

    @property
    def dim(self):
        return 2 ** self.n_spins

    def t2_for(self, bits):
        """T2 in seconds of the ancilla transition labelled by ``bits``."""
        return self.t2_override.get(bits, self.t2)

    def __repr__(self):
        return (
            f"SpinSystem(n_register={self.n_register}, offset={self.offset.tolist()}, "
            f"coupling={self.coupling.tolist()}, t2={self.t2})"
        )


@dataclass(frozen=True)
class BasisState:
    """Computational basis state ``|ancilla, register>``."""

    ancilla: int
    register: str

    def __post_init__(self):
        if self.ancilla not in (0, 1):
            raise ValueError(f"ancilla bit must be 0 or 1, got {self.ancilla!r}")
        _check_bits(self.register, len(self.register))

    @property
    def n_register(self):
        return len(self.register)

    @property
    def bits(self):
        """All n+1 bits, ancilla first."""
        return (self.ancilla,) + tuple(int(c) for c in self.register)

    @property
    def index(self):
        return (self.ancilla << self.n_register) | bits_to_int(self.register)

    @classmethod
    def from_index(cls, index, n_register):
        mask = (1 << n_register) - 1
        return cls(index >> n_register, int_to_bits(index & mask, n_register))

    def __str__(self):
        return f"|{self.ancilla},{self.register}>"


@dataclass(frozen=True)
class TransitionTable:
    """Ancilla line frequencies keyed by register bitstring.

    ``rows`` holds ``(bitstring, frequency_hz)`` sorted by descending
    frequency, i.e. left to right as drawn on an NMR axis.
    """

    rows: tuple

    @property
    def bitstrings(self):
        return [bits for bits, _ in self.rows]

    @property
    def frequencies(self):
        return np.array([freq for _, freq in self.rows])

    def frequency(self, bits):
        for b, freq in self.rows:
            if b == bits:
                return freq
        raise KeyError(bits)

    @property
    def span(self):
        freqs = self.frequencies
        return float(freqs.max() - freqs.min())

    @property
    def min_gap(self):
        """Smallest spacing between adjacent lines (inf for a single line)."""
        if len(self.rows) < 2:
            return float("inf")
        return float(np.min(-np.diff(self.frequencies)))

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


@dataclass
class ValidationReport:
    violations: list
    min_gap: float
    resolution: float

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        lines = [f"min transition gap: {self.min_gap:.6g} Hz (resolution {self.resolution:.6g} Hz)"]
        if self.ok:
            lines.append("no violations")
        lines.extend(f"violation: {v}" for v in self.violations)
        return "\n".join(lines)


def bits_to_int(bits):
    return int(bits, 2) if bits else 0


def int_to_bits(value, width):
    return format(value, f"0{width}b") if width else ""


def all_bitstrings(n):
    return ["".join(p) for p in product("01", repeat=n)]


def _check_bits(bits, n):
    if len(bits) != n or any(c not in "01" for c in bits):
        raise ValueError(f"expected a bitstring of length {n}, got {bits!r}")


def _n_spins(system):
    """Total spin count for a SpinSystem or a bare register count."""
    if isinstance(system, SpinSystem):
        return system.n_spins
    return int(system) + 1


def embed_single_spin(kind, spin, system):
    """Embed a 2x2 single-spin operator at position ``spin``.

    Parameters
    ----------
    kind : {'Ialpha', 'Ibeta', 'Ix', 'Iy', 'Iz', 'Iplus', 'Iminus'}
    spin : int
        0 for the ancilla, 1..n for register spins.
    system : SpinSystem or int
        The system, or its register-spin count.

    Returns
    -------
    ndarray
        Dense complex matrix of dimension 2**(n+1).
    """
    n_spins = _n_spins(system)
    if kind not in _SINGLE or kind == "Identity":
        raise ValueError(f"unknown single-spin operator {kind!r}")
    if not 0 <= spin < n_spins:
        raise IndexError(f"spin index {spin} out of range for {n_spins} spins")
    factors = [_SINGLE[kind] if j == spin else _SINGLE["Identity"] for j in range(n_spins)]
    return reduce(np.kron, factors)


def product_state(pattern):
    """Kronecker product of per-spin polarization factors.

    ``pattern`` lists one of ``'Ialpha'``, ``'Ibeta'`` or ``'Identity'``
    per spin, ancilla first.
    """
    allowed = ("Ialpha", "Ibeta", "Identity")
    if not pattern:
        raise ValueError("pattern must name at least one spin")
    for p in pattern:
        if p not in allowed:
            raise ValueError(f"pattern entries must be one of {allowed}, got {p!r}")
    return reduce(np.kron, [_SINGLE[p] for p in pattern])


def collective(kind, subset, system):
    """Sum of embedded single-spin operators over ``subset``.

    ``kind`` is one of Fx, Fy, Fz, Fplus, Fminus.
    """
    if kind not in _COLLECTIVE:
        raise ValueError(f"unknown collective operator {kind!r}")
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("collective operator needs a nonempty spin subset")
    return sum(embed_single_spin(_COLLECTIVE[kind], k, system) for k in subset)


def eigen_energy(system, state):
    """Closed-form energy of a basis state in rad/s (no diagonalization)."""
    if state.n_register != system.n_register:
        raise ValueError("basis state does not match the system size")
    signs = np.array([(-1) ** b for b in state.bits], dtype=float)
    omega = 2 * np.pi * system.offset
    energy = np.dot(signs, omega)
    for j, k in combinations(range(system.n_spins), 2):
        energy += np.pi * system.coupling[j, k] * signs[j] * signs[k]
    return 0.5 * energy


def build_hamiltonian(system):
    """Weak-coupling Hamiltonian in rad/s as a dense (diagonal) matrix."""
    H = np.zeros((system.dim, system.dim), dtype=complex)
    for j in range(system.n_spins):
        H += 2 * np.pi * system.offset[j] * embed_single_spin("Iz", j, system)
    for j, k in combinations(range(system.n_spins), 2):
        J = system.coupling[j, k]
        if J:
            H += 2 * np.pi * J * embed_single_spin("Iz", j, system) @ embed_single_spin("Iz", k, system)
    return H


def hamiltonian_diagonal(system, couplings=None):
    """Diagonal of H in rad/s, optionally restricted to some coupled pairs.

    ``couplings`` is None (all couplings), False (chemical shifts only), or
    an iterable of ``(j, k)`` pairs to keep.
    """
    n = system.n_spins
    idx = np.arange(system.dim)
    # z eigenvalue +1/2 or -1/2 of each spin for every basis index
    mz = 0.5 - ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1)
    diag = mz @ (2 * np.pi * system.offset)
    if couplings is False:
        return diag
    if couplings is None or couplings is True:
        pairs = combinations(range(n), 2)
    else:
        pairs = {tuple(sorted(p)) for p in couplings}
    for j, k in pairs:
        diag = diag + 2 * np.pi * system.coupling[j, k] * mz[:, j] * mz[:, k]
    return diag


def _ancilla_frequencies(system):
    n = system.n_register
    out = {}
    for bits in all_bitstrings(n):
        signs = np.array([(-1) ** int(c) for c in bits], dtype=float)
        out[bits] = float(system.offset[0] + 0.5 * np.dot(system.coupling[0, 1:], signs))
    return out


def transition_table(system, resolution=0.0):
    """Ancilla transition frequencies in Hz, highest first.

    Raises
    ------
    DegenerateTransitions
        If two lines lie within ``resolution`` Hz of each other.
    """
    freqs = _ancilla_frequencies(system)
    rows = tuple(sorted(freqs.items(), key=lambda r: (-r[1], r[0])))
    table = TransitionTable(rows)
    tol = max(resolution, 1e-9)
    for (b1, f1), (b2, f2) in zip(rows, rows[1:]):
        if f1 - f2 <= tol:
            raise DegenerateTransitions(
                f"transitions {b1} and {b2} are {f1 - f2:.6g} Hz apart (resolution {resolution:g} Hz)"
            )
    return table


def validate(system, resolution):
    """Check the working-medium assumptions; never raises."""
    violations = []
    J = system.coupling
    if not np.allclose(J, J.T, rtol=0, atol=1e-12):
        bad = [(j, k) for j, k in combinations(range(system.n_spins), 2) if J[j, k] != J[k, j]]
        violations.append("coupling matrix not symmetric at " + ", ".join(f"J.{j}.{k}" for j, k in bad))
    if np.any(np.diag(J) != 0):
        violations.append("coupling matrix has nonzero diagonal")
    for k in range(1, system.n_spins):
        if J[0, k] == 0:
            violations.append(f"ancilla decoupled from spin {k}")
    rows = sorted(_ancilla_frequencies(system).items(), key=lambda r: (-r[1], r[0]))
    gaps = [(f1 - f2, b1, b2) for (b1, f1), (b2, f2) in zip(rows, rows[1:])]
    min_gap = min((g for g, _, _ in gaps), default=float("inf"))
    for gap, b1, b2 in gaps:
        if gap <= 1e-9:
            violations.append(f"degenerate transitions {b1} and {b2}")
        elif gap <= resolution:
            violations.append(
                f"near-degenerate transitions {b1} and {b2} (gap {gap:.6g} Hz <= resolution {resolution:g} Hz)"
            )
    return ValidationReport(violations, float(min_gap), float(resolution))


def alanine(t2=1.0):
    """The 13C-labelled alanine example: J_01 = 35.1 Hz, J_02 = 54.2 Hz."""
    return SpinSystem.build(2, {(0, 1): 35.1, (0, 2): 54.2}, t2=t2)
