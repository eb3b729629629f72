"""State preparation: thermal state, r.f. pulses, gradients, sub-ensembles.

States are deviation density operators: the traceless part of the density
matrix that NMR actually observes. The identity component is carried as a
scalar (``DeviationDensity.identity``) only where the algebra needs it.

Evolution convention: rho -> exp(-iHt) rho exp(+iHt); pulses conjugate,
rho -> R rho R^dagger with R = exp(-i angle F_axis).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import NotDiagonal, NMRFetchError
from .spinops import BasisState, embed_single_spin, hamiltonian_diagonal

AXES = ("x", "y", "z", "-x", "-y", "-z")


@dataclass(frozen=True, eq=False)
class DeviationDensity:
    """Ensemble state as ``identity * 1 + matrix``.

    ``matrix`` is what pulses, evolution and detection act on. ``identity``
    records an implied multiple of the unit operator (0 unless restored on
    purpose, e.g. after :func:`prepare_I0alpha`).
    """

    matrix: np.ndarray
    identity: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] & (m.shape[0] - 1):
            raise ValueError(f"density matrix must be square with power-of-two size, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def full(self):
        """Matrix including the implied identity component."""
        return self.matrix + self.identity * np.eye(self.dim)

    def with_matrix(self, matrix):
        return DeviationDensity(matrix, self.identity)

    def is_diagonal(self, tol=1e-10):
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off), initial=0.0) <= tol)

    def __add__(self, other):
        return DeviationDensity(self.matrix + other.matrix, self.identity + other.identity)


def as_density(state):
    if isinstance(state, DeviationDensity):
        return state
    return DeviationDensity(state)


@dataclass(frozen=True)
class Rotation:
    """Hard pulse of ``angle`` radians about ``axis`` on ``targets``."""

    axis: str
    angle: float
    targets: tuple

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not math.isfinite(self.angle):
            raise ValueError("rotation angle must be finite")
        targets = tuple(sorted(set(self.targets)))
        if not targets:
            raise ValueError("rotation needs at least one target spin")
        object.__setattr__(self, "targets", targets)


@dataclass(frozen=True)
class Delay:
    """Free evolution under H for ``duration`` seconds.

    ``couplings`` selects the active J terms: True for all, False for none
    (chemical shift only), or a tuple of ``(j, k)`` pairs, which models
    selective decoupling of the remaining pairs.
    """

    duration: float
    couplings: object = True

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError("delay duration must be >= 0")
        if self.couplings not in (True, False):
            pairs = tuple(sorted(tuple(sorted(p)) for p in self.couplings))
            object.__setattr__(self, "couplings", pairs)

    def active_pairs(self):
        if self.couplings is True:
            return None
        return self.couplings


@dataclass(frozen=True)
class Gradient:
    """Ideal crusher gradient (zeroes every coherence of order p != 0)."""


def _spin_rotation(axis, angle):
    """exp(-i angle I_axis) for a single spin-1/2."""
    sign = -1.0 if axis.startswith("-") else 1.0
    a = axis[-1]
    c, s = math.cos(angle / 2), math.sin(angle / 2) * sign
    if a == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if a == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]])


def rotation_operator(event, n_spins):
    """Propagator of a Rotation on an ``n_spins`` system.

    The F_axis terms commute across spins, so the exponential factorises
    into single-spin rotations.
    """
    if max(event.targets) >= n_spins or min(event.targets) < 0:
        raise IndexError(f"rotation targets {event.targets} out of range for {n_spins} spins")
    R1 = _spin_rotation(event.axis, event.angle)
    eye = np.eye(2, dtype=complex)
    return reduce(np.kron, [R1 if j in event.targets else eye for j in range(n_spins)])


def thermal_state(system):
    """High-temperature equilibrium deviation: sum of I_jz over all spins."""
    return DeviationDensity(sum(embed_single_spin("Iz", j, system) for j in range(system.n_spins)))


def apply_pulse(state, event, system=None):
    state = as_density(state)
    n_spins = int(round(math.log2(state.dim)))
    R = rotation_operator(event, n_spins)
    return state.with_matrix(R @ state.matrix @ R.conj().T)


def evolution_phases(system, duration, couplings=None):
    """Diagonal of exp(-iHt) for the (diagonal) weak-coupling Hamiltonian."""
    return np.exp(-1j * hamiltonian_diagonal(system, couplings) * duration)


def free_evolve(state, duration, system, couplings=None):
    """Coherent evolution without relaxation.

    ``couplings`` follows the :class:`Delay` convention (None means all).
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    state = as_density(state)
    if duration == 0:
        return state
    u = evolution_phases(system, duration, couplings)
    return state.with_matrix(u[:, None] * state.matrix * u.conj()[None, :])


def magnetic_number(dim):
    """Total M = sum of m_z for every basis index."""
    n = int(round(math.log2(dim)))
    idx = np.arange(dim)
    ones = np.array([bin(i).count("1") for i in idx])
    return 0.5 * (n - 2 * ones)


def coherence_order(dim):
    """Matrix of p = M_r - M_s for each density-matrix element."""
    M = magnetic_number(dim)
    return np.rint(M[:, None] - M[None, :]).astype(int)


def gradient_crush(state):
    state = as_density(state)
    keep = coherence_order(state.dim) == 0
    return state.with_matrix(np.where(keep, state.matrix, 0))


def run_sequence(state, sequence, system):
    """Apply a list of Rotation/Delay/Gradient events in order."""
    state = as_density(state)
    for event in sequence:
        if isinstance(event, Rotation):
            state = apply_pulse(state, event)
        elif isinstance(event, Delay):
            state = free_evolve(state, event.duration, system, event.active_pairs())
        elif isinstance(event, Gradient):
            state = gradient_crush(state)
        else:
            raise TypeError(f"unknown pulse event {event!r}")
    return state


def prep_sequence(system):
    """(pi/2)_y on all register spins, then a crusher gradient."""
    seq = []
    if system.n_register:
        seq.append(Rotation("y", math.pi / 2, tuple(range(1, system.n_spins))))
    seq.append(Gradient())
    return seq


def prepare_I0alpha(system):
    """Prepare the ancilla-alpha state that spans every database item.

    The returned matrix is the deviation part I_0z; ``identity`` is set to
    1/2 so that ``full()`` gives I_0^alpha = 1/2 + I_0z.
    """
    state = run_sequence(thermal_state(system), prep_sequence(system), system)
    return DeviationDensity(state.matrix, identity=0.5)


def sub_ensembles(state, system, tol=1e-10):
    """Decompose a diagonal state into weighted computational basis states.

    Zero-weight entries are omitted. The identity component is included.
    """
    state = as_density(state)
    if not state.is_diagonal(tol):
        raise NotDiagonal("state has off-diagonal elements; it is not a classical mixture")
    weights = np.real(np.diag(state.full()))
    return [
        (float(w), BasisState.from_index(i, system.n_register))
        for i, w in enumerate(weights)
        if abs(w) > tol
    ]


# --- sequence listing format -------------------------------------------------
#
#   pulse <axis> <angle_deg> <targets>     e.g.  pulse -y 90 0
#   delay <seconds> [couplings=all|none|0-1,0-2]
#   grad
#
# '#' starts a comment; blank lines are ignored.

_PULSE_RE = re.compile(r"^pulse\s+(-?[xyz])\s+(\S+)\s+(\d+(?:,\d+)*)$")
_DELAY_RE = re.compile(r"^delay\s+(\S+)(?:\s+couplings=(\S+))?$")


class SequenceSyntaxError(NMRFetchError):
    pass


def parse_sequence(text):
    """Parse a pulse-sequence listing into events."""
    events = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "grad":
            events.append(Gradient())
            continue
        m = _PULSE_RE.match(line)
        if m:
            try:
                angle = math.radians(float(m.group(2)))
                targets = tuple(int(t) for t in m.group(3).split(","))
                events.append(Rotation(m.group(1), angle, targets))
            except ValueError as exc:
                raise SequenceSyntaxError(f"line {lineno}: {exc}") from None
            continue
        m = _DELAY_RE.match(line)
        if m:
            try:
                events.append(Delay(float(m.group(1)), _parse_couplings(m.group(2))))
            except ValueError as exc:
                raise SequenceSyntaxError(f"line {lineno}: {exc}") from None
            continue
        raise SequenceSyntaxError(f"line {lineno}: cannot parse {raw.strip()!r}")
    return events


def _parse_couplings(spec):
    if spec is None or spec == "all":
        return True
    if spec == "none":
        return False
    pairs = []
    for item in spec.split(","):
        j, sep, k = item.partition("-")
        if not sep:
            raise ValueError(f"bad coupling pair {item!r}")
        pairs.append((int(j), int(k)))
    return tuple(pairs)


def format_sequence(events):
    lines = []
    for ev in events:
        if isinstance(ev, Rotation):
            lines.append(f"pulse {ev.axis} {math.degrees(ev.angle):.12g} {','.join(map(str, ev.targets))}")
        elif isinstance(ev, Delay):
            if ev.couplings is True:
                tail = ""
            elif ev.couplings is False:
                tail = " couplings=none"
            else:
                tail = " couplings=" + ",".join(f"{j}-{k}" for j, k in ev.couplings)
            lines.append(f"delay {ev.duration:.12g}{tail}")
        else:
            lines.append("grad")
    return "\n".join(lines) + "\n"
