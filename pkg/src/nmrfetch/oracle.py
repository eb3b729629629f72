"""Query oracle: compile a marked set into a unitary and evaluate f."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonUnitaryEvent
from .prep import Delay, Gradient, Rotation, as_density, evolution_phases, rotation_operator
from .spinops import _check_bits, bits_to_int, embed_single_spin, product_state


@dataclass(frozen=True, eq=False)
class OracleUnitary:
    matrix: np.ndarray
    marked: frozenset

    @property
    def dim(self):
        return self.matrix.shape[0]


def normalize_marked(marked, n_register):
    """Validate bitstrings and return them as a frozenset."""
    items = frozenset(marked)
    for bits in items:
        _check_bits(bits, n_register)
    return items


def parse_marked(text):
    """Parse comma-separated bitstrings; blank text or '-' means none."""
    text = text.strip()
    if text in ("", "-", "none"):
        return frozenset()
    return frozenset(item.strip() for item in text.split(",") if item.strip())


def compile_oracle(system, marked):
    """Permutation U with U|a, x> = |a XOR [x in marked], x>."""
    n = system.n_register if hasattr(system, "n_register") else int(system)
    items = normalize_marked(marked, n)
    flagged = {bits_to_int(b) for b in items}
    dim = 2 ** (n + 1)
    U = np.zeros((dim, dim))
    for col in range(dim):
        x = col & ((1 << n) - 1)
        row = col ^ (1 << n) if x in flagged else col
        U[row, col] = 1.0
    return OracleUnitary(U, items)


def _matrix(oracle):
    return oracle.matrix if isinstance(oracle, OracleUnitary) else np.asarray(oracle)


def apply_query(state, oracle):
    """One oracle call: rho -> U rho U^dagger."""
    state = as_density(state)
    U = _matrix(oracle)
    if U.shape != state.matrix.shape:
        raise ValueError(f"oracle dimension {U.shape} does not match state {state.matrix.shape}")
    return state.with_matrix(U @ state.matrix @ U.conj().T)


def query_value(state_in, oracle):
    """f = Tr{U I0^alpha rho_in U^dagger I_0z}.

    ``state_in`` is either a register-only density (dimension 2**n), which
    is extended with the ancilla in alpha, or a full-size state whose
    identity component (if any) is included before projecting.
    """
    U = _matrix(oracle)
    dim = U.shape[0]
    n = int(round(math.log2(dim))) - 1
    if hasattr(state_in, "full"):
        rho = state_in.full()
    else:
        rho = np.asarray(state_in, dtype=complex)
    proj = product_state(["Ialpha"] + ["Identity"] * n)
    if rho.shape == (dim // 2, dim // 2):
        rho = np.kron(np.eye(2), rho)
    elif rho.shape != (dim, dim):
        raise ValueError(f"state of shape {rho.shape} does not fit a {dim}-dim oracle")
    I0z = embed_single_spin("Iz", 0, n)
    return float(np.real(np.trace(U @ proj @ rho @ U.conj().T @ I0z)))


def ensemble_query(subs, oracle):
    """Weighted sum of f over pure sub-ensembles (a truly mixed input)."""
    U = _matrix(oracle)
    total = 0.0
    for weight, basis in subs:
        if weight < 0:
            raise ValueError("sub-ensemble weights must be non-negative")
        rho = np.zeros(U.shape, dtype=complex)
        rho[basis.index, basis.index] = 1.0
        total += weight * query_value(rho, U)
    return total


def pulse_unitary(sequence, system):
    """Net propagator of a pulse sequence (first event acts first).

    Raises
    ------
    NonUnitaryEvent
        If the sequence contains a gradient.
    """
    if not sequence:
        raise ValueError("pulse sequence is empty")
    U = np.eye(system.dim, dtype=complex)
    for event in sequence:
        if isinstance(event, Rotation):
            step = rotation_operator(event, system.n_spins)
        elif isinstance(event, Delay):
            step = np.diag(evolution_phases(system, event.duration, event.active_pairs()))
        elif isinstance(event, Gradient):
            raise NonUnitaryEvent("gradient events have no unitary representation")
        else:
            raise TypeError(f"unknown pulse event {event!r}")
        U = step @ U
    return U


def controlled_flip_sequence(system, control=1, mode="decoupled"):
    """Pulse sequence flipping the ancilla when register spin ``control`` is 1.

    The core is (pi/2)_-y^0, (pi/2)_-z^{0,c}, tau = 1/(2 J_0c), (pi/2)_y^0.
    ``mode`` decides what the other couplings do during tau:

    ``'decoupled'``
        only J_0c evolves (selective decoupling of everything else);
    ``'refocused'``
        all couplings evolve, with pi pulses on the other register spins
        at tau/2 and tau to cancel their couplings to the ancilla;
    ``'literal'``
        all couplings evolve freely.
    """
    J = system.coupling[0, control]
    if J == 0:
        raise ValueError(f"ancilla is not coupled to spin {control}")
    tau = 1.0 / (2.0 * abs(J))
    head = [
        Rotation("-y", math.pi / 2, (0,)),
        Rotation("-z", math.pi / 2, (0, control)),
    ]
    others = tuple(k for k in range(1, system.n_spins) if k != control)
    if mode == "decoupled":
        middle = [Delay(tau, ((0, control),))]
    elif mode == "literal":
        middle = [Delay(tau)]
    elif mode == "refocused":
        middle = [Delay(tau / 2)]
        if others:
            middle += [Rotation("x", math.pi, others), Delay(tau / 2), Rotation("-x", math.pi, others)]
        else:
            middle += [Delay(tau / 2)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return head + middle + [Rotation("y", math.pi / 2, (0,))]


def compare_unitaries(U_pulse, U_ref):
    """Matrix-level comparison of two unitaries.

    Returns a dict with the raw maximum deviation, the deviation of the
    moduli, and whether ``U_pulse`` equals ``U_ref`` up to a diagonal phase
    matrix (phases invisible to population readout).
    """
    U_pulse = np.asarray(U_pulse)
    U_ref = np.asarray(U_ref)
    raw = float(np.max(np.abs(U_pulse - U_ref)))
    modulus = float(np.max(np.abs(np.abs(U_pulse) - np.abs(U_ref))))
    D = U_pulse @ U_ref.conj().T
    off = D - np.diag(np.diag(D))
    return {
        "max_abs_difference": raw,
        "max_modulus_difference": modulus,
        "diagonal_phase_equivalent": bool(np.max(np.abs(off)) < 1e-9),
    }
