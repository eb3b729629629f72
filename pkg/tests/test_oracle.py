import math

import numpy as np
import pytest

from nmrfetch import (
    BasisState,
    Delay,
    Gradient,
    NonUnitaryEvent,
    Rotation,
    SpinSystem,
    apply_query,
    compile_oracle,
    controlled_flip_sequence,
    ensemble_query,
    prepare_I0alpha,
    pulse_unitary,
    query_value,
    sub_ensembles,
)
from nmrfetch.oracle import compare_unitaries, parse_marked
from nmrfetch.prep import DeviationDensity

from conftest import random_marked

# the 8x8 query matrix for marked = {10, 11}, rows/cols ordered |a i1 i2>
PERM_10_11 = np.array(
    [
        [1, 0, 0, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 0, 0],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 0, 0],
    ]
)


def expected_image(label, marked):
    """Brute-force string version of |a, x> -> |a xor [x in M], x>."""
    a, x = label[0], label[1:]
    if x in marked:
        a = "1" if a == "0" else "0"
    return a + x


def test_alanine_matrix(ala):
    U = compile_oracle(ala, {"10", "11"}).matrix
    np.testing.assert_array_equal(U, PERM_10_11)


def test_empty_marked_is_identity(ala):
    np.testing.assert_array_equal(compile_oracle(ala, set()).matrix, np.eye(8))


def test_single_marked_n3():
    U = compile_oracle(3, {"101"}).matrix
    for b in range(16):
        label = format(b, "04b")
        e = np.zeros(16)
        e[b] = 1
        target = int(expected_image(label, {"101"}), 2)
        assert np.argmax(U @ e) == target
    moved = [b for b in range(16) if U[b, b] == 0]
    assert moved == [0b0101, 0b1101]


def test_bad_bitstring_length(ala):
    with pytest.raises(ValueError):
        compile_oracle(ala, {"1"})
    with pytest.raises(ValueError):
        compile_oracle(ala, {"1x"})


@pytest.mark.parametrize("n", range(1, 6))
def test_oracle_structure_random(rng, n):
    for _ in range(10):
        marked = random_marked(rng, n)
        U = compile_oracle(n, marked).matrix
        assert set(np.unique(U)) <= {0.0, 1.0}
        assert np.all(U.sum(axis=0) == 1) and np.all(U.sum(axis=1) == 1)
        np.testing.assert_array_equal(U @ U, np.eye(2 ** (n + 1)))
        for b in range(2 ** (n + 1)):
            label = format(b, f"0{n + 1}b")
            col = U[:, b]
            assert int(np.argmax(col)) == int(expected_image(label, marked), 2)


def test_apply_query_examples(ala):
    state = prepare_I0alpha(ala)
    assert np.allclose(apply_query(state, compile_oracle(ala, set())).matrix, state.matrix)
    oracle = compile_oracle(ala, {"10", "11"})
    out = apply_query(state, oracle)
    np.testing.assert_allclose(np.diag(out.matrix), 0.5 * np.array([1, 1, -1, -1, -1, -1, 1, 1]), atol=1e-15)
    np.testing.assert_allclose(apply_query(out, oracle).matrix, state.matrix, atol=1e-15)
    with pytest.raises(ValueError):
        apply_query(np.eye(4), oracle)


def test_apply_query_preserves_spectrum(rng):
    for n in range(1, 4):
        A = rng.normal(size=(2 ** (n + 1),) * 2)
        rho = A + A.T
        out = apply_query(rho, compile_oracle(n, random_marked(rng, n))).matrix
        np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-10)


def _register_projector(bits):
    n = len(bits)
    rho = np.zeros((2**n, 2**n))
    rho[int(bits, 2), int(bits, 2)] = 1
    return rho


def test_query_value_pure_items():
    oracle = compile_oracle(2, {"10", "11"})
    assert query_value(_register_projector("00"), oracle) == pytest.approx(0.5, abs=1e-12)
    assert query_value(_register_projector("11"), oracle) == pytest.approx(-0.5, abs=1e-12)


def test_query_value_uniform_mixture():
    oracle = compile_oracle(2, {"11"})
    assert query_value(np.eye(4) / 4, oracle) == pytest.approx(0.25, abs=1e-12)


def test_query_value_prepared_state(ala):
    # full prepared state holds all four items with weight 1
    oracle = compile_oracle(ala, {"10", "11"})
    assert query_value(prepare_I0alpha(ala), oracle) == pytest.approx(0.0, abs=1e-12)
    oracle = compile_oracle(ala, {"11"})
    assert query_value(prepare_I0alpha(ala), oracle) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", range(1, 5))
def test_query_value_brute_force(rng, n):
    for _ in range(10):
        marked = random_marked(rng, n)
        pops = rng.random(2**n) * (rng.random(2**n) < 0.7)
        items = [format(i, f"0{n}b") for i in range(2**n)]
        expected = sum(0.5 * p * (-1 if x in marked else 1) for p, x in zip(pops, items))
        oracle = compile_oracle(n, marked)
        assert query_value(np.diag(pops), oracle) == pytest.approx(expected, abs=1e-12)
        subs = [(p, BasisState(0, x)) for p, x in zip(pops, items)]
        assert ensemble_query(subs, oracle) == pytest.approx(expected, abs=1e-10)


def test_ensemble_query_examples(ala):
    oracle = compile_oracle(ala, {"10", "11"})
    subs = sub_ensembles(prepare_I0alpha(ala), ala)
    assert ensemble_query(subs, oracle) == pytest.approx(0.0, abs=1e-10)
    assert ensemble_query([(1.0, BasisState(0, "01"))], oracle) == pytest.approx(0.5)
    assert ensemble_query([], oracle) == 0
    with pytest.raises(ValueError):
        ensemble_query([(-1.0, BasisState(0, "01"))], oracle)


def test_query_value_dimension_check():
    with pytest.raises(ValueError):
        query_value(np.eye(3), compile_oracle(2, set()))


def test_pulse_unitary_trivial(ala):
    np.testing.assert_allclose(pulse_unitary([Delay(0.0)], ala), np.eye(8))
    seq = [Rotation("y", math.pi / 2, (1,)), Rotation("-y", math.pi / 2, (1,))]
    np.testing.assert_allclose(pulse_unitary(seq, ala), np.eye(8), atol=1e-15)
    with pytest.raises(NonUnitaryEvent):
        pulse_unitary([Gradient()], ala)
    with pytest.raises(ValueError):
        pulse_unitary([], ala)


def test_pulse_unitary_order(ala):
    # first event acts first: y90 then x90 differs from the reverse
    a, b = Rotation("y", math.pi / 2, (0,)), Rotation("x", math.pi / 2, (0,))
    from nmrfetch.prep import rotation_operator

    expected = rotation_operator(b, 3) @ rotation_operator(a, 3)
    np.testing.assert_allclose(pulse_unitary([a, b], ala), expected)


@pytest.mark.parametrize("mode", ["decoupled", "refocused"])
def test_controlled_flip_matches_permutation_up_to_phases(ala, mode):
    U = pulse_unitary(controlled_flip_sequence(ala, 1, mode), ala)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(8), atol=1e-12)
    cmp = compare_unitaries(U, PERM_10_11)
    assert cmp["max_modulus_difference"] < 1e-12
    assert cmp["diagonal_phase_equivalent"]


def test_controlled_flip_other_control():
    system = SpinSystem.build(3, {(0, 1): 31.0, (0, 2): 47.0, (0, 3): 22.0, (1, 2): 4.0})
    U = pulse_unitary(controlled_flip_sequence(system, 2, "refocused"), system)
    marked = {b for b in ["000", "001", "010", "011", "100", "101", "110", "111"] if b[1] == "1"}
    cmp = compare_unitaries(U, compile_oracle(system, marked).matrix)
    assert cmp["diagonal_phase_equivalent"]


def test_parse_marked():
    assert parse_marked("10, 11") == {"10", "11"}
    assert parse_marked("") == frozenset()
    assert parse_marked("none") == frozenset()


def test_density_wrapper_accepted(ala):
    oracle = compile_oracle(ala, {"01"})
    rho = DeviationDensity(np.diag(np.arange(8.0)))
    np.testing.assert_allclose(apply_query(rho, oracle).matrix, oracle.matrix @ rho.matrix @ oracle.matrix.T)
