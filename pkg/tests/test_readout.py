import numpy as np
import pytest

from nmrfetch import (
    AcqParams,
    AmbiguousAssignment,
    DuplicateAssignment,
    NoPeaks,
    Peak,
    Spectrum,
    SpinSystem,
    apply_query,
    assign_peaks,
    closed_form_spectrum,
    compile_oracle,
    detect_peaks,
    fetch_marked,
    prepare_I0alpha,
    readout_pulse,
    transition_table,
)
from nmrfetch.acquire import dft_frequencies
from nmrfetch.readout import fit_linewidth

from conftest import random_marked, random_system

IX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)


def spectrum_for(system, marked, grid=None):
    state = readout_pulse(apply_query(prepare_I0alpha(system), compile_oracle(system, marked)), system)
    if grid is None:
        params = AcqParams.auto(system)
        grid = dft_frequencies(params.points, params.dwell)
    return state, closed_form_spectrum(state, system, grid)


def test_single_positive_line():
    s = SpinSystem.build(0, {}, {0: 10.0}, t2=0.5)
    grid = np.arange(-32, 32, 0.125)
    spec = closed_form_spectrum(IX, s, grid)
    (peak,) = detect_peaks(spec, 0.2)
    assert peak.height > 0
    assert abs(peak.frequency - 10.0) <= 0.0625
    neg = Spectrum(spec.freqs, -spec.values, "closed_form")
    (peak,) = detect_peaks(neg, 0.2)
    assert peak.height < 0


def test_off_grid_line_interpolation():
    s = SpinSystem.build(0, {}, {0: 10.04}, t2=0.5)
    grid = np.arange(-32, 32, 0.125)
    (peak,) = detect_peaks(closed_form_spectrum(IX, s, grid))
    assert abs(peak.frequency - 10.04) < 0.01


def test_no_peaks():
    spec = Spectrum(np.arange(10.0), np.zeros(10, dtype=complex), "dft")
    with pytest.raises(NoPeaks):
        detect_peaks(spec)
    with pytest.raises(ValueError):
        detect_peaks(spec, 1.5)


def test_alanine_peaks(ala):
    _, spec = spectrum_for(ala, {"10", "11"})
    peaks = detect_peaks(spec)
    assert len(peaks) == 4
    assert sum(p.height > 0 for p in peaks) == 2
    assert [p.frequency for p in peaks] == sorted((p.frequency for p in peaks), reverse=True)
    assigned = assign_peaks(peaks, transition_table(ala), 19.1 / 4)
    assert [p.assigned for p in assigned] == ["00", "10", "01", "11"]


def test_assign_empty(ala):
    assert assign_peaks([], transition_table(ala), 1.0) == []


def test_assign_errors():
    s = SpinSystem.build(2, {(0, 1): 10.0, (0, 2): 11.0})
    table = transition_table(s)  # lines at +-10.5, +-0.5
    with pytest.raises(AmbiguousAssignment):
        assign_peaks([Peak(0.0, 1.0)], table, 0.6)
    with pytest.raises(DuplicateAssignment):
        assign_peaks([Peak(0.45, 1.0), Peak(0.55, -1.0)], table, 0.2)
    out = assign_peaks([Peak(5.0, 1.0)], table, 0.2)
    assert out[0].assigned is None


def test_fetch_marked_alanine(ala):
    _, spec = spectrum_for(ala, {"10", "11"})
    result = fetch_marked(spec, transition_table(ala))
    assert result.marked == {"10", "11"}
    assert result.unmarked == {"00", "01"}
    assert result.unseen == frozenset()
    down = [p for p in result.peaks if p.height < 0]
    assert [p.assigned for p in down] == ["10", "11"]  # left (higher frequency) first


def test_fetch_empty_and_all(ala):
    _, spec = spectrum_for(ala, set())
    assert fetch_marked(spec, transition_table(ala)).marked == frozenset()
    everything = {"00", "01", "10", "11"}
    _, spec = spectrum_for(ala, everything)
    assert fetch_marked(spec, transition_table(ala)).marked == everything


def test_unseen_reported(ala):
    # drop the 01 line by zeroing it out of the state
    state, _ = spectrum_for(ala, {"11"})
    m = state.matrix.copy()
    m[4 + 1, 1] = m[1, 4 + 1] = 0
    grid = np.linspace(-64, 64, 4097)
    spec = closed_form_spectrum(m, ala, grid)
    result = fetch_marked(spec, transition_table(ala))
    assert result.unseen == {"01"}
    assert result.marked == {"11"}


def test_sign_soundness(rng):
    for n in range(1, 5):
        system, _ = random_system(rng, n)
        marked = random_marked(rng, n)
        queried = apply_query(prepare_I0alpha(system), compile_oracle(system, marked))
        _, spec = spectrum_for(system, marked)
        result = fetch_marked(spec, transition_table(system))
        pops = np.real(np.diag(queried.full()))
        for p in result.peaks:
            i = int(p.assigned, 2)
            assert (p.height > 0) == (pops[i] > pops[(1 << n) | i])


def test_assignment_is_partial_injection(rng):
    system, _ = random_system(rng, 3)
    _, spec = spectrum_for(system, random_marked(rng, 3))
    result = fetch_marked(spec, transition_table(system))
    labels = [p.assigned for p in result.peaks if p.assigned]
    assert len(labels) == len(set(labels))


def test_fit_linewidth():
    t2 = 0.4
    s = SpinSystem.build(0, {}, {0: 5.0}, t2=t2)
    grid = np.arange(-20, 20, 0.02)
    fwhm, center = fit_linewidth(closed_form_spectrum(IX, s, grid), 5.0, 3.0)
    assert fwhm == pytest.approx(1 / (np.pi * t2), rel=1e-4)
    assert center == pytest.approx(5.0, abs=1e-4)
