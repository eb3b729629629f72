"""Lorentzian linewidth versus T2, fitted from the DFT spectrum."""
import math

import nmrfetch as nf
from nmrfetch.readout import fit_linewidth

for t2 in (0.25, 0.5, 1.0):
    system = nf.SpinSystem.build(1, {(0, 1): 50.0}, t2=t2)
    fwhm = 1 / (math.pi * t2)
    dwell = 1 / 256
    params = nf.AcqParams(dwell, 2 ** math.ceil(math.log2(10 / fwhm / dwell)))
    state = nf.readout_pulse(nf.prepare_I0alpha(system), system)
    spectrum = nf.dft_spectrum(nf.synthesize_fid(state, system, params))
    fitted, centre = fit_linewidth(spectrum, 25.0, 10 * fwhm)
    print(f"t2 {t2:4.2f} s: fitted FWHM {fitted:.4f} Hz, 1/(pi t2) {fwhm:.4f} Hz, centre {centre:+.4f} Hz, bin {params.resolution:.4f} Hz")
