"""Exception hierarchy shared by all modules."""


class NMRFetchError(Exception):
    """Base class for every error raised by nmrfetch."""


class DegenerateTransitions(NMRFetchError):
    """Two ancilla lines coincide within the requested resolution."""


class NotDiagonal(NMRFetchError):
    """A state expected to hold only populations carries coherences."""


class NonUnitaryEvent(NMRFetchError):
    """A pulse sequence contains an event with no unitary representation."""


class SpectralFold(NMRFetchError):
    """A transition lies outside the Nyquist band and would alias."""


class NoPeaks(NMRFetchError):
    """No spectral extremum exceeds the detection threshold."""


class AmbiguousAssignment(NMRFetchError):
    """A peak lies within tolerance of more than one transition."""


class DuplicateAssignment(NMRFetchError):
    """Two peaks claim the same transition."""


class ConfigError(NMRFetchError):
    """Malformed or invalid experiment configuration."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
