"""Single-query fetching of marked items from an unsorted database,
simulated as an NMR ensemble experiment read out on an ancilla spectrum."""

from .acquire import (
    AcqParams,
    Fid,
    Spectrum,
    closed_form_spectrum,
    dft_spectrum,
    readout_pulse,
    synthesize_fid,
)
from .config import ExperimentConfig, load_config, parse_config
from .errors import (
    AmbiguousAssignment,
    ConfigError,
    DegenerateTransitions,
    DuplicateAssignment,
    NMRFetchError,
    NoPeaks,
    NonUnitaryEvent,
    NotDiagonal,
    SpectralFold,
)
from .experiment import ExperimentReport, run_experiment, run_pipeline
from .oracle import (
    OracleUnitary,
    apply_query,
    compile_oracle,
    controlled_flip_sequence,
    ensemble_query,
    pulse_unitary,
    query_value,
)
from .prep import (
    Delay,
    DeviationDensity,
    Gradient,
    Rotation,
    apply_pulse,
    free_evolve,
    gradient_crush,
    prepare_I0alpha,
    sub_ensembles,
    thermal_state,
)
from .readout import Peak, Readout, assign_peaks, detect_peaks, fetch_marked
from .spinops import (
    BasisState,
    SpinSystem,
    TransitionTable,
    alanine,
    build_hamiltonian,
    collective,
    eigen_energy,
    embed_single_spin,
    product_state,
    transition_table,
    validate,
)

__version__ = "0.1.0"
