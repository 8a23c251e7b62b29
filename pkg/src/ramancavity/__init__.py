"""Open-system simulator and Gaussian analytics for equilibrium parametric
amplification in Raman-cavity hybrids."""

from .model import (
    OVERFLOW_THRESHOLD,
    ModelParams,
    ProbeParams,
    ScheduleParams,
    SystemState,
    SystemStateDerivative,
    coth_factor,
    drift,
    ramp_value,
    stability_threshold,
)
from .dynamics import (
    DivergedTrajectory,
    NoiseSpec,
    RngStream,
    sample_noise_increments,
    step,
)
from .ensemble import (
    AllTrajectoriesDiverged,
    EnsembleConfig,
    EnsembleResult,
    SteadyObservables,
    effective_temperature,
    relative_cooling,
    run_ensemble,
    sample_initial_state,
    steady_observables,
)
from .spectroscopy import (
    NoPeaksFound,
    PeakUnresolved,
    Spectrum,
    SpectrumRequest,
    find_peaks,
    numerical_rabi_splitting,
    raman_spectrum,
)
from .gaussian import (
    FrequencyGrid,
    GaussianSolution,
    NotConverged,
    PolaritonBranches,
    equilibrium_shift,
    linearized_modes,
    perturbative_fluctuations,
    polariton_frequencies,
    rabi_splitting,
    renormalized_cavity_freq,
    resonant_omega_c,
    selfconsistent_fluctuations,
    squeezing_force,
)
from .material import (
    MaterialParams,
    cavity_field_noise,
    coupling_from_material,
)

__version__ = "0.1.0"
