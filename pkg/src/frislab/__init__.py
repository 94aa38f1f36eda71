"""Leakage-aware surface configuration for magnitude-only atomic receivers.

The package synthesizes correlated surface-assisted channels, scores
configurations by the closed-form quadrature-leakage objective, optimizes
beamformer / port subset / discrete phases by alternating blocks, detects
symbols from magnitude readouts, and runs seeded Monte-Carlo experiments.
"""

__version__ = "0.1.0"

from .channel import (
    AtomicPathParams,
    ChannelSet,
    FrisState,
    Geometry,
    PortCorrelation,
    build_correlation,
    center_port_set,
    codebook,
    equivalent_channel,
    sample_atomic_channel,
    sample_channel_set,
    sample_reference,
    sample_rician,
)
from .config import ConfigError, SystemConfig, load_config
from .detection import (
    DetectorInput,
    ZeroGainError,
    count_bit_errors,
    detect_exhaustive_ls,
    detect_scalar_ls,
    detect_wl_ls,
    detect_zf_known_phase,
)
from .estimator import LeakageMinimizer
from .harness import (
    BerRecord,
    ConvergenceRecord,
    ExperimentSpec,
    run_ber,
    run_ber_trials,
    run_convergence,
    timing_report,
)
from .measurement import (
    CalibratedLink,
    MeasurementConfig,
    ZeroSignalError,
    alignment_phasors,
    at_splitting_to_rabi,
    calibrate,
    linearized_residual,
    rabi_to_at_splitting,
    readout,
    scaled_reference,
)
from .modulation import SymbolModel, make_constellation
from .numerics import (
    AllZeroCoefficientsError,
    NonSymmetricError,
    QuarticCoefficients,
    StronglyIndefiniteError,
    min_eigenpair,
    psd_sqrt,
    quartic_roots,
    unit_circle_roots,
)
from .objective import LeakageContext, aligned_gain, cd_coefficients, leakage, leakage_of_gain
from .optimizer import (
    AOConfig,
    AOReport,
    TooLargeError,
    ao_solve,
    cd_refine_phases,
    cem_select_ports,
    continuous_phase_minimizer,
    exhaustive_config_search,
    real_embedding,
    update_beamformer,
)
