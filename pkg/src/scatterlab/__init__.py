"""Scattering-type feature extractors on finite abelian groups and their energy-decay bounds."""
from .lca_group import (
    FrequencySet,
    GroupSpec,
    Signal,
    SpectralSignal,
    convolve,
    fourier,
    inverse_fourier,
    negate,
    power_set,
    sumset,
)
from .filter_frames import (
    FilterBank,
    FrameAudit,
    FrameError,
    audit,
    build_ideal_partition_bank,
    build_random_smooth_bank,
    singleton_partition_bank,
)
from .extractor_core import (
    BudgetExceeded,
    ConvolutionOperator,
    EnergyLedger,
    LayerSpec,
    MatrixOperator,
    check_assumption1,
    complete_to_parseval,
    mean_projector,
    nonexpansiveness_probe,
    propagate,
    scattering_layer,
)
from .decay_bounds import (
    BoundEntry,
    BoundReport,
    EigenWitness,
    HypothesisViolation,
    bound_report,
    certify,
    corollary1_bound,
    covering_number,
    find_gamma,
    thm3_bound,
    thm4_bound,
)

__version__ = "0.1.0"
