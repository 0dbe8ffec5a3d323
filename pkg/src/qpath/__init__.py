"""Hausdorff lengths and effective dimensions of quantum paths in a Bose
condensate, from closed forms and from the moments of an evolved packet."""

from .closedform import (
    ClosedFormResult,
    LengthDefinition,
    Regime,
    aw_length_first,
    aw_length_rms,
    classical_limit_length,
    debroglie_conventional_length,
    debroglie_crossover_resolution,
    debroglie_dimension,
    debroglie_factor,
    debroglie_hausdorff_length,
    erf_phi,
    quantum_limit_length,
)
from .dispersion import DispersionSpec, Kind, ProbeConvention, energy, group_velocity, omega, phase
from .hausdorff import (
    HausdorffResult,
    Method,
    NumericSettings,
    PrefactorConvention,
    SweepTable,
    TimeScaling,
    estimate_dimension,
    figure_data,
    hausdorff_length,
    local_log_slope,
    sweep,
)
from .oracle import GridSpec, cartesian_moments, spectral_moments
from .packet import (
    Dim,
    QuadratureConfig,
    QuadratureError,
    SmearingKernel,
    WavePacketMoments,
    amplitude,
    moments,
    norm_invariance_check,
)
from .scales import (
    DimensionlessGroup,
    DomainError,
    FreeScale,
    PhysicalScales,
    free_particle_resolution,
    make_dimensionless,
    steps_count,
)

__version__ = "0.1.0"
