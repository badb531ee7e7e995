"""Pseudo-spectral chemotaxis dynamics on the torus, the mixing flows that
suppress its blow-up, and the diagnostics that watch both."""

from .spectral import (
    Grid,
    NormConvention,
    ScalarField,
    SpectralCoeffs,
    dealias,
    invert_laplacian,
    laplacian,
    lp_norm,
    make_grid,
    project_low_modes,
    sobolev_norm,
    spectral_divergence,
    spectral_gradient,
    to_physical,
    to_spectral,
)
from .flows import (
    AlternatingShear,
    CellularFlow,
    FlowSpec,
    MollifiedFlow,
    MultiscaleMixer,
    ScaledFlow,
    ZeroFlow,
    make_cellular,
    make_multiscale_mixer,
    make_shear_alternating,
    mollify,
    scale_amplitude,
)
from .initial import (
    BlowupRecipe,
    blowup_parameters,
    gaussian_bump,
    radial_cutoff,
    random_smooth_field,
)
from .solver import (
    BLOWUP_DETECTED,
    COMPLETED,
    OVERFLOW,
    CflError,
    OverflowAbort,
    SimState,
    StepperConfig,
    admissible_dt,
    flow_map,
    ks_step,
    make_state,
    paired_run,
    run_simulation,
    transport_step,
)
from .diagnostics import (
    DetectorConfig,
    DiagnosticsRecord,
    MixingReport,
    ThresholdParams,
    b1_threshold,
    blowup_detect,
    cell_mixedness,
    decay_residual,
    duality_bound_check,
    inequality_ratios,
    linf_bound_check,
    moser_linf_iterate,
    record,
    safe_window,
    second_moment_rate,
)
from .config import RunConfig, parse_config, serialize_config
from .output import read_csv, read_snapshot, write_csv, write_outputs, write_snapshot

__version__ = "0.1.0"
