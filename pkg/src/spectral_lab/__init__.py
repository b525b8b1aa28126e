"""spectral-lab: numerical diagnostics for boundary values of sandwiched
resolvents on rigged Hilbert spaces."""

from .boundary import (
    BoundaryPath,
    IndexEstimate,
    LimitVerdict,
    blowup_rate,
    eigenvalue_escape_index,
    probe_limit,
    s_number_escape_index,
)
from .classify import (
    Evidence,
    ExperimentConfig,
    PointVerdict,
    STATUS_INCONCLUSIVE,
    STATUS_REGULAR,
    STATUS_SEMI_REGULAR,
    STATUS_SINGULAR_EVIDENCE,
    classify_point,
    parse_config,
    random_witnesses,
)
from .errors import (
    ConfigError,
    ConfigParseError,
    GapViolationError,
    ModelLoadError,
    ModelValidationError,
    NearSingularSolveError,
    NonHermitianError,
    NonNestedWarning,
    NotAtEigenvalueError,
    NotConvergedError,
    NotLocalizedError,
    RankDeficientRiggingError,
    RealAxisEvaluationError,
    ResonantCouplingError,
    ScheduleTooShortError,
    SpectralLabError,
    UnsupportedModelError,
)
from .experiment import ReportBundle, run_experiment
from .models import (
    BlockEigenvalueModel,
    FiniteMatrixModel,
    FreeJacobiModel,
    RiggedModel,
    ScalarCompactModel,
    SpectralDecomposition,
    dump_model,
    eigenvalue_multiplicity,
    free_jacobi_green,
    load_model,
    make_model,
    spectral_decomposition,
    spectral_diameter,
    spectral_projection,
)
from .plots import emit_plots
from .resolvent import (
    SandwichedResolvent,
    bare_sandwich,
    eigenvalues,
    fan_inequality_slack,
    imaginary_part_identity_residual,
    operator_norm,
    psd_sqrt,
    rank_truncation_residual,
    rigging_resolvent_norm,
    s_numbers,
    sandwiched_resolvent,
)
from .resonance import (
    CouplingSweep,
    ResonanceTrack,
    chordal_distance,
    oscillation_measure,
    regular_couplings,
    resonances_at,
    trace_resonances,
    vanishing_resonances,
)
from .subspaces import (
    Subspace,
    inclusion_defect,
    lippmann_schwinger_null_space,
    lippmann_schwinger_residual,
    max_principal_angle,
    nested_intersection,
    regularized_eigenspace,
    rigged_window_span,
    witness_independence_angle,
)

__version__ = "0.1.0"
