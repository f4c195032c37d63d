"""mildlab: mild solutions of semilinear evolution equations under singular perturbation.

The library computes mild solutions u(t) = e^{tA} x + int_0^t e^{(t-s)A}
F(s, u(s)) ds two independent ways (a weighted-norm fixed-point iteration and
an exponential Euler stepper), builds discretised model families whose
generators degenerate along a parameter sweep, and quantifies how the full
solutions approach the limit system: uniformly down to t = 0 when the initial
state lies in the regularity space, and only away from t = 0 otherwise.
"""

from .convergence import (
    IRREGULAR,
    NON_CONVERGENT,
    REGULAR,
    ConvergenceReport,
    ErrorTriple,
    classify,
    error_metrics,
    folk_property_harness,
    sweep,
)
from .errors import (
    ConfigError,
    ContractionViolatedError,
    IllConditionedResolventError,
    MildLabError,
    NoConvergenceError,
    NoLimitError,
    NumericalOverflowError,
    SweepError,
)
from .models import (
    MckParams,
    ModelPair,
    PoolGeometry,
    build_custom_matrix,
    build_keener,
    build_mck,
    build_neuro,
    build_thin_layer,
    build_thin_layer_pair,
    form_monotonicity_check,
    thin_layer_limit,
)
from .operators import (
    SUP,
    WEIGHTED_L1,
    WEIGHTED_L2,
    Generator,
    GridMeta,
    Projection,
    StateVector,
    dissipativity_check,
    expm_apply,
    limit_projection,
    neumann_laplacian_1d,
    resolvent_apply,
    state_norm,
)
from .solver import (
    BieleckiWeight,
    Nonlinearity,
    PicardInfo,
    Trajectory,
    bielecki_norm,
    contraction_diagnostics,
    expeuler_solve,
    picard_solve,
)

__version__ = "0.1.0"
