"""Two-step fourth-order solver for the time-variable-order fractional
mobile-immobile advection-dispersion equation, with a verification
harness for the scheme's coefficient and operator properties."""

from .errors import (
    DimensionError,
    DomainError,
    FracmimError,
    HistoryError,
    IndexRangeError,
    IterationLimitError,
    ParameterError,
    QuadratureError,
    SingularMatrixError,
    StepFailureError,
)
from .grid import (
    Grid1D,
    TimeMesh,
    convergence_rate,
    delta_t,
    delta_x_centered_half,
    discrete_l2_norm,
    inner_product,
    sup_l2_over_time,
)
from .kernel import (
    Family,
    HistoryBuffer,
    a_coeff,
    caputo_linear_in_time,
    caputo_quadrature_oracle,
    coeff_family,
    discrete_caputo,
    theta0,
    theta_weights,
)
from .linalg import BandedLU, GmresConfig, gmres_solve, lu_factor
from .problems import ProblemSpec, example1, example2, manufactured, resolve
from .scheme import MarchConfig, MarchResult, MarchState, Variant, march
from .spatial import (
    Pentadiagonal,
    apply_Lh,
    assemble_operator_matrix,
    matrix_A,
    matrix_A0,
    matrix_A1,
    matrix_A2,
    stencil_first,
    stencil_second,
)

__version__ = "0.1.0"
