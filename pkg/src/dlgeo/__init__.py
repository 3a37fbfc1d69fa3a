"""Numerical evaluation of the directed-landscape geodesic joint density
and the Gaussian rigidity limit of its conditional rescaling."""

from .contour import (
    ContourFamily,
    DecayCertificate,
    Lemma32ContourParams,
    PanelScheme,
    PathSegment,
    QuadratureGrid,
    build_lemma32_contours,
    build_paper_contours,
    build_saddle_contours,
    discretize,
    saddle_points,
)
from .density import (
    DensityQuery,
    NodeTuple,
    SeriesTermSpec,
    TruncationPolicy,
    H,
    cauchy_vandermonde,
    density_p,
    f1,
    f2,
    power_sums,
    term_T,
    z_integral,
)
from .errors import (
    BlowupError,
    BudgetError,
    CertificateError,
    ConvergenceError,
    DlgeoError,
    DomainError,
    GeometryError,
    InvariantError,
    SingularityError,
    TruncationWarning,
)
from .geodesic import (
    GeneralPointFrame,
    ScaledQuery,
    conditional_rescaled_density,
    joint_density,
    marginal_normalization,
    rescale_general,
    scaling_map,
)
from .asymptotics import (
    ConvergenceRecord,
    convergence_study,
    fgue_tail,
    gaussian_product,
    remark2_coefficient,
    remark2_probability,
    t11_leading,
)
from .logval import LogScaledValue
from .oracle import OracleReport, mc_estimate, t11_bruteforce, verify_suite, z_methods_compare
from .tracywidom import (
    F_gue,
    PainleveSolution,
    TWFunctions,
    airy_ai,
    airy_ai_prime,
    f_gue,
    fredholm_F,
    solve_hastings_mcleod,
)

__version__ = "0.1.0"
