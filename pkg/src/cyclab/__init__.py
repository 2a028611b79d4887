"""cyclab: a numerical laboratory for cyclicity in weighted coefficient spaces.

The package studies when a function on the unit circle generates the whole
weighted space under multiplication by polynomials: it builds the relevant
analytic objects (outer functions, rational test functions, smooth functions
vanishing on thin sets), measures closed circle subsets (Cantor generators,
tube measures, covering numbers, dimension and divergence tests), and runs
the convex certificate searches whose small values witness cyclicity.
"""

# bound before the submodule imports: experiments reads it back from the
# partially initialized package when stamping run manifests
__version__ = "0.1.0"

from cyclab.analytic import (
    BoundaryModulus,
    DouglasResult,
    MoebiusExpansion,
    OuterFunction,
    VanishingProfile,
    douglas_seminorm,
    douglas_weights,
    h_k,
    m_epsilon,
    outer_from_modulus,
    outer_power_modulus,
    smooth_vanishing_function,
)
from cyclab.engine import (
    CertificateProblem,
    CertificateReport,
    DecayReport,
    InfimumResult,
    bicyclicity_infimum,
    certify_cyclic,
    classify_regime,
    forward_shift_infimum,
    lemma_kel_ratio,
    p_epsilon_decay,
    szego_lower_bound,
)
from cyclab.experiments import (
    ConfigError,
    ExperimentConfig,
    NumericalFailure,
    RunManifest,
    run,
    validate,
)
from cyclab.fourier import (
    FourierSeries,
    PowerLogSequence,
    SpaceIndex,
    dual_pairing,
    eval_on_grid,
    inclusion_holds,
    norm_ap_beta,
    powerlog_member,
    product,
    series_from_samples,
)
from cyclab.geometry import (
    ArcUnion,
    CantorSpec,
    CoveringProfile,
    box_dimension_estimate,
    cantor_build,
    cantor_spec_by_name,
    carleson_test,
    covering_number,
    covering_profile,
    distance_to_set,
    lambda_divergence_test,
    log_t_grid,
    middle_thirds_spec,
    non_carleson_n2_spec,
    tube_measure,
)
from cyclab.presets import (
    EPS_DECADE,
    build_function,
    build_set,
    moebius_gap_series,
    vanishing_profile,
    z_minus_1,
)

__all__ = [
    "ArcUnion",
    "BoundaryModulus",
    "CantorSpec",
    "CertificateProblem",
    "CertificateReport",
    "ConfigError",
    "CoveringProfile",
    "DecayReport",
    "DouglasResult",
    "EPS_DECADE",
    "ExperimentConfig",
    "FourierSeries",
    "InfimumResult",
    "MoebiusExpansion",
    "NumericalFailure",
    "OuterFunction",
    "PowerLogSequence",
    "RunManifest",
    "SpaceIndex",
    "VanishingProfile",
    "bicyclicity_infimum",
    "box_dimension_estimate",
    "build_function",
    "build_set",
    "cantor_build",
    "cantor_spec_by_name",
    "carleson_test",
    "certify_cyclic",
    "classify_regime",
    "covering_number",
    "covering_profile",
    "distance_to_set",
    "douglas_seminorm",
    "douglas_weights",
    "dual_pairing",
    "eval_on_grid",
    "forward_shift_infimum",
    "h_k",
    "inclusion_holds",
    "lambda_divergence_test",
    "lemma_kel_ratio",
    "log_t_grid",
    "m_epsilon",
    "middle_thirds_spec",
    "moebius_gap_series",
    "non_carleson_n2_spec",
    "norm_ap_beta",
    "outer_from_modulus",
    "outer_power_modulus",
    "p_epsilon_decay",
    "powerlog_member",
    "product",
    "run",
    "series_from_samples",
    "smooth_vanishing_function",
    "szego_lower_bound",
    "tube_measure",
    "validate",
    "vanishing_profile",
    "z_minus_1",
]
