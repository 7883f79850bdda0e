"""Rank-based tests of independence between two elliptical random vectors.

The library standardizes each block with robust location and shape
estimates, reduces observations to spatial signs and radius ranks, and
tests block independence with sign, linear-score, normal-score, or
generic rank-score statistics alongside the Gaussian determinant test.
An efficiency engine computes asymptotic relative efficiencies, their
dominance properties, and the attainable lower bounds; a seeded Monte
Carlo harness calibrates sizes and compares powers.
"""
from .efficiency import (
    AREResult,
    BoundResult,
    CustomScores,
    GaussScores,
    Lemma1Record,
    Lemma2Record,
    UniformScores,
    are_vdw,
    are_wilcoxon,
    bessel_critical,
    c_functional,
    d_functional,
    extremal_location_score,
    extremal_radial_cdf,
    extremal_radial_density,
    family_for_nu,
    hl_lower_bound,
    hl_trend,
    omega_scale,
    table1,
    table2,
    table3,
    verify_lemma1,
    verify_lemma2,
)
from .errors import (
    BracketError,
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    EllrankError,
    ModelError,
    RangeError,
    SimulationError,
)
from .hypotests import (
    PairedSample,
    ScoreFunction,
    TestResult,
    custom_scores,
    rank_score_test,
    score_eval,
    sign_scores,
    sign_test,
    vdw_scores,
    vdw_test,
    wilcoxon_scores,
    wilcoxon_test,
    wilks_test,
)
from .kernels import backend_name
from .montecarlo import (
    METHOD_TAGS,
    SimConfig,
    SimReport,
    TestSummary,
    run_power_curve,
    run_study,
)
from .radial import (
    Custom,
    Extremal,
    Gaussian,
    KonijnModel,
    RadialModel,
    RngStream,
    StudentT,
    default_mixing,
    density,
    location_score,
    radial_cdf,
    radial_quantile,
    sample_konijn,
    sample_spherical,
)
from .ranksigns import (
    BlockData,
    ShapeEstimate,
    StandardizedBlock,
    moment_estimate,
    robust_estimate,
    spatial_median,
    standardize,
    tyler_shape,
)
from .specialfn import (
    DEFAULT_QUADRATURE,
    Integrand,
    QuadratureSpec,
    bessel_j,
    chi2_cdf,
    chi2_quantile,
    chi2_quantile_upper,
    f_cdf,
    find_root,
    integrate,
    ln_gamma,
    reg_inc_beta,
    reg_lower_gamma,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    # errors
    "EllrankError",
    "DomainError",
    "RangeError",
    "BracketError",
    "ConvergenceError",
    "DegenerateDataError",
    "ModelError",
    "SimulationError",
    # special functions and quadrature
    "Integrand",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "ln_gamma",
    "reg_lower_gamma",
    "reg_inc_beta",
    "f_cdf",
    "bessel_j",
    "chi2_cdf",
    "chi2_quantile",
    "chi2_quantile_upper",
    "integrate",
    "find_root",
    # radial models and sampling
    "Gaussian",
    "StudentT",
    "Extremal",
    "Custom",
    "RadialModel",
    "KonijnModel",
    "RngStream",
    "density",
    "location_score",
    "radial_cdf",
    "radial_quantile",
    "sample_spherical",
    "sample_konijn",
    "default_mixing",
    # standardization
    "BlockData",
    "ShapeEstimate",
    "StandardizedBlock",
    "spatial_median",
    "tyler_shape",
    "moment_estimate",
    "robust_estimate",
    "standardize",
    # tests
    "PairedSample",
    "TestResult",
    "ScoreFunction",
    "sign_scores",
    "wilcoxon_scores",
    "vdw_scores",
    "custom_scores",
    "score_eval",
    "wilks_test",
    "rank_score_test",
    "sign_test",
    "wilcoxon_test",
    "vdw_test",
    # efficiency engine
    "GaussScores",
    "UniformScores",
    "CustomScores",
    "AREResult",
    "BoundResult",
    "Lemma1Record",
    "Lemma2Record",
    "c_functional",
    "d_functional",
    "are_vdw",
    "are_wilcoxon",
    "bessel_critical",
    "omega_scale",
    "hl_lower_bound",
    "hl_trend",
    "extremal_radial_cdf",
    "extremal_radial_density",
    "extremal_location_score",
    "verify_lemma1",
    "verify_lemma2",
    "family_for_nu",
    "table1",
    "table2",
    "table3",
    # simulation harness
    "METHOD_TAGS",
    "SimConfig",
    "TestSummary",
    "SimReport",
    "run_study",
    "run_power_curve",
]
