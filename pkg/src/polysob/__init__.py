"""polysob: a desk-scale laboratory for sharp higher-order Sobolev constants,
polyharmonic bubble identities, and screened polyharmonic Green kernels on
R^n and model manifolds."""

from .constants import (
    DimensionPair,
    DivergenceError,
    SymbolicConstant,
    beta_exact,
    bubble_crit_mass,
    bubble_scale,
    c_green,
    c_small,
    critical_exponent,
    gamma_exact,
    radial_moment,
    sharp_constant,
    sphere_area,
)
from .radial import (
    HalfLaplacianConvention,
    RadialRational,
    apply_laplacian,
    bubble_fn,
    bubble_power,
    energy_integral,
    half_laplacian_energy,
    kernel_elements,
    verify_bubble_identity,
    verify_kernel_identity,
)
from .green import (
    BesselKernelSum,
    PartialFractionDecomp,
    c_U_constant,
    gamma_alpha,
    gamma_fn,
    l2_norm_sq,
    macdonald_K,
    mass_integral,
    singular_limit,
)
from .geometry import (
    ConformalGauge,
    FlatTorus,
    RadialMetricProfile,
    RoundSphere,
    conformal_dress,
    radial_profile,
    scalar_curvature,
    tensor_Tg_trace,
)
from .quotient import (
    QuotientCurve,
    SlopeFit,
    TestFunctionFamily,
    build_test_function,
    minimize_quotient,
    predicted_slope,
    probe_iopt,
    quotient_eval,
    sample_quotient_curve,
    slope_fit,
    theta_eps,
)
from .regimes import (
    BlowupParams,
    balance_table,
    gradient_energy_regime,
    l2_mass_regime,
    pohozaev_check,
    sigma_regime,
    theta_pair,
)
from .giraud import (
    EnvelopeKernel,
    convolve_radial,
    mc_convolve,
    mu_envelope_variant,
    regime_verify,
)

__version__ = "0.1.0"
