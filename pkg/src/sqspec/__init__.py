"""sqspec: curvature power spectrum of the dissipative squeezed vacuum.

Library modules:

    background       quasi-de Sitter background and chain coefficients
    krylov           tridiagonal chain operator, recurrence polynomials,
                     squeezed-vacuum amplitude series
    squeeze_dynamics evolution of the squeeze parameters (r_k, phi_k)
    bogoliubov       (alpha_k, beta_k), mode functions, occupation
    spectrum         gamma_z ratio, anchored/first-principles power spectra
    config/pipeline  sweep configuration, orchestration, artifact emission

The `sqspec` CLI exposes the sweep, the oracle suite and config inspection.
"""

__version__ = "0.1.0"

from .background import (
    BackgroundParams,
    CouplingCoefficients,
    LanczosChain,
    couplings,
    lanczos_chain,
    scale_factor,
    z_rate,
)
from .bogoliubov import (
    BogoliubovPair,
    ModeSample,
    bd_mode,
    coefficients,
    mode_function,
    occupation,
    vacuum_kernel,
)
from .config import ConfigError, SweepConfig, load_config, parse_config, serialize
from .krylov import (
    AmplitudeDivergenceError,
    OtmssAmplitudes,
    TridiagonalLiouvillian,
    build_liouvillian,
    characteristic_poly_residual,
    meixner_poly,
    otmss_amplitudes,
    tmss_amplitudes,
)
from .pipeline import RunReport, make_k_grid, run_sweep, verify, write_outputs
from .spectrum import (
    PlanckAnchors,
    SpectrumRecord,
    bd_reference_power,
    curvature_power,
    fit_tilt,
    gamma_ratio,
    mode_power,
)
from .squeeze_dynamics import (
    CappedGrowthWarning,
    ModeResult,
    SqueezeState,
    StepBudgetError,
    StepSizeUnderflowError,
    Trajectory,
    evolve_grid,
    integrate,
    rhs_closed_reference,
    rhs_conformal,
    rhs_transformed,
)

__all__ = [
    "__version__",
    "BackgroundParams", "CouplingCoefficients", "LanczosChain",
    "couplings", "lanczos_chain", "scale_factor", "z_rate",
    "TridiagonalLiouvillian", "OtmssAmplitudes", "AmplitudeDivergenceError",
    "build_liouvillian", "meixner_poly", "characteristic_poly_residual",
    "otmss_amplitudes", "tmss_amplitudes",
    "SqueezeState", "Trajectory", "ModeResult",
    "CappedGrowthWarning", "StepSizeUnderflowError", "StepBudgetError",
    "rhs_conformal", "rhs_transformed", "rhs_closed_reference",
    "integrate", "evolve_grid",
    "BogoliubovPair", "ModeSample", "bd_mode", "coefficients",
    "mode_function", "occupation", "vacuum_kernel",
    "PlanckAnchors", "SpectrumRecord", "gamma_ratio", "bd_reference_power",
    "mode_power", "curvature_power", "fit_tilt",
    "SweepConfig", "ConfigError", "load_config", "parse_config", "serialize",
    "RunReport", "make_k_grid", "run_sweep", "write_outputs", "verify",
]
