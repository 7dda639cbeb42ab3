"""Equivalence testing of approximate parametric fit under L^p distances.

The central question is not whether a family fits exactly (it never does)
but whether its best-fitting member is provably within a margin epsilon of
the data-generating distribution, measured as an L^p norm between
distribution functions.  The package provides:

- exact piecewise evaluation of ||F_n - G||_p with certified error bounds,
- bootstrap tests that reject only when the data certify an epsilon-good
  fit (plus the dual test for certifying a bad one),
- the minimum certifiable margin and its improvement over the no-spread
  baseline (a point mass at the sample mean),
- Monte Carlo power studies over margin grids,
- a CLI over files (``agof --help``).

Hot numeric kernels run compiled via numba by default, with a vectorised
numpy fallback selected by AGOF_BACKEND=numpy.
"""

from .__about__ import __version__
from ._kernels import available_backends, backend_name, set_backend
from .bootstrap import (
    BootstrapConfig,
    BootstrapSummary,
    bootstrap_quantile,
    norms_to_csv,
    run_bootstrap,
)
from .decision import (
    TestConfig,
    TestReport,
    agof_test,
    dual_test,
    improvement_coefficient,
    improvement_ratio,
    min_margin,
    report_to_json,
    report_to_json_dict,
)
from .distances import (
    DistanceConfig,
    DistanceResult,
    analytic_distance,
    dirac_distance,
    empirical_model_distance,
)
from .errors import (
    AgofError,
    BootstrapDegeneracyError,
    DegenerateDataError,
    DegenerateFitError,
    DomainError,
    InputError,
    InsufficientDataError,
    PrecisionError,
    UnsupportedError,
)
from .families import (
    FamilyId,
    FittedModel,
    Params,
    Sample,
    cdf,
    dirac_model,
    draw_sample,
    exponential_model,
    log_likelihood,
    mixture_model,
    model_from_json,
    model_from_json_dict,
    model_mean,
    model_sd,
    model_to_json,
    model_to_json_dict,
    model_var,
    normal_model,
    projection_params,
    quantile,
    upper_quantile,
    weibull_model,
)
from .fitting import EmConfig, EmDetails, em_fit_mixture, fit_mle
from .power import PowerCurve, PowerStudyConfig, power_curve, size_calibration

__all__ = [
    "__version__",
    "available_backends",
    "backend_name",
    "set_backend",
    "BootstrapConfig",
    "BootstrapSummary",
    "bootstrap_quantile",
    "norms_to_csv",
    "run_bootstrap",
    "TestConfig",
    "TestReport",
    "agof_test",
    "dual_test",
    "improvement_coefficient",
    "improvement_ratio",
    "min_margin",
    "report_to_json",
    "report_to_json_dict",
    "DistanceConfig",
    "DistanceResult",
    "analytic_distance",
    "dirac_distance",
    "empirical_model_distance",
    "AgofError",
    "BootstrapDegeneracyError",
    "DegenerateDataError",
    "DegenerateFitError",
    "DomainError",
    "InputError",
    "InsufficientDataError",
    "PrecisionError",
    "UnsupportedError",
    "FamilyId",
    "FittedModel",
    "Params",
    "Sample",
    "cdf",
    "dirac_model",
    "draw_sample",
    "exponential_model",
    "log_likelihood",
    "mixture_model",
    "model_from_json",
    "model_from_json_dict",
    "model_mean",
    "model_sd",
    "model_to_json",
    "model_to_json_dict",
    "model_var",
    "normal_model",
    "projection_params",
    "quantile",
    "upper_quantile",
    "weibull_model",
    "EmConfig",
    "EmDetails",
    "em_fit_mixture",
    "fit_mle",
    "PowerCurve",
    "PowerStudyConfig",
    "power_curve",
    "size_calibration",
]
