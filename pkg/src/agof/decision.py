"""Equivalence-style testing of approximate fit.

The primary test checks H0: ||F - G(theta_F)||_p >= epsilon against
H1: < epsilon, i.e. it rejects only when the data certify that the family
fits to within the margin.  Two rejection rules are provided:

- bootstrap1: reject iff 2*obs - q_alpha(boot) < epsilon, where q_alpha is
  the lower alpha-quantile of the replicate norms;
- bootstrap2: reject iff obs - sigma_boot * z_alpha < epsilon, with z_alpha
  the lower standard-normal alpha-quantile (negative for alpha < 1/2).

Both rules are monotone in epsilon, so each has a closed-form flip point:
the minimum certifiable margin min_margin with reject iff epsilon >
min_margin.  The improvement coefficient locates that margin relative to
the no-spread baseline, the point mass at the sample mean.

The dual test swaps the hypotheses (H0: distance <= epsilon) and rejects
iff epsilon < the mirrored margin built from the upper 1-alpha quantile.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import __about__
from ._kernels import backend_name
from .bootstrap import BootstrapConfig, BootstrapSummary, bootstrap_quantile, run_bootstrap
from .distances import DistanceConfig, _check_p, dirac_distance, empirical_model_distance
from .errors import DegenerateDataError, DomainError
from .families import FamilyId, FittedModel, Sample, model_mean, model_sd, model_to_json_dict
from .fitting import EmConfig, fit_mle

__all__ = [
    "TestConfig",
    "TestReport",
    "agof_test",
    "dual_test",
    "min_margin",
    "improvement_ratio",
    "improvement_coefficient",
    "report_to_json_dict",
    "report_to_json",
]

_METHODS = ("bootstrap1", "bootstrap2")

# warning codes
CONTACT_SET_CAVEAT = "CONTACT_SET_CAVEAT"
HEAVY_TAIL_HEURISTIC = "HEAVY_TAIL_HEURISTIC"


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest class, despite the name

    p: float
    epsilon: float
    alpha: float
    method: str
    bootstrap: BootstrapConfig
    em: EmConfig | None = None
    distance: DistanceConfig | None = None

    def __post_init__(self):
        if self.distance is None:
            object.__setattr__(self, "distance", DistanceConfig(p=self.p))
        elif _check_p(self.p) != self.distance.p:
            raise DomainError(
                f"p={self.p!r} disagrees with distance.p={self.distance.p!r}"
            )
        object.__setattr__(self, "p", self.distance.p)
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise DomainError(f"epsilon must be a positive real, got {self.epsilon!r}")
        if not (0.0 < self.alpha < 0.5):
            raise DomainError(f"alpha must lie in (0, 0.5), got {self.alpha!r}")
        if self.method not in _METHODS:
            raise DomainError(f"method must be one of {_METHODS}, got {self.method!r}")


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class, despite the name

    kind: str  # "agof" or "dual"
    obs_norm: float
    obs_error_bound: float
    model: FittedModel
    boot: BootstrapSummary
    reject_H0: bool
    min_margin: float
    improvement: float
    improvement_raw: float
    warnings: tuple[str, ...]

    @property
    def theta_hat(self):
        return self.model.params


def min_margin(obs_norm: float, boot: BootstrapSummary, alpha: float,
               method: str) -> float:
    """Flip point of the rejection rule: reject H0 iff epsilon > min_margin."""
    if method not in _METHODS:
        raise DomainError(f"method must be one of {_METHODS}, got {method!r}")
    if not (0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 0.5), got {alpha!r}")
    if not (np.isfinite(obs_norm) and obs_norm >= 0):
        raise DomainError(f"obs_norm must be a nonnegative real, got {obs_norm!r}")
    if method == "bootstrap1":
        return 2.0 * obs_norm - bootstrap_quantile(boot, alpha)
    return obs_norm - boot.sigma_boot * float(ndtri(alpha))


def _dual_margin(obs_norm: float, boot: BootstrapSummary, alpha: float,
                 method: str) -> float:
    if method == "bootstrap1":
        return 2.0 * obs_norm - bootstrap_quantile(boot, 1.0 - alpha)
    return obs_norm - boot.sigma_boot * float(ndtri(1.0 - alpha))


def improvement_ratio(min_margin_value: float, dirac_denominator: float):
    """(raw, clamped) improvement of the margin over the no-spread baseline.

    The margin is an infimum over positive candidate margins, so negative
    inputs are floored at zero before forming the ratio.
    """
    if not (np.isfinite(dirac_denominator) and dirac_denominator > 0):
        raise DomainError(
            f"baseline distance must be positive, got {dirac_denominator!r}"
        )
    if not np.isfinite(min_margin_value):
        raise DomainError(f"min_margin must be finite, got {min_margin_value!r}")
    raw = 1.0 - max(min_margin_value, 0.0) / dirac_denominator
    return float(raw), float(min(max(raw, 0.0), 1.0))


def improvement_coefficient(min_margin_value: float, sample: Sample, p):
    """(raw, clamped) improvement against the point mass at the sample mean."""
    denom = dirac_distance(sample, sample.mean, p).value
    if denom <= 0:
        raise DegenerateDataError(
            "improvement is undefined: all observations are identical"
        )
    return improvement_ratio(min_margin_value, denom)


def _warnings_for(p: float, method: str, sample: Sample, model: FittedModel):
    w = []
    if p == 1.0 and method == "bootstrap2":
        # the normal limit behind this rule needs a null contact set at p=1
        w.append(CONTACT_SET_CAVEAT)
    if p == 1.0:
        sd = model_sd(model)
        if sd > 0 and float(sample.data[-1]) > model_mean(model) + 20.0 * sd:
            w.append(HEAVY_TAIL_HEURISTIC)
    return tuple(w)


def _run(kind: str, sample: Sample, family: FamilyId, config: TestConfig,
         threads: int) -> TestReport:
    params = fit_mle(family, sample, em=config.em)
    model = FittedModel(family, params)
    obs = empirical_model_distance(sample, model, config.distance)
    boot = run_bootstrap(
        sample, family, config.p, config.bootstrap,
        em_config=config.em, distance_config=config.distance, threads=threads,
    )
    if kind == "agof":
        margin = min_margin(obs.value, boot, config.alpha, config.method)
        reject = bool(config.epsilon > margin)
    else:
        margin = _dual_margin(obs.value, boot, config.alpha, config.method)
        reject = bool(config.epsilon < margin)
    raw, clamped = improvement_coefficient(margin, sample, config.p)
    return TestReport(
        kind=kind,
        obs_norm=obs.value,
        obs_error_bound=obs.abs_error_bound,
        model=model,
        boot=boot,
        reject_H0=reject,
        min_margin=float(margin),
        improvement=clamped,
        improvement_raw=raw,
        warnings=_warnings_for(config.p, config.method, sample, model),
    )


def agof_test(sample: Sample, family: FamilyId, config: TestConfig,
              *, threads: int = 1) -> TestReport:
    """Test H0: distance >= epsilon; rejection certifies an epsilon-good fit.

    reject_H0 is equivalent to epsilon > report.min_margin by construction.
    """
    return _run("agof", sample, family, config, threads)


def dual_test(sample: Sample, family: FamilyId, config: TestConfig,
              *, threads: int = 1) -> TestReport:
    """Test H0: distance <= epsilon; rejection certifies a bad fit.

    reject_H0 is equivalent to epsilon < report.min_margin (the mirrored
    flip point stored in the same field).
    """
    return _run("dual", sample, family, config, threads)


def report_to_json_dict(report: TestReport, config: TestConfig) -> dict:
    return {
        "kind": report.kind,
        "obs_norm": report.obs_norm,
        "obs_error_bound": report.obs_error_bound,
        "theta_hat": model_to_json_dict(report.model),
        "boot": {
            "B": report.boot.B,
            "B_eff": report.boot.B_eff,
            "n_skipped": report.boot.n_skipped,
            "seed": report.boot.seed,
            "sigma_boot": report.boot.sigma_boot,
            "norms": [float(t) for t in report.boot.norms],
        },
        "reject_H0": report.reject_H0,
        "min_margin": report.min_margin,
        "improvement": report.improvement,
        "improvement_raw": report.improvement_raw,
        "warnings": list(report.warnings),
        "config": {
            "p": config.p,
            "epsilon": config.epsilon,
            "alpha": config.alpha,
            "method": config.method,
            "B": config.bootstrap.B,
            "seed": config.bootstrap.seed,
            "failure_policy": config.bootstrap.failure_policy,
            "max_skip_fraction": config.bootstrap.max_skip_fraction,
            "tail_u": config.distance.tail_u,
            "quad_rel_tol": config.distance.quad_rel_tol,
        },
        "engine": {
            "version": __about__.__version__,
            "backend": backend_name(),
        },
    }


def report_to_json(report: TestReport, config: TestConfig) -> str:
    return json.dumps(report_to_json_dict(report, config), indent=2) + "\n"
