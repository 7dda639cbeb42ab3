"""Maximum-likelihood fitting: closed forms plus EM for Gaussian mixtures."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import rng as _rng
from . import _kernels
from .errors import (
    DegenerateDataError,
    DegenerateFitError,
    DomainError,
    InsufficientDataError,
    UnsupportedError,
)
from .families import FamilyId, FittedModel, Params, Sample

__all__ = ["EmConfig", "EmDetails", "fit_mle", "em_fit_mixture"]


@dataclass(frozen=True)
class EmConfig:
    """Hyperparameters for the mixture EM fit.

    variance_floor_factor scales the biased sample variance to give the
    floor applied to every component variance; flooring keeps each M-step a
    constrained maximiser, so the likelihood trace stays monotone.
    """

    restarts: int = 10
    max_iter: int = 500
    rel_tol: float = 1e-8
    variance_floor_factor: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.restarts, bool) or not isinstance(self.restarts, (int, np.integer)) or self.restarts < 1:
            raise DomainError(f"restarts must be a positive integer, got {self.restarts!r}")
        if isinstance(self.max_iter, bool) or not isinstance(self.max_iter, (int, np.integer)) or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if not (self.rel_tol > 0):
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol!r}")
        if not (0 < self.variance_floor_factor < 1):
            raise DomainError(
                f"variance_floor_factor must lie in (0, 1), got {self.variance_floor_factor!r}"
            )
        _rng.check_seed(self.seed)


@dataclass(frozen=True)
class EmDetails:
    """Audit record of one em_fit_mixture call: all restarts, not just the winner."""

    ll_traces: tuple
    ll_finals: tuple
    floored_flags: tuple
    chosen_restart: int
    variance_floor: float


def _fit_exponential(x: np.ndarray) -> np.ndarray:
    if np.any(x <= 0):
        raise DomainError("exponential fit requires strictly positive data")
    return np.array([float(x.mean())])


def _fit_normal(x: np.ndarray) -> np.ndarray:
    if x.size < 2:
        raise InsufficientDataError("normal fit requires at least 2 observations")
    m = float(x.mean())
    var = float(np.mean((x - m) ** 2))
    if var <= 0:
        raise DegenerateDataError("normal fit requires data with positive spread")
    return np.array([m, np.sqrt(var)])


def fit_values(family: FamilyId, x: np.ndarray, em: EmConfig | None = None) -> Params:
    """Fit on a bare sorted array; the fast path used by bootstrap replicates."""
    tag = family.tag
    if tag == "exponential":
        return Params(_fit_exponential(x))
    if tag == "normal":
        return Params(_fit_normal(x))
    if tag == "dirac":
        return Params(np.array([float(x.mean())]))
    if tag == "weibull":
        raise UnsupportedError("weibull is generator-only; fitting is not provided")
    return _em_values(x, family.k, em or EmConfig())


def fit_mle(family: FamilyId, sample: Sample, em: EmConfig | None = None) -> Params:
    """Maximum-likelihood parameters of family for the sample.

    Closed forms for exponential (mean, positive data required), normal
    (mean and biased-sd, n >= 2), dirac (mean); gaussian_mixture runs EM
    with restarts.  Weibull is rejected: it exists only as a generator.
    """
    return fit_values(family, sample.data, em=em)


def _em_values(x: np.ndarray, k: int, cfg: EmConfig) -> Params:
    params, _ = _run_em(x, k, cfg)
    return params


def _run_em(x: np.ndarray, k: int, cfg: EmConfig):
    n = x.size
    if n < 2 * k:
        raise InsufficientDataError(
            f"mixture fit with k={k} requires at least 2k={2 * k} observations, got {n}"
        )
    svar = float(np.mean((x - x.mean()) ** 2))
    if svar <= 0:
        raise DegenerateDataError("mixture fit requires data with positive spread")
    ssd = np.sqrt(svar)
    floor = cfg.variance_floor_factor * svar
    base_mu = np.quantile(x, [(j + 1.0) / (k + 1.0) for j in range(k)])

    best = None
    traces = []
    finals = []
    floored = []
    for r in range(cfg.restarts):
        gen = _rng.stream(cfg.seed, _rng.DOMAIN_EM, r)
        mu0 = base_mu + 0.1 * ssd * gen.standard_normal(k)
        w0 = np.full(k, 1.0 / k)
        var0 = np.full(k, svar)
        w, mu, var, trace, ll_final, all_floored = _kernels.em_gmm(
            np.ascontiguousarray(x, dtype=np.float64),
            w0, mu0, var0, cfg.max_iter, cfg.rel_tol, floor,
        )
        traces.append(np.asarray(trace))
        finals.append(float(ll_final))
        floored.append(bool(all_floored))
        # strict > keeps the lowest restart index on ties
        if best is None or ll_final > best[0]:
            best = (float(ll_final), r, w, mu, var)
    if all(floored):
        raise DegenerateFitError(
            "every EM restart collapsed onto the variance floor"
        )
    _, chosen, w, mu, var = best
    order = np.argsort(mu, kind="stable")
    w = np.maximum(w[order], 1e-15)
    w = w / w.sum()
    params = Params(np.concatenate([w, mu[order], np.sqrt(var[order])]))
    details = EmDetails(
        ll_traces=tuple(traces),
        ll_finals=tuple(finals),
        floored_flags=tuple(floored),
        chosen_restart=int(chosen),
        variance_floor=float(floor),
    )
    return params, details


def em_fit_mixture(sample: Sample, k: int, cfg: EmConfig | None = None,
                   return_details: bool = False):
    """EM fit of a k-component Gaussian mixture.

    Multiple restarts start from sample quantiles j/(k+1) plus seeded
    Gaussian jitter of 0.1 sample-sd; the restart with the best final
    log-likelihood wins, ties broken by restart index.  Components are
    returned sorted by ascending mean.
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    cfg = cfg or EmConfig()
    params, details = _run_em(sample.data, int(k), cfg)
    if return_details:
        return params, details
    return params


def em_with_seed(cfg: EmConfig, seed: int) -> EmConfig:
    """Copy of cfg with its stream rebased; used for per-replicate refits."""
    return replace(cfg, seed=seed)
