"""Parametric-free resampling of the fitted-distance statistic.

Each replicate resamples the data with replacement, refits the family, and
records the L^p distance between the resample's empirical cdf and its own
refit.  Replicate b draws from the counter-based stream (seed, b, attempt),
and results land in a slot indexed by b, so the summary is identical for
any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .distances import DistanceConfig, _empirical_pow, _value_and_bound
from .errors import AgofError, BootstrapDegeneracyError, DomainError
from .families import FamilyId, FittedModel, Params, Sample
from .fitting import EmConfig, em_with_seed, fit_values

__all__ = [
    "BootstrapConfig",
    "BootstrapSummary",
    "run_bootstrap",
    "bootstrap_quantile",
    "norms_to_csv",
]

_POLICIES = ("retry_once_then_skip", "abort")


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 2000
    seed: int = 0
    failure_policy: str = "retry_once_then_skip"
    max_skip_fraction: float = 0.01

    def __post_init__(self):
        if isinstance(self.B, bool) or not isinstance(self.B, (int, np.integer)) or self.B < 2:
            raise DomainError(f"B must be an integer >= 2, got {self.B!r}")
        _rng.check_seed(self.seed)
        if self.failure_policy not in _POLICIES:
            raise DomainError(
                f"failure_policy must be one of {_POLICIES}, got {self.failure_policy!r}"
            )
        if not (0.0 <= self.max_skip_fraction < 0.05):
            raise DomainError(
                f"max_skip_fraction must lie in [0, 0.05), got {self.max_skip_fraction!r}"
            )


@dataclass(frozen=True)
class BootstrapSummary:
    """Replicate norms (sorted ascending) and their dispersion."""

    norms: np.ndarray
    sigma_boot: float
    n_skipped: int
    B: int
    seed: int

    def __post_init__(self):
        v = np.array(self.norms, dtype=np.float64, copy=True).reshape(-1)
        v.flags.writeable = False
        object.__setattr__(self, "norms", v)

    @property
    def B_eff(self) -> int:
        return int(self.norms.size)


def _ceil_index(alpha: float, b_eff: int) -> int:
    # ceil(alpha * B) - 1, tolerating float fuzz when alpha*B is an integer
    m = alpha * b_eff
    r = round(m)
    if abs(m - r) <= 1e-9 * max(1.0, abs(m)):
        return max(int(r) - 1, 0)
    return max(int(math.ceil(m)) - 1, 0)


def bootstrap_quantile(summary: BootstrapSummary, alpha: float) -> float:
    """Order-statistic quantile: norms[ceil(alpha * B_eff) - 1], 1-indexed."""
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if summary.B_eff < 1:
        raise DomainError("summary holds no replicate norms")
    return float(summary.norms[_ceil_index(alpha, summary.B_eff)])


def _replicate_norm(b: int, data: np.ndarray, family: FamilyId,
                    dcfg: DistanceConfig, cfg: BootstrapConfig,
                    em: EmConfig | None):
    n = data.size
    last_error = None
    for attempt in (0, 1):
        gen = _rng.stream(cfg.seed, _rng.DOMAIN_BOOTSTRAP, b, attempt, 0)
        idx = gen.integers(0, n, size=n)
        resample = np.sort(data[idx], kind="stable")
        try:
            em_b = None
            if em is not None:
                em_b = em_with_seed(
                    em, _rng.child_seed(cfg.seed, _rng.DOMAIN_BOOTSTRAP, b, attempt, 1)
                )
            params = fit_values(family, resample, em=em_b)
            model = FittedModel(family, params)
            ipow, err = _empirical_pow(resample, model, dcfg)
            return _value_and_bound(ipow, err, dcfg.p)[0], None
        except AgofError as exc:
            last_error = exc
            if cfg.failure_policy == "abort":
                break
    return None, last_error


def run_bootstrap(sample: Sample, family: FamilyId, p, config: BootstrapConfig,
                  *, em_config: EmConfig | None = None,
                  distance_config: DistanceConfig | None = None,
                  threads: int = 1) -> BootstrapSummary:
    """B replicate norms of the refit distance statistic.

    The original sample must fit successfully.  Replicates that fail to
    refit are retried once on a fresh sub-stream and then skipped (or the
    whole call aborts, per failure_policy); if more than max_skip_fraction
    of them are skipped, the bootstrap is declared degenerate.
    """
    if distance_config is None:
        dcfg = DistanceConfig(p=p)
    else:
        dcfg = distance_config
        if float(p) != dcfg.p:
            raise DomainError(
                f"p={p!r} disagrees with distance_config.p={dcfg.p!r}"
            )
    if isinstance(threads, bool) or not isinstance(threads, (int, np.integer)) or threads < 1:
        raise DomainError(f"threads must be a positive integer, got {threads!r}")
    em = em_config
    if family.tag == "gaussian_mixture" and em is None:
        em = EmConfig()
    # fail fast when the family cannot fit the original data at all
    fit_values(family, sample.data, em=em)

    data = sample.data
    B = config.B
    raw = np.full(B, np.nan)
    errors: dict[int, AgofError] = {}

    def work(b_range):
        for b in b_range:
            norm, err = _replicate_norm(b + 1, data, family, dcfg, config, em)
            if norm is not None:
                raw[b] = norm
            else:
                errors[b + 1] = err
                if config.failure_policy == "abort":
                    return

    if threads == 1:
        work(range(B))
    else:
        chunk = max(1, -(-B // (int(threads) * 8)))
        ranges = [range(s, min(s + chunk, B)) for s in range(0, B, chunk)]
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(work, ranges))

    if config.failure_policy == "abort" and errors:
        raise errors[min(errors)]
    valid = raw[~np.isnan(raw)]
    n_skipped = B - valid.size
    if n_skipped > config.max_skip_fraction * B:
        raise BootstrapDegeneracyError(
            f"{n_skipped} of {B} replicates failed to refit "
            f"(allowed fraction {config.max_skip_fraction})"
        )
    if valid.size < 2:
        raise BootstrapDegeneracyError("fewer than 2 replicates survived")
    norms = np.sort(valid, kind="stable")
    sigma = float(np.std(norms, ddof=1))
    return BootstrapSummary(
        norms=norms, sigma_boot=sigma, n_skipped=int(n_skipped),
        B=int(B), seed=int(config.seed),
    )


def norms_to_csv(summary: BootstrapSummary) -> str:
    """Single-column CSV of the replicate norms, for audit."""
    lines = ["norm"]
    lines.extend(repr(float(t)) for t in summary.norms)
    return "\n".join(lines) + "\n"
