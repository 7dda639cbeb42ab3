"""Monte Carlo rejection-rate studies over a grid of margins.

One simulated run draws a sample from the true distribution, fits the
candidate family, bootstraps once, and records the minimum certifiable
margin for every requested method.  Because rejection at margin epsilon is
exactly min_margin < epsilon, a single bootstrap per run prices the whole
epsilon grid, and the resulting curve is nondecreasing in epsilon by
construction.

Run r uses sample stream (seed, r) and a bootstrap seed derived from
(seed, r), so studies are reproducible for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import rng as _rng
from .bootstrap import BootstrapConfig, run_bootstrap
from .decision import min_margin
from .distances import DistanceConfig, empirical_model_distance
from .errors import AgofError, BootstrapDegeneracyError, DomainError
from .families import FamilyId, FittedModel, Sample, _draw_values
from .fitting import EmConfig, em_with_seed, fit_values

__all__ = ["PowerStudyConfig", "PowerCurve", "power_curve", "size_calibration"]

_METHODS = ("bootstrap1", "bootstrap2")


@dataclass(frozen=True)
class PowerStudyConfig:
    true_model: FittedModel
    family: FamilyId
    p: float
    n: int
    alpha: float
    epsilon_grid: tuple
    methods: tuple = _METHODS
    runs: int = 100
    B: int = 500
    seed: int = 0
    em: EmConfig | None = None
    failure_policy: str = "retry_once_then_skip"

    def __post_init__(self):
        DistanceConfig(p=self.p)  # validates p
        object.__setattr__(self, "p", float(self.p))
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.alpha < 0.5):
            raise DomainError(f"alpha must lie in (0, 0.5), got {self.alpha!r}")
        grid = tuple(float(e) for e in self.epsilon_grid)
        if len(grid) == 0:
            raise DomainError("epsilon_grid must be nonempty")
        if any(not (np.isfinite(e) and e >= 0) for e in grid):
            raise DomainError("epsilon_grid entries must be nonnegative reals")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("epsilon_grid must be strictly ascending")
        object.__setattr__(self, "epsilon_grid", grid)
        methods = tuple(self.methods)
        if len(methods) == 0 or any(m not in _METHODS for m in methods):
            raise DomainError(f"methods must be a nonempty subset of {_METHODS}")
        if len(set(methods)) != len(methods):
            raise DomainError("methods must not repeat")
        object.__setattr__(self, "methods", methods)
        if isinstance(self.runs, bool) or not isinstance(self.runs, (int, np.integer)) or self.runs < 1:
            raise DomainError(f"runs must be a positive integer, got {self.runs!r}")
        # B and policy are validated by the per-run bootstrap config
        BootstrapConfig(B=self.B, seed=0, failure_policy=self.failure_policy)
        _rng.check_seed(self.seed)


@dataclass(frozen=True)
class PowerRow:
    method: str
    epsilon: float
    rejection_proportion: float
    std_error: float


@dataclass(frozen=True)
class PowerCurve:
    rows: tuple
    config: PowerStudyConfig
    n_runs_skipped: int

    def proportion(self, method: str, epsilon: float) -> float:
        for r in self.rows:
            if r.method == method and r.epsilon == float(epsilon):
                return r.rejection_proportion
        raise DomainError(f"no row for method={method!r}, epsilon={epsilon!r}")

    def to_csv(self) -> str:
        c = self.config
        lines = ["method,epsilon,rejection_proportion,std_error,runs,B,n,p,alpha,seed"]
        for r in self.rows:
            lines.append(
                f"{r.method},{r.epsilon!r},{r.rejection_proportion!r},"
                f"{r.std_error!r},{c.runs},{c.B},{c.n},{c.p!r},{c.alpha!r},{c.seed}"
            )
        return "\n".join(lines) + "\n"


def _one_run(r: int, config: PowerStudyConfig, dcfg: DistanceConfig):
    gen = _rng.stream(config.seed, _rng.DOMAIN_MC_SAMPLE, r)
    values = np.sort(_draw_values(config.true_model, config.n, gen), kind="stable")
    sample = Sample(values, provenance=f"mc:run={r}")
    boot_seed = _rng.child_seed(config.seed, _rng.DOMAIN_MC_BOOTSTRAP, r)
    bcfg = BootstrapConfig(
        B=config.B, seed=boot_seed, failure_policy=config.failure_policy
    )
    em = config.em
    if em is None and config.family.tag == "gaussian_mixture":
        em = EmConfig()
    if em is not None:
        em = em_with_seed(em, _rng.child_seed(config.seed, _rng.DOMAIN_MC_SAMPLE, r, 1))
    model = FittedModel(config.family, fit_values(config.family, sample.data, em=em))
    obs = empirical_model_distance(sample, model, dcfg)
    boot = run_bootstrap(
        sample, config.family, config.p, bcfg,
        em_config=em, distance_config=dcfg,
    )
    return {m: min_margin(obs.value, boot, config.alpha, m) for m in config.methods}


def power_curve(config: PowerStudyConfig, *, threads: int = 1) -> PowerCurve:
    """Rejection proportion per (method, epsilon) with binomial standard errors."""
    if isinstance(threads, bool) or not isinstance(threads, (int, np.integer)) or threads < 1:
        raise DomainError(f"threads must be a positive integer, got {threads!r}")
    dcfg = DistanceConfig(p=config.p)
    margins: list = [None] * config.runs

    def work(r_range):
        for r in r_range:
            try:
                margins[r - 1] = _one_run(r, config, dcfg)
            except AgofError as exc:
                margins[r - 1] = exc

    runs = config.runs
    if threads == 1:
        work(range(1, runs + 1))
    else:
        chunk = max(1, -(-runs // (int(threads) * 4)))
        ranges = [range(s, min(s + chunk, runs + 1)) for s in range(1, runs + 1, chunk)]
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(work, ranges))

    completed = [m for m in margins if isinstance(m, dict)]
    n_skipped = runs - len(completed)
    if not completed:
        raise BootstrapDegeneracyError("every simulated run failed")

    rows = []
    n_eff = len(completed)
    for method in config.methods:
        mm = np.array([m[method] for m in completed])
        for eps in config.epsilon_grid:
            prop = float(np.mean(mm < eps))
            se = math.sqrt(prop * (1.0 - prop) / n_eff)
            rows.append(PowerRow(method, float(eps), prop, float(se)))
    return PowerCurve(rows=tuple(rows), config=config, n_runs_skipped=int(n_skipped))


def size_calibration(config: PowerStudyConfig, epsilon_true: float,
                     *, threads: int = 1):
    """(rejection proportion, standard error) at the boundary margin.

    The study config must name exactly one method.  epsilon_true = 0 is
    allowed and trivially yields proportion 0, since certifiable margins
    are positive.
    """
    if len(config.methods) != 1:
        raise DomainError("size_calibration expects a config with exactly one method")
    eps = float(epsilon_true)
    if not (np.isfinite(eps) and eps >= 0):
        raise DomainError(f"epsilon_true must be a nonnegative real, got {epsilon_true!r}")
    study = replace(config, epsilon_grid=(eps,))
    curve = power_curve(study, threads=threads)
    row = curve.rows[0]
    return row.rejection_proportion, row.std_error
