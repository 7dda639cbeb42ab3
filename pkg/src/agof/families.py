"""Parametric families: identifiers, parameter vectors, fitted models, samples.

Four continuous families (exponential, normal, weibull, gaussian_mixture)
plus the degenerate dirac family used as the no-spread baseline.  Weibull is
generator-only: it can be evaluated and sampled but not fitted.

Parameter layouts
-----------------
exponential        [theta]                        theta > 0
normal             [mean, sd]                     sd > 0
weibull            [shape, scale]                 both > 0
gaussian_mixture   [w_1..w_k, mu_1..mu_k, sd_1..sd_k]
dirac              [mu]
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from . import rng as _rng
from ._kernels import FAM_EXPONENTIAL, FAM_NORMAL, FAM_WEIBULL, FAM_MIXTURE
from .errors import (
    DomainError,
    InputError,
    UnsupportedError,
)

__all__ = [
    "FamilyId",
    "Params",
    "FittedModel",
    "Sample",
    "cdf",
    "quantile",
    "draw_sample",
    "log_likelihood",
    "model_mean",
    "model_var",
    "model_sd",
    "support_lower",
    "projection_params",
    "exponential_model",
    "normal_model",
    "weibull_model",
    "mixture_model",
    "dirac_model",
    "model_to_json",
    "model_from_json",
    "model_to_json_dict",
    "model_from_json_dict",
]

_TAGS = ("exponential", "normal", "weibull", "gaussian_mixture", "dirac")
_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FamilyId:
    """Identifies a family; gaussian_mixture additionally carries k."""

    tag: str
    k: int | None = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise DomainError(f"unknown family {self.tag!r}; choose from {_TAGS}")
        if self.tag == "gaussian_mixture":
            if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
                raise DomainError("gaussian_mixture requires an integer k >= 1")
        elif self.k is not None:
            raise DomainError(f"family {self.tag!r} takes no component count")

    @staticmethod
    def exponential() -> "FamilyId":
        return FamilyId("exponential")

    @staticmethod
    def normal() -> "FamilyId":
        return FamilyId("normal")

    @staticmethod
    def weibull() -> "FamilyId":
        return FamilyId("weibull")

    @staticmethod
    def gaussian_mixture(k: int) -> "FamilyId":
        return FamilyId("gaussian_mixture", k)

    @staticmethod
    def dirac() -> "FamilyId":
        return FamilyId("dirac")

    def __str__(self):
        if self.tag == "gaussian_mixture":
            return f"gaussian_mixture(k={self.k})"
        return self.tag


@dataclass(frozen=True)
class Params:
    """Immutable parameter vector; layout is interpreted by the family."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if v.size == 0:
            raise DomainError("parameter vector must be nonempty")
        if not np.all(np.isfinite(v)):
            raise DomainError("parameters must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def _check_layout(family: FamilyId, v: np.ndarray) -> None:
    tag = family.tag
    if tag == "exponential":
        if v.size != 1:
            raise DomainError("exponential expects one parameter [theta]")
        if v[0] <= 0:
            raise DomainError(f"theta must be > 0, got {v[0]}")
    elif tag == "normal":
        if v.size != 2:
            raise DomainError("normal expects [mean, sd]")
        if v[1] <= 0:
            raise DomainError(f"sd must be > 0, got {v[1]}")
    elif tag == "weibull":
        if v.size != 2:
            raise DomainError("weibull expects [shape, scale]")
        if v[0] <= 0 or v[1] <= 0:
            raise DomainError("weibull shape and scale must be > 0")
    elif tag == "dirac":
        if v.size != 1:
            raise DomainError("dirac expects one parameter [mu]")
    else:
        k = family.k
        if v.size != 3 * k:
            raise DomainError(
                f"gaussian_mixture(k={k}) expects 3k={3 * k} parameters, got {v.size}"
            )
        w, sd = v[:k], v[2 * k:]
        if np.any(w <= 0):
            raise DomainError("mixture weights must be positive")
        if abs(float(w.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise DomainError(
                f"mixture weights must sum to 1 within {_WEIGHT_SUM_TOL}, "
                f"got {float(w.sum())!r}"
            )
        if np.any(sd <= 0):
            raise DomainError("mixture sds must be positive")


@dataclass(frozen=True)
class FittedModel:
    """A family together with a concrete, validated parameter vector."""

    family: FamilyId
    params: Params

    def __post_init__(self):
        _check_layout(self.family, self.params.values)

    def cdf(self, x):
        return cdf(self, x)

    def quantile(self, u):
        return quantile(self, u)

    def sample(self, n: int, seed: int) -> "Sample":
        return draw_sample(self, n, seed)

    def log_likelihood(self, sample: "Sample") -> float:
        return log_likelihood(self, sample)

    @property
    def mean(self) -> float:
        return model_mean(self)

    @property
    def sd(self) -> float:
        return model_sd(self)

    def __str__(self):
        vals = ", ".join(repr(float(t)) for t in self.params.values)
        return f"{self.family}[{vals}]"


def exponential_model(theta: float) -> FittedModel:
    return FittedModel(FamilyId.exponential(), Params(np.array([theta])))


def normal_model(mean: float, sd: float) -> FittedModel:
    return FittedModel(FamilyId.normal(), Params(np.array([mean, sd])))


def weibull_model(shape: float, scale: float) -> FittedModel:
    return FittedModel(FamilyId.weibull(), Params(np.array([shape, scale])))


def mixture_model(weights, means, sds) -> FittedModel:
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    m = np.asarray(means, dtype=np.float64).reshape(-1)
    s = np.asarray(sds, dtype=np.float64).reshape(-1)
    if not (w.size == m.size == s.size):
        raise DomainError("weights, means, sds must have equal length")
    return FittedModel(
        FamilyId.gaussian_mixture(int(w.size)),
        Params(np.concatenate([w, m, s])),
    )


def dirac_model(mu: float) -> FittedModel:
    return FittedModel(FamilyId.dirac(), Params(np.array([mu])))


@dataclass(frozen=True)
class Sample:
    """Sorted, finite observations with a provenance note for audit trails."""

    data: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        v = np.array(self.data, dtype=np.float64, copy=True).reshape(-1)
        if v.size < 1:
            raise DomainError("sample must contain at least one observation")
        if not np.all(np.isfinite(v)):
            raise DomainError("sample values must be finite; clean the input first")
        v.sort(kind="stable")
        v.flags.writeable = False
        object.__setattr__(self, "data", v)

    @property
    def n(self) -> int:
        return int(self.data.size)

    @property
    def mean(self) -> float:
        return float(self.data.mean())


def _mix_parts(model: FittedModel):
    k = model.family.k
    v = model.params.values
    return v[:k], v[k:2 * k], v[2 * k:3 * k]


def kernel_code(model: FittedModel) -> int:
    tag = model.family.tag
    if tag == "exponential":
        return FAM_EXPONENTIAL
    if tag == "normal":
        return FAM_NORMAL
    if tag == "weibull":
        return FAM_WEIBULL
    if tag == "gaussian_mixture":
        return FAM_MIXTURE
    raise UnsupportedError("dirac has no kernel representation")


def kernel_params(model: FittedModel) -> np.ndarray:
    return np.ascontiguousarray(model.params.values, dtype=np.float64)


def cdf(model: FittedModel, x):
    """Distribution function at x (scalar or array; dirac is the unit step)."""
    xv = np.asarray(x, dtype=np.float64)
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        out = np.where(xv > 0, -np.expm1(-np.maximum(xv, 0.0) / v[0]), 0.0)
    elif tag == "normal":
        out = _sp.ndtr((xv - v[0]) / v[1])
    elif tag == "weibull":
        t = np.maximum(xv, 0.0) / v[1]
        out = np.where(xv > 0, -np.expm1(-(t ** v[0])), 0.0)
    elif tag == "dirac":
        out = (xv >= v[0]).astype(np.float64)
    else:
        w, mu, sd = _mix_parts(model)
        out = _sp.ndtr((xv[..., None] - mu) / sd) @ w
    if np.isscalar(x) or xv.ndim == 0:
        return float(out)
    return out


def _survival(model: FittedModel, x):
    """1 - cdf, evaluated stably in the right tail."""
    xv = np.asarray(x, dtype=np.float64)
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        out = np.where(xv > 0, np.exp(-np.maximum(xv, 0.0) / v[0]), 1.0)
    elif tag == "normal":
        out = _sp.ndtr(-(xv - v[0]) / v[1])
    elif tag == "weibull":
        t = np.maximum(xv, 0.0) / v[1]
        out = np.where(xv > 0, np.exp(-(t ** v[0])), 1.0)
    elif tag == "dirac":
        out = (xv < v[0]).astype(np.float64)
    else:
        w, mu, sd = _mix_parts(model)
        out = _sp.ndtr(-(xv[..., None] - mu) / sd) @ w
    if np.isscalar(x) or xv.ndim == 0:
        return float(out)
    return out


def _check_u_open(u: np.ndarray) -> None:
    if np.any(~np.isfinite(u)) or np.any(u <= 0.0) or np.any(u >= 1.0):
        raise DomainError("quantile levels must lie strictly inside (0, 1)")


def _mixture_lower_quantile(w, mu, sd, u):
    # Bracket by component quantiles: mixture cdf is <= u at the smallest
    # component quantile and >= u at the largest, then bisect.
    zq = _sp.ndtri(u)
    qc = mu[None, :] + sd[None, :] * zq[:, None]
    lo = qc.min(axis=1)
    hi = qc.max(axis=1)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        val = _sp.ndtr((mid[:, None] - mu) / sd) @ w
        less = val < u
        lo = np.where(less, mid, lo)
        hi = np.where(less, hi, mid)
    return 0.5 * (lo + hi)


def _mixture_upper_quantile(w, mu, sd, u_tail):
    zq = _sp.ndtri(u_tail)
    qc = mu[None, :] - sd[None, :] * zq[:, None]
    lo = qc.min(axis=1)
    hi = qc.max(axis=1)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        sf = _sp.ndtr(-(mid[:, None] - mu) / sd) @ w
        right = sf > u_tail
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    return 0.5 * (lo + hi)


def quantile(model: FittedModel, u):
    """Lower quantile Q(u) for u in (0, 1); dirac returns mu for every u."""
    uv = np.atleast_1d(np.asarray(u, dtype=np.float64))
    _check_u_open(uv)
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        out = -v[0] * np.log1p(-uv)
    elif tag == "normal":
        out = v[0] + v[1] * _sp.ndtri(uv)
    elif tag == "weibull":
        out = v[1] * (-np.log1p(-uv)) ** (1.0 / v[0])
    elif tag == "dirac":
        out = np.full_like(uv, v[0])
    else:
        w, mu, sd = _mix_parts(model)
        out = _mixture_lower_quantile(w, mu, sd, uv)
    if np.isscalar(u) or np.asarray(u).ndim == 0:
        return float(out[0])
    return out


def upper_quantile(model: FittedModel, u_tail):
    """x with survival(x) = u_tail, evaluated stably for tiny tail levels.

    Equivalent to Q(1 - u_tail) but avoids forming 1 - u_tail, which loses
    all precision once u_tail drops below machine epsilon.
    """
    uv = np.atleast_1d(np.asarray(u_tail, dtype=np.float64))
    _check_u_open(uv)
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        out = -v[0] * np.log(uv)
    elif tag == "normal":
        out = v[0] - v[1] * _sp.ndtri(uv)
    elif tag == "weibull":
        out = v[1] * (-np.log(uv)) ** (1.0 / v[0])
    elif tag == "dirac":
        out = np.full_like(uv, v[0])
    else:
        w, mu, sd = _mix_parts(model)
        out = _mixture_upper_quantile(w, mu, sd, uv)
    if np.isscalar(u_tail) or np.asarray(u_tail).ndim == 0:
        return float(out[0])
    return out


def _draw_values(model: FittedModel, n: int, gen: np.random.Generator) -> np.ndarray:
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        return v[0] * gen.standard_exponential(n)
    if tag == "normal":
        return v[0] + v[1] * gen.standard_normal(n)
    if tag == "weibull":
        return v[1] * gen.weibull(v[0], size=n)
    if tag == "dirac":
        return np.full(n, v[0])
    w, mu, sd = _mix_parts(model)
    comp = np.minimum(
        np.searchsorted(np.cumsum(w), gen.random(n), side="right"), w.size - 1
    )
    return mu[comp] + sd[comp] * gen.standard_normal(n)


def draw_sample(model: FittedModel, n: int, seed: int) -> Sample:
    """Draw n iid observations using the counter-based stream keyed by seed."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    gen = _rng.stream(seed, _rng.DOMAIN_DRAW)
    values = _draw_values(model, int(n), gen)
    return Sample(values, provenance=f"draw:{model.family}:n={n}:seed={seed}")


_HALF_LOG2PI = 0.5 * math.log(2.0 * math.pi)


def _logpdf(model: FittedModel, x: np.ndarray) -> np.ndarray:
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        with np.errstate(invalid="ignore"):
            out = np.where(x < 0, -np.inf, -np.log(v[0]) - np.maximum(x, 0.0) / v[0])
        return out
    if tag == "normal":
        z = (x - v[0]) / v[1]
        return -0.5 * z * z - math.log(v[1]) - _HALF_LOG2PI
    if tag == "weibull":
        shape, scale = v[0], v[1]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.maximum(x, 0.0) / scale
            out = np.where(
                x <= 0,
                -np.inf,
                math.log(shape / scale) + (shape - 1.0) * np.log(t) - t ** shape,
            )
        return out
    if tag == "gaussian_mixture":
        w, mu, sd = _mix_parts(model)
        z = (x[..., None] - mu) / sd
        comp = np.log(w) - np.log(sd) - _HALF_LOG2PI - 0.5 * z * z
        return _sp.logsumexp(comp, axis=-1)
    raise UnsupportedError("log_likelihood is undefined for dirac")


def log_likelihood(model: FittedModel, sample: Sample) -> float:
    """Total log-likelihood; -inf when any observation falls off-support."""
    lp = _logpdf(model, sample.data)
    if np.any(np.isneginf(lp)):
        return float("-inf")
    return float(lp.sum())


def model_mean(model: FittedModel) -> float:
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        return float(v[0])
    if tag == "normal":
        return float(v[0])
    if tag == "weibull":
        return float(v[1] * _sp.gamma(1.0 + 1.0 / v[0]))
    if tag == "dirac":
        return float(v[0])
    w, mu, _ = _mix_parts(model)
    return float(w @ mu)


def model_var(model: FittedModel) -> float:
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        return float(v[0] ** 2)
    if tag == "normal":
        return float(v[1] ** 2)
    if tag == "weibull":
        g1 = _sp.gamma(1.0 + 1.0 / v[0])
        g2 = _sp.gamma(1.0 + 2.0 / v[0])
        return float(v[1] ** 2 * (g2 - g1 * g1))
    if tag == "dirac":
        return 0.0
    w, mu, sd = _mix_parts(model)
    m = float(w @ mu)
    return float(w @ (sd * sd + mu * mu) - m * m)


def model_sd(model: FittedModel) -> float:
    return math.sqrt(max(model_var(model), 0.0))


def support_lower(model: FittedModel) -> float:
    """Lower endpoint of the support (0 for exponential/weibull)."""
    tag = model.family.tag
    if tag in ("exponential", "weibull"):
        return 0.0
    if tag == "dirac":
        return float(model.params.values[0])
    return float("-inf")


def projection_params(true_model: FittedModel, family: FamilyId) -> Params:
    """Parameters of the L^p-relevant projection of true_model onto family.

    For the fit-by-moments families this is the population analogue of the
    MLE: exponential matches the mean, normal matches mean and sd, dirac
    sits at the mean.
    """
    m = model_mean(true_model)
    if family.tag == "exponential":
        if m <= 0:
            raise DomainError(
                "projection onto exponential requires a positive mean, "
                f"got {m!r}"
            )
        return Params(np.array([m]))
    if family.tag == "normal":
        var = model_var(true_model)
        if var <= 0:
            raise DomainError("projection onto normal requires positive variance")
        return Params(np.array([m, math.sqrt(var)]))
    if family.tag == "dirac":
        return Params(np.array([m]))
    raise UnsupportedError(
        f"projection onto {family} is not provided (fit families only)"
    )


# Partial first moments, used to bound truncated tail mass analytically.
# Values are clamped at zero and callers inflate them by a safety factor,
# since the normal expressions lose digits to cancellation deep in a tail.

def _pm_below(model: FittedModel, a: float) -> float:
    """E(a - X)^+  ==  integral of the cdf over (-inf, a]."""
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        if a <= 0:
            return 0.0
        return max(float(a + v[0] * math.expm1(-a / v[0])), 0.0)
    if tag == "normal":
        z = (a - v[0]) / v[1]
        val = v[1] * (
            math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi) + z * _sp.ndtr(z)
        )
        return max(float(val), 0.0)
    if tag == "weibull":
        if a <= 0:
            return 0.0
        shape, scale = v[0], v[1]
        t = (a / scale) ** shape
        lower_gamma = _sp.gamma(1.0 / shape) * _sp.gammainc(1.0 / shape, t)
        return max(float(a - (scale / shape) * lower_gamma), 0.0)
    if tag == "dirac":
        return max(float(a - v[0]), 0.0)
    w, mu, sd = _mix_parts(model)
    z = (a - mu) / sd
    phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return max(float(w @ (sd * (phi + z * _sp.ndtr(z)))), 0.0)


def _pm_above(model: FittedModel, b: float) -> float:
    """E(X - b)^+  ==  integral of the survival function over [b, inf)."""
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        if b <= 0:
            return float(v[0] - b)
        return float(v[0] * math.exp(-b / v[0]))
    if tag == "normal":
        z = (b - v[0]) / v[1]
        val = v[1] * (
            math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi) - z * _sp.ndtr(-z)
        )
        return max(float(val), 0.0)
    if tag == "weibull":
        shape, scale = v[0], v[1]
        if b <= 0:
            return float(model_mean(model) - b)
        t = (b / scale) ** shape
        upper_gamma = _sp.gamma(1.0 / shape) * _sp.gammaincc(1.0 / shape, t)
        return max(float((scale / shape) * upper_gamma), 0.0)
    if tag == "dirac":
        return max(float(v[0] - b), 0.0)
    w, mu, sd = _mix_parts(model)
    z = (b - mu) / sd
    phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return max(float(w @ (sd * (phi - z * _sp.ndtr(-z)))), 0.0)


# JSON codec.  The on-disk schema spells parameters out by name so model
# files are self-describing and order-independent.

def model_to_json_dict(model: FittedModel) -> dict:
    tag = model.family.tag
    v = model.params.values
    if tag == "exponential":
        return {"family": "exponential", "theta": float(v[0])}
    if tag == "normal":
        return {"family": "normal", "mean": float(v[0]), "sd": float(v[1])}
    if tag == "weibull":
        return {"family": "weibull", "shape": float(v[0]), "scale": float(v[1])}
    if tag == "dirac":
        return {"family": "dirac", "mu": float(v[0])}
    w, mu, sd = _mix_parts(model)
    return {
        "family": "gaussian_mixture",
        "k": int(model.family.k),
        "weights": [float(t) for t in w],
        "means": [float(t) for t in mu],
        "sds": [float(t) for t in sd],
    }


def model_to_json(model: FittedModel) -> str:
    return json.dumps(model_to_json_dict(model))


def _require(d: dict, key: str):
    if key not in d:
        raise InputError(f"model object is missing {key!r}")
    return d[key]


def model_from_json_dict(d: dict) -> FittedModel:
    if not isinstance(d, dict):
        raise InputError("model JSON must be an object")
    tag = _require(d, "family")
    try:
        if tag == "exponential":
            return exponential_model(float(_require(d, "theta")))
        if tag == "normal":
            return normal_model(float(_require(d, "mean")), float(_require(d, "sd")))
        if tag == "weibull":
            return weibull_model(float(_require(d, "shape")), float(_require(d, "scale")))
        if tag == "dirac":
            return dirac_model(float(_require(d, "mu")))
        if tag == "gaussian_mixture":
            k = int(_require(d, "k"))
            w = _require(d, "weights")
            m = _require(d, "means")
            s = _require(d, "sds")
            if not (len(w) == len(m) == len(s) == k):
                raise InputError(
                    f"gaussian_mixture arrays must all have length k={k}"
                )
            return mixture_model(w, m, s)
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed model object: {exc}") from exc
    except DomainError as exc:
        raise InputError(f"invalid model parameters: {exc}") from exc
    raise InputError(f"unknown family {tag!r} in model object")


def model_from_json(text: str) -> FittedModel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"model JSON does not parse: {exc}") from exc
    return model_from_json_dict(d)
