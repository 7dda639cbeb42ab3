"""Vectorised numpy implementation of the hot kernels.

Fallback path used when numba is unavailable or when AGOF_BACKEND=numpy.
The adaptive drivers keep whole generations of panels in flat arrays and
bisect every unconverged panel at once, so the work per pass is a handful
of large vector operations instead of a Python-level recursion.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from ._gl import GL_NODES, GL_WEIGHTS, FAM_EXPONENTIAL, FAM_NORMAL, FAM_WEIBULL

_WIDTH_EPS = 1e-14
_TINY = 1e-300


def _cdf(fam: int, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    if fam == FAM_EXPONENTIAL:
        return np.where(x > 0.0, -np.expm1(-np.maximum(x, 0.0) / params[0]), 0.0)
    if fam == FAM_NORMAL:
        return ndtr((x - params[0]) / params[1])
    if fam == FAM_WEIBULL:
        t = np.maximum(x, 0.0) / params[1]
        return np.where(x > 0.0, -np.expm1(-(t ** params[0])), 0.0)
    k = params.shape[0] // 3
    z = (x[..., None] - params[k:2 * k]) / params[2 * k:3 * k]
    return ndtr(z) @ params[:k]


def _pow(d: np.ndarray, p: float) -> np.ndarray:
    if p == 1.0:
        return d
    if p == 2.0:
        return d * d
    return d ** p


def _gl_level(a, b, c, fam, params, p):
    # Panel integrals of |c - G|^p for a batch of panels.
    h = 0.5 * (b - a)
    x = 0.5 * (a + b)[:, None] + h[:, None] * GL_NODES[None, :]
    d = np.abs(c[:, None] - _cdf(fam, params, x))
    return (_pow(d, p) @ GL_WEIGHTS) * h

def _gl_pair(a, b, fam_f, params_f, fam_g, params_g, p):
    h = 0.5 * (b - a)
    x = 0.5 * (a + b)[:, None] + h[:, None] * GL_NODES[None, :]
    d = np.abs(_cdf(fam_f, params_f, x) - _cdf(fam_g, params_g, x))
    return (_pow(d, p) @ GL_WEIGHTS) * h


def _adaptive(batch_eval, a0, b0, c0, rel_tol, max_subdiv):
    keep = b0 > a0
    a0, b0 = a0[keep], b0[keep]
    c0 = c0[keep] if c0 is not None else None
    if a0.size == 0:
        return 0.0, 0.0, 0, 0
    est = batch_eval(a0, b0, c0)
    i0 = float(est.sum())
    length = b0 - a0
    total_len = float(length.sum())
    abs_tol = rel_tol * max(i0, _TINY)
    if i0 > 0.0:
        tol = abs_tol * 0.5 * (est / i0 + length / total_len)
    else:
        tol = abs_tol * length / total_len

    total = 0.0
    err = 0.0
    nsub = 0
    status = 0
    A, B, T, E = a0, b0, tol, est
    C = c0
    while A.size:
        M = 0.5 * (A + B)
        Il = batch_eval(A, M, C)
        Ir = batch_eval(M, B, C)
        e = np.abs(E - Il - Ir)
        nsub += A.size
        tiny = (B - A) <= _WIDTH_EPS * (np.abs(A) + np.abs(B) + _TINY)
        if nsub >= max_subdiv:
            done = np.ones(A.size, dtype=bool)
            if bool(np.any((e > T) & ~tiny)):
                status = 1
        else:
            done = (e <= T) | tiny
        total += float((Il[done] + Ir[done]).sum())
        err += float(e[done].sum())
        split = ~done
        if not split.any():
            break
        Ms = M[split]
        A = np.concatenate([A[split], Ms])
        B = np.concatenate([Ms, B[split]])
        if C is not None:
            C = np.concatenate([C[split], C[split]])
        T = np.concatenate([0.5 * T[split], 0.5 * T[split]])
        E = np.concatenate([Il[split], Ir[split]])
    return total, err, nsub, status


def level_power_integral(edges, levels, fam, params, p, rel_tol, max_subdiv):
    """Integral of |level_i - G(x)|^p over contiguous pieces, adaptively refined.

    Returns (integral, error_estimate, n_bisections, status) where status 1
    means the subdivision budget forced acceptance of unconverged panels.
    """
    a0 = np.ascontiguousarray(edges[:-1], dtype=np.float64)
    b0 = np.ascontiguousarray(edges[1:], dtype=np.float64)
    c0 = np.ascontiguousarray(levels, dtype=np.float64)
    params = np.ascontiguousarray(params, dtype=np.float64)

    def ev(a, b, c):
        return _gl_level(a, b, c, fam, params, p)

    return _adaptive(ev, a0, b0, c0, rel_tol, max_subdiv)


def pair_power_integral(edges, fam_f, params_f, fam_g, params_g, p, rel_tol, max_subdiv):
    """Integral of |F(x) - G(x)|^p over contiguous pieces, adaptively refined."""
    a0 = np.ascontiguousarray(edges[:-1], dtype=np.float64)
    b0 = np.ascontiguousarray(edges[1:], dtype=np.float64)
    params_f = np.ascontiguousarray(params_f, dtype=np.float64)
    params_g = np.ascontiguousarray(params_g, dtype=np.float64)

    def ev(a, b, _c):
        return _gl_pair(a, b, fam_f, params_f, fam_g, params_g, p)

    return _adaptive(ev, a0, b0, None, rel_tol, max_subdiv)


_LOG2PI = float(np.log(2.0 * np.pi))


def _loglik(x_col, w, mu, var):
    with np.errstate(divide="ignore"):
        lw = np.where(w > 0.0, np.log(np.maximum(w, 1e-320)), -1e308)
    lij = lw - 0.5 * np.log(var) - 0.5 * _LOG2PI - 0.5 * (x_col - mu) ** 2 / var
    m = lij.max(axis=1)
    lse = m + np.log(np.exp(lij - m[:, None]).sum(axis=1))
    return lij, lse


def em_gmm(x, w_in, mu_in, var_in, max_iter, rel_tol, var_floor):
    """One EM run for a univariate Gaussian mixture.

    Responsibilities are computed in the log domain; variances are clamped
    at var_floor, which keeps each M-step a constrained maximiser so the
    log-likelihood trace stays nondecreasing.

    Returns (w, mu, var, ll_trace, ll_final, all_floored).
    """
    n = x.shape[0]
    w = np.array(w_in, dtype=np.float64, copy=True)
    mu = np.array(mu_in, dtype=np.float64, copy=True)
    var = np.array(var_in, dtype=np.float64, copy=True)
    x_col = np.ascontiguousarray(x, dtype=np.float64)[:, None]
    trace = np.empty(max_iter, dtype=np.float64)
    ll_prev = -np.inf
    n_ll = 0
    for t in range(max_iter):
        lij, lse = _loglik(x_col, w, mu, var)
        ll = float(lse.sum())
        trace[t] = ll
        n_ll = t + 1
        if t > 0 and (ll - ll_prev) / max(abs(ll_prev), 1e-12) < rel_tol:
            break
        ll_prev = ll
        r = np.exp(lij - lse[:, None])
        nj = r.sum(axis=0)
        ok = nj > _TINY
        njs = np.maximum(nj, _TINY)
        m1 = np.where(ok, (r * x_col).sum(axis=0) / njs, mu)
        v1 = np.where(ok, (r * (x_col - m1) ** 2).sum(axis=0) / njs, var)
        mu = np.where(ok, m1, mu)
        var = np.maximum(np.where(ok, v1, var), var_floor)
        w = nj / n
        w = w / w.sum()
    _, lse = _loglik(x_col, w, mu, var)
    ll_final = float(lse.sum())
    all_floored = bool(np.all(var <= var_floor * (1.0 + 1e-9)))
    return w, mu, var, trace[:n_ll].copy(), ll_final, all_floored
