"""Compiled implementation of the hot kernels.

Same contracts as numpy_backend; each piece is refined depth-first with an
explicit stack so the whole integral runs inside one nopython call.  All
kernels are nogil so bootstrap replicates parallelise across threads.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._gl import GL_NODES, GL_WEIGHTS, FAM_EXPONENTIAL, FAM_NORMAL, FAM_WEIBULL

_SQRT1_2 = 1.0 / math.sqrt(2.0)
_LOG2PI = math.log(2.0 * math.pi)
_STACK = 512


@njit(cache=True, nogil=True)
def _cdf(fam, params, x):
    if fam == FAM_EXPONENTIAL:
        if x <= 0.0:
            return 0.0
        return -math.expm1(-x / params[0])
    if fam == FAM_NORMAL:
        z = (x - params[0]) / params[1]
        return 0.5 * math.erfc(-z * _SQRT1_2)
    if fam == FAM_WEIBULL:
        if x <= 0.0:
            return 0.0
        return -math.expm1(-((x / params[1]) ** params[0]))
    k = params.shape[0] // 3
    acc = 0.0
    for j in range(k):
        z = (x - params[k + j]) / params[2 * k + j]
        acc += params[j] * 0.5 * math.erfc(-z * _SQRT1_2)
    return acc


@njit(cache=True, nogil=True)
def _gl_level(a, b, c, fam, params, p):
    h = 0.5 * (b - a)
    m = 0.5 * (a + b)
    s = 0.0
    for i in range(GL_NODES.shape[0]):
        d = c - _cdf(fam, params, m + h * GL_NODES[i])
        if d < 0.0:
            d = -d
        if p == 1.0:
            t = d
        elif p == 2.0:
            t = d * d
        else:
            t = d ** p
        s += GL_WEIGHTS[i] * t
    return s * h


@njit(cache=True, nogil=True)
def _gl_pair(a, b, fam_f, params_f, fam_g, params_g, p):
    h = 0.5 * (b - a)
    m = 0.5 * (a + b)
    s = 0.0
    for i in range(GL_NODES.shape[0]):
        x = m + h * GL_NODES[i]
        d = _cdf(fam_f, params_f, x) - _cdf(fam_g, params_g, x)
        if d < 0.0:
            d = -d
        if p == 1.0:
            t = d
        elif p == 2.0:
            t = d * d
        else:
            t = d ** p
        s += GL_WEIGHTS[i] * t
    return s * h


@njit(cache=True, nogil=True)
def level_power_integral(edges, levels, fam, params, p, rel_tol, max_subdiv):
    npieces = levels.shape[0]
    est = np.empty(npieces, dtype=np.float64)
    i0 = 0.0
    total_len = 0.0
    for i in range(npieces):
        a = edges[i]
        b = edges[i + 1]
        if b > a:
            est[i] = _gl_level(a, b, levels[i], fam, params, p)
            total_len += b - a
        else:
            est[i] = 0.0
        i0 += est[i]
    if total_len <= 0.0:
        return 0.0, 0.0, 0, 0
    abs_tol = rel_tol * (i0 if i0 > 1e-300 else 1e-300)

    total = 0.0
    err = 0.0
    nsub = 0
    status = 0
    sa = np.empty(_STACK, dtype=np.float64)
    sb = np.empty(_STACK, dtype=np.float64)
    si = np.empty(_STACK, dtype=np.float64)
    st = np.empty(_STACK, dtype=np.float64)
    for i in range(npieces):
        a = edges[i]
        b = edges[i + 1]
        if b <= a:
            continue
        c = levels[i]
        share = 0.0
        if i0 > 0.0:
            share += est[i] / i0
        share = abs_tol * 0.5 * (share + (b - a) / total_len)
        sa[0] = a
        sb[0] = b
        si[0] = est[i]
        st[0] = share
        sp = 1
        while sp > 0:
            sp -= 1
            pa = sa[sp]
            pb = sb[sp]
            pi = si[sp]
            pt = st[sp]
            pm = 0.5 * (pa + pb)
            il = _gl_level(pa, pm, c, fam, params, p)
            ir = _gl_level(pm, pb, c, fam, params, p)
            e = pi - il - ir
            if e < 0.0:
                e = -e
            nsub += 1
            tiny = (pb - pa) <= 1e-14 * (abs(pa) + abs(pb) + 1e-300)
            if e <= pt or tiny or sp >= _STACK - 2 or nsub >= max_subdiv:
                total += il + ir
                err += e
                if e > pt and not tiny:
                    status = 1
            else:
                sa[sp] = pa
                sb[sp] = pm
                si[sp] = il
                st[sp] = 0.5 * pt
                sp += 1
                sa[sp] = pm
                sb[sp] = pb
                si[sp] = ir
                st[sp] = 0.5 * pt
                sp += 1
    return total, err, nsub, status


@njit(cache=True, nogil=True)
def pair_power_integral(edges, fam_f, params_f, fam_g, params_g, p, rel_tol, max_subdiv):
    npieces = edges.shape[0] - 1
    est = np.empty(npieces, dtype=np.float64)
    i0 = 0.0
    total_len = 0.0
    for i in range(npieces):
        a = edges[i]
        b = edges[i + 1]
        if b > a:
            est[i] = _gl_pair(a, b, fam_f, params_f, fam_g, params_g, p)
            total_len += b - a
        else:
            est[i] = 0.0
        i0 += est[i]
    if total_len <= 0.0:
        return 0.0, 0.0, 0, 0
    abs_tol = rel_tol * (i0 if i0 > 1e-300 else 1e-300)

    total = 0.0
    err = 0.0
    nsub = 0
    status = 0
    sa = np.empty(_STACK, dtype=np.float64)
    sb = np.empty(_STACK, dtype=np.float64)
    si = np.empty(_STACK, dtype=np.float64)
    st = np.empty(_STACK, dtype=np.float64)
    for i in range(npieces):
        a = edges[i]
        b = edges[i + 1]
        if b <= a:
            continue
        share = 0.0
        if i0 > 0.0:
            share += est[i] / i0
        share = abs_tol * 0.5 * (share + (b - a) / total_len)
        sa[0] = a
        sb[0] = b
        si[0] = est[i]
        st[0] = share
        sp = 1
        while sp > 0:
            sp -= 1
            pa = sa[sp]
            pb = sb[sp]
            pi = si[sp]
            pt = st[sp]
            pm = 0.5 * (pa + pb)
            il = _gl_pair(pa, pm, fam_f, params_f, fam_g, params_g, p)
            ir = _gl_pair(pm, pb, fam_f, params_f, fam_g, params_g, p)
            e = pi - il - ir
            if e < 0.0:
                e = -e
            nsub += 1
            tiny = (pb - pa) <= 1e-14 * (abs(pa) + abs(pb) + 1e-300)
            if e <= pt or tiny or sp >= _STACK - 2 or nsub >= max_subdiv:
                total += il + ir
                err += e
                if e > pt and not tiny:
                    status = 1
            else:
                sa[sp] = pa
                sb[sp] = pm
                si[sp] = il
                st[sp] = 0.5 * pt
                sp += 1
                sa[sp] = pm
                sb[sp] = pb
                si[sp] = ir
                st[sp] = 0.5 * pt
                sp += 1
    return total, err, nsub, status


@njit(cache=True, nogil=True)
def em_gmm(x, w_in, mu_in, var_in, max_iter, rel_tol, var_floor):
    n = x.shape[0]
    k = w_in.shape[0]
    w = w_in.copy()
    mu = mu_in.copy()
    var = var_in.copy()
    trace = np.empty(max_iter, dtype=np.float64)
    r = np.empty((n, k), dtype=np.float64)
    lw = np.empty(k, dtype=np.float64)
    lnorm = np.empty(k, dtype=np.float64)
    ll_prev = -1e308
    n_ll = 0
    for t in range(max_iter):
        for j in range(k):
            lw[j] = math.log(w[j]) if w[j] > 0.0 else -1e308
            lnorm[j] = -0.5 * math.log(var[j]) - 0.5 * _LOG2PI
        ll = 0.0
        for i in range(n):
            mmax = -1e308
            for j in range(k):
                d = x[i] - mu[j]
                lij = lw[j] + lnorm[j] - 0.5 * d * d / var[j]
                r[i, j] = lij
                if lij > mmax:
                    mmax = lij
            s = 0.0
            for j in range(k):
                s += math.exp(r[i, j] - mmax)
            lse = mmax + math.log(s)
            ll += lse
            for j in range(k):
                r[i, j] = math.exp(r[i, j] - lse)
        trace[t] = ll
        n_ll = t + 1
        if t > 0:
            denom = abs(ll_prev)
            if denom < 1e-12:
                denom = 1e-12
            if (ll - ll_prev) / denom < rel_tol:
                break
        ll_prev = ll
        for j in range(k):
            nj = 0.0
            for i in range(n):
                nj += r[i, j]
            if nj > 1e-300:
                m1 = 0.0
                for i in range(n):
                    m1 += r[i, j] * x[i]
                m1 /= nj
                v1 = 0.0
                for i in range(n):
                    d = x[i] - m1
                    v1 += r[i, j] * d * d
                v1 /= nj
                if v1 < var_floor:
                    v1 = var_floor
                mu[j] = m1
                var[j] = v1
            w[j] = nj / n
        ws = 0.0
        for j in range(k):
            ws += w[j]
        for j in range(k):
            w[j] /= ws
    ll_final = 0.0
    for i in range(n):
        mmax = -1e308
        for j in range(k):
            d = x[i] - mu[j]
            lij = (math.log(w[j]) if w[j] > 0.0 else -1e308) \
                - 0.5 * math.log(var[j]) - 0.5 * _LOG2PI - 0.5 * d * d / var[j]
            lw[j] = lij
            if lij > mmax:
                mmax = lij
        s = 0.0
        for j in range(k):
            s += math.exp(lw[j] - mmax)
        ll_final += mmax + math.log(s)
    all_floored = True
    for j in range(k):
        if var[j] > var_floor * (1.0 + 1e-9):
            all_floored = False
    return w, mu, var, trace[:n_ll].copy(), ll_final, all_floored
