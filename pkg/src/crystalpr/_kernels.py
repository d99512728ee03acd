"""Compiled inner loops for 1-D real-field feasibility solves.

The math here mirrors the pure-numpy reference in solvers.py exactly (the test
suite cross-checks single steps); it exists because iteration counts reach 1e7
per trial.  The half-spectrum representation keeps every iterate exactly real:
only bins k = 0..floor(N/2) are stored and mirrored implicitly with conjugate
symmetry, so forward/backward transforms are real cos/sin accumulations.
"""

from __future__ import annotations

import numpy as np
import numba

if numba.config.THREADING_LAYER == "default":
    # skip the TBB probe (noisy warning on older TBB installs)
    numba.config.THREADING_LAYER = "omp"

from numba import njit, prange

RRR = 0
ALTERNATING_PROJECTION = 1


def trig_tables(n: int):
    """(cos, sin, weights) tables for the half-spectrum transform of Z_n."""
    nh = n // 2 + 1
    k = np.arange(nh)[:, None]
    t = np.arange(n)[None, :]
    ang = 2.0 * np.pi * k * t / n
    cosmat = np.cos(ang)
    sinmat = np.sin(ang)
    wk = np.full(nh, 2.0)
    wk[0] = 1.0
    if n % 2 == 0:
        wk[nh - 1] = 1.0
    return cosmat, sinmat, wk


def symmetry_perm_table(n: int) -> np.ndarray:
    """(2n, n) table; row (r*n + l) maps position t to ((-1)^r (t - l)) mod n."""
    t = np.arange(n)
    rows = []
    for r in (0, 1):
        for l in range(n):
            rows.append(((t - l) if r == 0 else (l - t)) % n)
    return np.asarray(rows, dtype=np.int64)


@njit(cache=True)
def _half_forward(x, cosmat, sinmat, zr, zi):
    nh, n = cosmat.shape
    for k in range(nh):
        sr = 0.0
        si = 0.0
        for t in range(n):
            sr += x[t] * cosmat[k, t]
            si -= x[t] * sinmat[k, t]
        zr[k] = sr
        zi[k] = si


@njit(cache=True)
def _pb_inverse(zr, zi, y0h, cosmat, sinmat, wk, out):
    """Overwrite (zr, zi) magnitudes with y0h (sign(0)=0 rule), inverse to out."""
    nh, n = cosmat.shape
    for k in range(nh):
        m = np.sqrt(zr[k] * zr[k] + zi[k] * zi[k])
        if m > 0.0:
            zr[k] = y0h[k] * zr[k] / m
            zi[k] = y0h[k] * zi[k] / m
        else:
            zr[k] = 0.0
            zi[k] = 0.0
    for t in range(n):
        acc = 0.0
        for k in range(nh):
            acc += wk[k] * (zr[k] * cosmat[k, t] - zi[k] * sinmat[k, t])
        out[t] = acc / n


@njit(cache=True)
def _top_k(src, k, dst, taken):
    """K-sparse truncation of src into dst; ties broken toward the lowest index."""
    n = src.shape[0]
    for t in range(n):
        dst[t] = 0.0
        taken[t] = False
    for _ in range(k):
        best = -1.0
        bi = 0
        for t in range(n):
            if not taken[t]:
                a = abs(src[t])
                if a > best:
                    best = a
                    bi = t
        taken[bi] = True
        dst[bi] = src[bi]


@njit(cache=True)
def _sym_err(xs, xt_vals, dot_table, nxs_sq, nxt_sq):
    """min over the symmetry group of ||g.xs - xt||^2 (sign optimized via |dot|)."""
    nperm, kt = dot_table.shape
    best = np.inf
    for p in range(nperm):
        d = 0.0
        for j in range(kt):
            d += xs[dot_table[p, j]] * xt_vals[j]
        e = nxs_sq + nxt_sq - 2.0 * abs(d)
        if e < best:
            best = e
    if best < 0.0:
        best = 0.0
    return best


@njit(cache=True)
def _solve_one(x, xs, y0h, k, beta, variant, max_iter, success_tol,
               dot_table, xt_vals, nxt_sq, has_truth, stagnation_tol, feas_tol,
               cosmat, sinmat, wk):
    n = x.shape[0]
    nh = cosmat.shape[0]
    zr = np.empty(nh)
    zi = np.empty(nh)
    u = np.empty(n)
    y = np.empty(n)
    taken = np.empty(n, dtype=np.bool_)
    it = 0
    err = np.inf
    eta = 0.0
    last_update_sq = np.inf
    converged = False
    while True:
        _top_k(x, k, xs, taken)
        nxs_sq = 0.0
        for t in range(n):
            nxs_sq += xs[t] * xs[t]
        nx_sq = 0.0
        for t in range(n):
            nx_sq += x[t] * x[t]
        eta = nxs_sq / nx_sq if nx_sq > 0.0 else 0.0
        if has_truth:
            err = _sym_err(xs, xt_vals, dot_table, nxs_sq, nxt_sq) / nxt_sq
            if err <= success_tol:
                converged = True
                break
        else:
            if last_update_sq <= stagnation_tol * stagnation_tol * nx_sq:
                _half_forward(xs, cosmat, sinmat, zr, zi)
                acc = 0.0
                accy = 0.0
                for kk in range(nh):
                    m = np.sqrt(zr[kk] * zr[kk] + zi[kk] * zi[kk])
                    d = m - y0h[kk]
                    acc += wk[kk] * d * d
                    accy += wk[kk] * y0h[kk] * y0h[kk]
                if acc <= feas_tol * feas_tol * accy:
                    err = acc
                    converged = True
                    break
        if it >= max_iter:
            break
        if variant == RRR:
            for t in range(n):
                u[t] = 2.0 * xs[t] - x[t]
            _half_forward(u, cosmat, sinmat, zr, zi)
            _pb_inverse(zr, zi, y0h, cosmat, sinmat, wk, y)
            last_update_sq = 0.0
            for t in range(n):
                step = beta * (y[t] - xs[t])
                x[t] += step
                last_update_sq += step * step
        else:
            _half_forward(x, cosmat, sinmat, zr, zi)
            _pb_inverse(zr, zi, y0h, cosmat, sinmat, wk, y)
            last_update_sq = 0.0
            for t in range(n):
                u[t] = x[t]
            _top_k(y, k, x, taken)
            for t in range(n):
                d = x[t] - u[t]
                last_update_sq += d * d
        it += 1
    return it, converged, err, eta


@njit(cache=True, parallel=True)
def solve_batch(xmat, xsmat, y0hmat, k, beta, variant, max_iter, success_tol,
                dot_tables, xt_vals_mat, nxt_sqs, has_truth, stagnation_tol, feas_tol,
                cosmat, sinmat, wk, iters_out, conv_out, err_out, eta_out):
    for t in prange(xmat.shape[0]):
        it, conv, err, eta = _solve_one(
            xmat[t], xsmat[t], y0hmat[t], k, beta, variant, max_iter, success_tol,
            dot_tables[t], xt_vals_mat[t], nxt_sqs[t], has_truth, stagnation_tol, feas_tol,
            cosmat, sinmat, wk,
        )
        iters_out[t] = it
        conv_out[t] = conv
        err_out[t] = err
        eta_out[t] = eta
