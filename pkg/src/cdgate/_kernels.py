"""Compiled RK4 inner loops.

The Hamiltonian of every model is ``sum_k c_k(t) B_k`` with a fixed set of
matrix elements, so the kernels work on the union of nonzero positions
``(rows[e], cols[e])`` with per-term values ``vals[k, e]``. Coefficients are
supplied on the half-step grid: column ``2 s``, ``2 s + 1``, ``2 s + 2`` are the
start, middle and end of step ``s``.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _assemble(vals, coef, j, out):
    K, nnz = vals.shape
    for e in range(nnz):
        acc = 0j
        for k in range(K):
            acc += coef[k, j] * vals[k, e]
        out[e] = acc


@njit(cache=True)
def _deriv_pure(rows, cols, hv, y, out):
    d, m = y.shape
    for i in range(d):
        for c in range(m):
            out[i, c] = 0j
    for e in range(rows.size):
        v = -1j * hv[e]
        r = rows[e]
        s = cols[e]
        for c in range(m):
            out[r, c] += v * y[s, c]


@njit(cache=True)
def rk4_pure(y, rows, cols, vals, coef, h, nsteps):
    """Advance columns of ``y`` by ``nsteps`` RK4 steps in place.

    Returns the largest per-step change of any squared column norm.
    """
    d, m = y.shape
    nnz = rows.size
    ha = np.empty(nnz, np.complex128)
    hm = np.empty(nnz, np.complex128)
    hb = np.empty(nnz, np.complex128)
    k1 = np.empty((d, m), np.complex128)
    k2 = np.empty((d, m), np.complex128)
    k3 = np.empty((d, m), np.complex128)
    k4 = np.empty((d, m), np.complex128)
    tmp = np.empty((d, m), np.complex128)
    prev = np.empty(m)
    for c in range(m):
        acc = 0.0
        for i in range(d):
            acc += y[i, c].real ** 2 + y[i, c].imag ** 2
        prev[c] = acc
    worst = 0.0
    _assemble(vals, coef, 0, ha)
    for s in range(nsteps):
        _assemble(vals, coef, 2 * s + 1, hm)
        _assemble(vals, coef, 2 * s + 2, hb)
        _deriv_pure(rows, cols, ha, y, k1)
        for i in range(d):
            for c in range(m):
                tmp[i, c] = y[i, c] + 0.5 * h * k1[i, c]
        _deriv_pure(rows, cols, hm, tmp, k2)
        for i in range(d):
            for c in range(m):
                tmp[i, c] = y[i, c] + 0.5 * h * k2[i, c]
        _deriv_pure(rows, cols, hm, tmp, k3)
        for i in range(d):
            for c in range(m):
                tmp[i, c] = y[i, c] + h * k3[i, c]
        _deriv_pure(rows, cols, hb, tmp, k4)
        for i in range(d):
            for c in range(m):
                y[i, c] += h / 6.0 * (k1[i, c] + 2.0 * k2[i, c] + 2.0 * k3[i, c] + k4[i, c])
        for c in range(m):
            acc = 0.0
            for i in range(d):
                acc += y[i, c].real ** 2 + y[i, c].imag ** 2
            if abs(acc - prev[c]) > worst:
                worst = abs(acc - prev[c])
            prev[c] = acc
        for e in range(nnz):
            ha[e] = hb[e]
    return worst


@njit(cache=True)
def _deriv_lindblad(rows, cols, hv, jptr, jrows, jcols, jvals, rho, out):
    # hv holds the non-Hermitian H_eff = H - (i/2) sum L^dag L
    d = rho.shape[0]
    for i in range(d):
        for j in range(d):
            out[i, j] = 0j
    for e in range(rows.size):
        v = hv[e]
        r = rows[e]
        s = cols[e]
        a = -1j * v
        b = 1j * np.conj(v)
        for j in range(d):
            out[r, j] += a * rho[s, j]
        for i in range(d):
            out[i, r] += b * rho[i, s]
    for l in range(jptr.size - 1):
        for e1 in range(jptr[l], jptr[l + 1]):
            i = jrows[e1]
            a = jcols[e1]
            v1 = jvals[e1]
            for e2 in range(jptr[l], jptr[l + 1]):
                out[i, jrows[e2]] += v1 * rho[a, jcols[e2]] * np.conj(jvals[e2])


@njit(cache=True)
def rk4_lindblad(rho, rows, cols, vals, coef, jptr, jrows, jcols, jvals, h, nsteps, herm_tol):
    """Advance ``rho`` in place; symmetrize after every step.

    Returns ``(worst trace change per step, worst antisymmetric residual)``.
    The loop stops early (returning the residual) if the residual exceeds
    ``herm_tol``, leaving ``rho`` unsymmetrized for inspection.
    """
    d = rho.shape[0]
    nnz = rows.size
    ha = np.empty(nnz, np.complex128)
    hm = np.empty(nnz, np.complex128)
    hb = np.empty(nnz, np.complex128)
    k1 = np.empty((d, d), np.complex128)
    k2 = np.empty((d, d), np.complex128)
    k3 = np.empty((d, d), np.complex128)
    k4 = np.empty((d, d), np.complex128)
    tmp = np.empty((d, d), np.complex128)
    prev = 0.0
    for i in range(d):
        prev += rho[i, i].real
    worst = 0.0
    resid = 0.0
    _assemble(vals, coef, 0, ha)
    for s in range(nsteps):
        _assemble(vals, coef, 2 * s + 1, hm)
        _assemble(vals, coef, 2 * s + 2, hb)
        _deriv_lindblad(rows, cols, ha, jptr, jrows, jcols, jvals, rho, k1)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + 0.5 * h * k1[i, j]
        _deriv_lindblad(rows, cols, hm, jptr, jrows, jcols, jvals, tmp, k2)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + 0.5 * h * k2[i, j]
        _deriv_lindblad(rows, cols, hm, jptr, jrows, jcols, jvals, tmp, k3)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + h * k3[i, j]
        _deriv_lindblad(rows, cols, hb, jptr, jrows, jcols, jvals, tmp, k4)
        for i in range(d):
            for j in range(d):
                rho[i, j] += h / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
        r = 0.0
        for i in range(d):
            for j in range(i, d):
                x = abs(rho[i, j] - np.conj(rho[j, i]))
                if x > r:
                    r = x
        if r > resid:
            resid = r
        if r > herm_tol:
            return worst, resid
        for i in range(d):
            rho[i, i] = rho[i, i].real + 0j
            for j in range(i + 1, d):
                z = 0.5 * (rho[i, j] + np.conj(rho[j, i]))
                rho[i, j] = z
                rho[j, i] = np.conj(z)
        tr = 0.0
        for i in range(d):
            tr += rho[i, i].real
        if abs(tr - prev) > worst:
            worst = abs(tr - prev)
        prev = tr
        for e in range(nnz):
            ha[e] = hb[e]
    return worst, resid
