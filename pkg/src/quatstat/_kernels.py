"""Complex Jacobi kernels behind every quaternion factorisation.

Two implementations of each kernel exist: an explicit-loop version compiled
with numba, and a slice-vectorised numpy version. They apply the same
rotation sequence, so their outputs agree to rounding. ``eigh`` and ``svd``
dispatch on ``_accel.USE_NUMBA``.

Rotation used for both kernels, acting on columns (p, q)::

    J = [[c,               s * phase],
         [-s * conj(phase), c        ]]

with ``phase`` the unit phase of the coupling element and ``t = s / c`` the
small root of ``t**2 + 2*zeta*t - 1 = 0``.
"""
import math

import numpy as np

from . import _accel

EPS = np.finfo(np.float64).eps
MAX_SWEEPS = 60


@_accel.njit
def _rotation(coupling, diff):
    # coupling = |a_pq| > 0, diff = a_qq - a_pp (or beta - alpha)
    zeta = diff / (2.0 * coupling)
    if zeta >= 0.0:
        t = 1.0 / (zeta + math.sqrt(1.0 + zeta * zeta))
    else:
        t = -1.0 / (-zeta + math.sqrt(1.0 + zeta * zeta))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c


# plain-Python handle so the numpy path never enters compiled code
_rotation_py = getattr(_rotation, "py_func", _rotation)


@_accel.njit
def jacobi_eigh_loops(a, max_sweeps=MAX_SWEEPS):
    """Cyclic Jacobi on a complex Hermitian matrix.

    Returns (eigenvalues, eigenvectors, sweeps); eigenvalues unsorted.
    """
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=np.complex128)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j].real ** 2 + a[i, j].imag ** 2
    sweeps = 0
    if total == 0.0:
        return np.zeros(n), v, sweeps
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q].real ** 2 + a[p, q].imag ** 2
        if off <= (EPS * EPS) * total:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                if mag < EPS * 1e-3 * (abs(app) + abs(aqq)):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                phase = apq / mag
                cphase = phase.conjugate()
                c, s = _rotation(mag, aqq - app)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * cphase * akq
                    a[k, q] = s * phase * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * phase * aqk
                    a[q, k] = s * cphase * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * cphase * vkq
                    v[k, q] = s * phase * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, sweeps


def jacobi_eigh_numpy(a, max_sweeps=MAX_SWEEPS):
    """Slice-vectorised twin of :func:`jacobi_eigh_loops`."""
    n = a.shape[0]
    a = np.array(a, dtype=np.complex128, copy=True)
    v = np.eye(n, dtype=np.complex128)
    total = float(np.sum(a.real ** 2 + a.imag ** 2))
    sweeps = 0
    if total == 0.0:
        return np.zeros(n), v, sweeps
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        upper = a[iu]
        off = float(np.sum(upper.real ** 2 + upper.imag ** 2))
        if off <= (EPS * EPS) * total:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                if mag < EPS * 1e-3 * (abs(app) + abs(aqq)):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                phase = apq / mag
                cphase = phase.conjugate()
                c, s = _rotation_py(mag, aqq - app)
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * cphase * colq
                a[:, q] = s * phase * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp - s * phase * rowq
                a[q, :] = s * cphase * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * cphase * vq
                v[:, q] = s * phase * vp + c * vq
    return np.diagonal(a).real.copy(), v, sweeps


@_accel.njit
def jacobi_svd_loops(g, max_sweeps=MAX_SWEEPS):
    """One-sided (Hestenes) Jacobi on a complex m x n matrix, m >= n.

    Returns (G V, V, sweeps): the columns of G V are mutually orthogonal and
    their norms are the singular values, unsorted.
    """
    m, n = g.shape
    g = g.copy()
    v = np.eye(n, dtype=np.complex128)
    sweeps = 0
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0j
                for k in range(m):
                    gp = g[k, p]
                    gq = g[k, q]
                    alpha += gp.real ** 2 + gp.imag ** 2
                    beta += gq.real ** 2 + gq.imag ** 2
                    gamma += gp.conjugate() * gq
                mag = abs(gamma)
                if mag == 0.0 or mag <= EPS * math.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = gamma / mag
                cphase = phase.conjugate()
                c, s = _rotation(mag, beta - alpha)
                for k in range(m):
                    gp = g[k, p]
                    gq = g[k, q]
                    g[k, p] = c * gp - s * cphase * gq
                    g[k, q] = s * phase * gp + c * gq
                for k in range(n):
                    vp = v[k, p]
                    vq = v[k, q]
                    v[k, p] = c * vp - s * cphase * vq
                    v[k, q] = s * phase * vp + c * vq
        if not rotated:
            break
        sweeps += 1
    return g, v, sweeps


def jacobi_svd_numpy(g, max_sweeps=MAX_SWEEPS):
    """Slice-vectorised twin of :func:`jacobi_svd_loops`."""
    m, n = g.shape
    g = np.array(g, dtype=np.complex128, copy=True)
    v = np.eye(n, dtype=np.complex128)
    sweeps = 0
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                gp = g[:, p].copy()
                gq = g[:, q]
                alpha = float(np.vdot(gp, gp).real)
                beta = float(np.vdot(gq, gq).real)
                gamma = np.vdot(gp, gq)
                mag = abs(gamma)
                if mag == 0.0 or mag <= EPS * math.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = gamma / mag
                cphase = phase.conjugate()
                c, s = _rotation_py(mag, beta - alpha)
                g[:, p] = c * gp - s * cphase * gq
                g[:, q] = s * phase * gp + c * gq
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * cphase * vq
                v[:, q] = s * phase * vp + c * vq
        if not rotated:
            break
        sweeps += 1
    return g, v, sweeps


def eigh(a):
    """Hermitian eigenpairs of a complex matrix, dispatching on the numba flag."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if _accel.USE_NUMBA:
        return jacobi_eigh_loops(a)
    return jacobi_eigh_numpy(a)


def svd_columns(g):
    """Orthogonalised columns and accumulated rotations of ``g`` (rows >= cols)."""
    g = np.ascontiguousarray(g, dtype=np.complex128)
    if _accel.USE_NUMBA:
        return jacobi_svd_loops(g)
    return jacobi_svd_numpy(g)
