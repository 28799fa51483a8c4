"""Quaternion matrix factorisations.

Every factorisation runs on the complex adjoint (see :mod:`quatstat.qmatrix`)
through the Jacobi kernels, then collapses the doubled adjoint spectrum back
to quaternion vectors with :func:`~quatstat.qmatrix.select_quaternion_basis`.

Gauge convention: quaternion eigen/singular vectors are right-multiplied by a
unit quaternion so that their largest-modulus entry is real and positive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import DimensionError, NotFactorableError, NumericError, StructureError
from .qmatrix import (
    QuatMatrix,
    complex_to_quat_columns,
    select_quaternion_basis,
    to_complex_adjoint,
)
from .quaternion import Axis, conj_components, hamilton, rotate_onto, split_components

DEFAULT_TOL = 1e-9
# residual above which a kernel result is reported as a numeric failure
FAILURE_RESIDUAL = 1e-8


@dataclass(frozen=True)
class EigResult:
    """``A = Q^H diag(eigenvalues) Q``; rows of ``Q`` are conjugated eigenvectors."""

    Q: QuatMatrix
    eigenvalues: np.ndarray
    residual: float

    @property
    def vectors(self) -> QuatMatrix:
        return self.Q.H


@dataclass(frozen=True)
class SvdResult:
    U: QuatMatrix
    sigma: np.ndarray
    V: QuatMatrix
    residual: float


@dataclass(frozen=True)
class AlphaFactorResult:
    """``A = Q^H diag(eigenvalues) Q^axis`` for an axis-Hermitian ``A``."""

    Q: QuatMatrix
    eigenvalues: np.ndarray
    axis: Axis
    residual: float


@dataclass(frozen=True)
class TakagiResult:
    """``A = U diag(sigma) U^T``."""

    U: QuatMatrix
    sigma: np.ndarray
    residual: float

    @property
    def V(self) -> QuatMatrix:
        return self.U.conj()


def unitarity_defect(Q: QuatMatrix) -> float:
    """``||Q Q^H - I||_F``."""
    return (Q @ Q.H - QuatMatrix.eye(Q.rows)).fro()


def _relative(diff: QuatMatrix, ref: QuatMatrix) -> float:
    scale = ref.fro()
    return diff.fro() / scale if scale > 0 else diff.fro()


def _require_square(A, what):
    if not A.is_square:
        raise StructureError(f"{what} requires a square matrix, got {A.shape}")


def _stable_desc(values, *secondary):
    """Indices sorting ``values`` descending, ties by secondary keys then index."""
    idx = np.arange(len(values))
    keys = (idx,) + tuple(-np.asarray(s) for s in reversed(secondary)) + (-np.asarray(values),)
    return np.lexsort(keys)


def _largest_entry(col_mod):
    peak = col_mod.max()
    return int(np.flatnonzero(col_mod >= peak * (1 - 1e-9))[0])


def _gauge_columns(V: QuatMatrix, companions=()):
    """Right-multiply each column of ``V`` (and the same column of each
    companion) so the column's largest-modulus entry is real positive."""
    data = V.to_array()
    comp = [C.to_array() for C in companions]
    mod = V.modulus()
    for j in range(data.shape[1]):
        if mod[:, j].max() == 0.0:
            continue
        i = _largest_entry(mod[:, j])
        g = conj_components(data[i, j]) / mod[i, j]
        data[:, j] = hamilton(data[:, j], g)
        for C in comp:
            if j < C.shape[1]:
                C[:, j] = hamilton(C[:, j], g)
        data[i, j, 1:] = 0.0
    return QuatMatrix(data), [QuatMatrix(C) for C in comp]


def _quat_columns_to_adjoint(V: QuatMatrix) -> np.ndarray:
    # first adjoint column [z1; -conj(z2)] of each quaternion column
    return np.vstack([V.z1, -V.z2.conj()])


# --- Hermitian eigendecomposition ---------------------------------------------

def eig_hermitian(A: QuatMatrix, tol: float = DEFAULT_TOL) -> EigResult:
    """Eigendecomposition of a quaternion Hermitian matrix, eigenvalues descending."""
    _require_square(A, "eig_hermitian")
    n = A.rows
    if A.fro() == 0.0:
        return EigResult(QuatMatrix.eye(n), np.zeros(n), 0.0)
    if not A.is_hermitian(tol):
        raise StructureError("eig_hermitian requires a Hermitian matrix (A = A^H)")
    Ah = (A + A.H) * 0.5
    w, vc, _ = _kernels.eigh(to_complex_adjoint(Ah))
    chosen = select_quaternion_basis(vc[:, _stable_desc(w)], n)
    V, _ = _gauge_columns(complex_to_quat_columns(chosen, n))
    lam = (V.H @ Ah @ V).diagonal()[:, 0]
    order = _stable_desc(lam)
    V = QuatMatrix(V.data[:, order])
    lam = lam[order]
    Q = V.H
    residual = _relative(Q.H @ QuatMatrix.diag(lam) @ Q - A, A)
    if residual > FAILURE_RESIDUAL:
        raise NumericError(f"adjoint eigenpairs did not collapse to a quaternion basis (residual {residual:.3g})")
    return EigResult(Q, lam, residual)


# --- singular value decomposition -------------------------------------------------

def svd(A: QuatMatrix) -> SvdResult:
    """Full quaternion SVD ``A = U diag(sigma) V^H`` with square unitary ``U``, ``V``."""
    m, n = A.shape
    k = min(m, n)
    if A.fro() == 0.0:
        return SvdResult(QuatMatrix.eye(m), np.zeros(k), QuatMatrix.eye(n), 0.0)
    if m < n:
        flipped = svd(A.H)
        U, V = flipped.V, flipped.U
        sigma = flipped.sigma
    else:
        U, sigma, V = _svd_tall(A)
    V, (U,) = _gauge_columns(V, companions=(U,))
    if m > n:
        tail, _ = _gauge_columns(QuatMatrix(U.data[:, n:]))
        U = QuatMatrix(np.concatenate([U.data[:, :n], tail.data], axis=1))
    recon = QuatMatrix(U.data[:, :k]) @ QuatMatrix.diag(sigma) @ QuatMatrix(V.data[:, :k]).H
    residual = _relative(recon - A, A)
    if residual > FAILURE_RESIDUAL:
        raise NumericError(f"quaternion SVD failed to reconstruct its input (residual {residual:.3g})")
    return SvdResult(U, sigma, V, residual)


def _svd_tall(A):
    m, n = A.shape
    g, vc, _ = _kernels.svd_columns(to_complex_adjoint(A))
    s = np.linalg.norm(g, axis=0)
    chosen = select_quaternion_basis(vc[:, _stable_desc(s)], n)
    V = complex_to_quat_columns(chosen, n)
    AV = A @ V
    sigma = np.sqrt(np.sum(AV.data ** 2, axis=(0, 2)))
    order = _stable_desc(sigma)
    V = QuatMatrix(V.data[:, order])
    AV = QuatMatrix(AV.data[:, order])
    sigma = sigma[order]
    rank = int(np.sum(sigma > sigma[0] * max(m, n) * 1e-15))
    left = QuatMatrix(AV.data[:, :rank] / sigma[:rank][None, :, None]) if rank else None
    cand = _quat_columns_to_adjoint(left) if left is not None else np.zeros((2 * m, 0), complex)
    chosen_u = select_quaternion_basis(cand, m, count=m, threshold=1e-6)
    U = complex_to_quat_columns(chosen_u, m)
    return U, sigma, V


# --- alpha-Hermitian factorisation --------------------------------------------------

def alpha_hermitian_factor(A: QuatMatrix, axis, tol: float = DEFAULT_TOL) -> AlphaFactorResult:
    """Factor an axis-Hermitian ``A`` as ``Q^H diag(lam) Q^axis`` with ``lam >= 0``.

    ``S = A * axis`` is skew-Hermitian whenever ``A = A^{axis H}``. Its
    unitary eigendecomposition ``S = U diag(d) U^H`` has pure-imaginary
    ``d``; rotating every ``d_m`` onto ``|d_m| * axis`` and setting
    ``Q = U^H`` gives ``A = -S * axis = Q^H diag(|d|) Q^axis``.

    The remaining freedom (left-multiplying a row of ``Q`` by a unit
    element of span{1, axis}) is fixed by making the Cayley-Dickson
    ``z1`` part (plane = axis) of each row's largest entry real positive.
    """
    axis = Axis.parse(axis)
    _require_square(A, "alpha_hermitian_factor")
    n = A.rows
    if A.fro() == 0.0:
        return AlphaFactorResult(QuatMatrix.eye(n), np.zeros(n), axis, 0.0)
    if not A.is_alpha_hermitian(axis, tol):
        raise StructureError(f"alpha_hermitian_factor requires A = A^{{{axis}H}}")
    As = (A + A.alpha_hermitian(axis)) * 0.5
    unit = axis.unit
    S = As * unit
    w, vc, _ = _kernels.eigh(1j * to_complex_adjoint(S))
    chosen = select_quaternion_basis(vc[:, _stable_desc(np.abs(w), w)], n)
    U = complex_to_quat_columns(chosen, n)
    d = (U.H @ S @ U).diagonal()
    lam = np.linalg.norm(d[:, 1:], axis=1)
    target = unit.to_array()
    Ud = U.to_array()
    tiny = lam.max() * 1e-300 if lam.max() > 0 else 0.0
    for m in range(n):
        if lam[m] <= tiny:
            continue
        direction = np.concatenate([[0.0], d[m, 1:] / lam[m]])
        Ud[:, m] = hamilton(Ud[:, m], rotate_onto(direction, target))
    Q = _gauge_alpha_rows(QuatMatrix(Ud).H, axis)
    order = _stable_desc(lam)
    Q = QuatMatrix(Q.data[order])
    lam = lam[order]
    residual = _relative(Q.H @ QuatMatrix.diag(lam) @ Q.involution(axis) - A, A)
    if residual > FAILURE_RESIDUAL:
        raise NumericError(f"alpha-Hermitian factorisation did not converge (residual {residual:.3g})")
    return AlphaFactorResult(Q, lam, axis, residual)


def _gauge_alpha_rows(Q: QuatMatrix, axis: Axis) -> QuatMatrix:
    data = Q.to_array()
    mod = Q.modulus()
    wing = axis.next()
    for r in range(data.shape[0]):
        i = _largest_entry(mod[r])
        z1, z2 = split_components(data[r, i], axis, wing)
        z = z1 if abs(z1) > 1e-12 * mod[r, i] else z2
        if abs(z) == 0.0:
            continue
        phase = np.conj(z) / abs(z)
        g = np.zeros(4)
        g[0] = phase.real
        g[axis.index] = phase.imag
        data[r] = hamilton(g, data[r])
    return QuatMatrix(data)


# --- 2x2 symmetric Takagi ---------------------------------------------------------

def commutation_check(A: QuatMatrix, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``(A conj(A))^* = conj(A) A`` within ``tol * ||A||_F^2``."""
    _require_square(A, "commutation_check")
    Ac = A.conj()
    gap = ((A @ Ac).conj() - Ac @ A).fro()
    return gap <= tol * A.fro() ** 2


def takagi_2x2_symmetric(A: QuatMatrix, tol: float = DEFAULT_TOL) -> TakagiResult:
    """``A = U diag(sigma) U^T`` for a 2x2 symmetric quaternion matrix.

    Precondition: ``A = A^T`` and ``commutation_check(A)``. Factors are
    produced when the matrix is diagonal or when all entries lie in one
    complex subfield span{1, u}; otherwise no factorisation exists even
    though the commutation test passes (e.g. ``[[i, 1], [1, j]]``), and
    :class:`NotFactorableError` is raised.
    """
    if A.shape != (2, 2):
        raise DimensionError(f"takagi_2x2_symmetric needs a 2x2 matrix, got {A.shape}")
    if not A.is_symmetric(tol):
        raise NotFactorableError("matrix is not symmetric (A != A^T)")
    if not commutation_check(A, tol):
        raise NotFactorableError(
            "(A conj(A))^* != conj(A) A: neither the diagonal nor the off-diagonal entries are real"
        )
    if A.fro() == 0.0:
        return TakagiResult(QuatMatrix.eye(2), np.zeros(2), 0.0)
    As = (A + A.T) * 0.5
    data = As.data
    scale = As.fro()
    if np.linalg.norm(data[0, 1]) <= tol * scale:
        U, sigma = _takagi_diagonal(data)
    else:
        u = _common_subfield(data.reshape(-1, 4), tol * scale)
        if u is None:
            raise NotFactorableError(
                "entries do not commute pairwise; the commutation test passes but no "
                "unitary U with A = U diag(sigma) U^T exists for this matrix"
            )
        U, sigma = _takagi_subfield(data, u)
    order = _stable_desc(sigma)
    U = QuatMatrix(U.data[:, order])
    sigma = sigma[order]
    residual = _relative(U @ QuatMatrix.diag(sigma) @ U.T - A, A)
    if residual > FAILURE_RESIDUAL:
        raise NumericError(f"Takagi factor failed to reconstruct (residual {residual:.3g})")
    return TakagiResult(U, sigma, residual)


def _unit_sqrt(q):
    """Principal square root of a unit quaternion."""
    r = np.array([1.0, 0.0, 0.0, 0.0]) + q
    n = np.linalg.norm(r)
    if n < 1e-12:  # q = -1
        return np.array([0.0, 1.0, 0.0, 0.0])
    return r / n


def _takagi_diagonal(data):
    U = np.zeros((2, 2, 4))
    sigma = np.zeros(2)
    for m in range(2):
        p = data[m, m]
        sigma[m] = np.linalg.norm(p)
        U[m, m] = _unit_sqrt(p / sigma[m]) if sigma[m] > 0 else np.array([1.0, 0.0, 0.0, 0.0])
    return QuatMatrix(U), sigma


def _common_subfield(entries, tol):
    """Unit pure quaternion ``u`` with every entry in span{1, u}, or None."""
    vecs = entries[:, 1:]
    norms = np.linalg.norm(vecs, axis=1)
    if norms.max() <= tol:
        return np.array([0.0, 1.0, 0.0, 0.0])
    u = vecs[int(np.argmax(norms))] / norms.max()
    if np.any(np.linalg.norm(np.cross(vecs, u), axis=1) > tol):
        return None
    return np.concatenate([[0.0], u])


def _takagi_subfield(data, u):
    """Complex Takagi inside span{1, u}, mapped back to quaternions."""
    uv = u[1:]
    Z = data[..., 0] + 1j * (data[..., 1:] @ uv)
    # complex SVD via the one-sided Jacobi kernel
    g, vc, _ = _kernels.svd_columns(Z)
    s = np.linalg.norm(g, axis=0)
    order = _stable_desc(s)
    s = s[order]
    V = vc[:, order]
    Uc = np.where(s > 0, g[:, order] / np.where(s > 0, s, 1.0), 0.0)
    if s[-1] <= s[0] * 1e-15:
        # rank deficient: complete the left basis orthonormally
        first = Uc[:, 0]
        Uc[:, 1] = np.array([-np.conj(first[1]), np.conj(first[0])])
    # symmetric A => conj(V) = U Z with Z block-unitary; W = U sqrt(Z)
    Zb = Uc.conj().T @ V.conj()
    blocks = []
    start = 0
    while start < 2:
        stop = start + 1
        while stop < 2 and abs(s[stop] - s[start]) <= 1e-10 * max(s[0], 1e-300):
            stop += 1
        blocks.append((start, stop))
        start = stop
    root = np.zeros((2, 2), dtype=np.complex128)
    for a, b in blocks:
        root[a:b, a:b] = scipy.linalg.sqrtm(Zb[a:b, a:b])
    W = Uc @ root
    Q = np.zeros((2, 2, 4))
    Q[..., 0] = W.real
    Q[..., 1:] = W.imag[..., None] * uv
    return QuatMatrix(Q), s


# --- joint diagonalisation obstruction -----------------------------------------

def unitary_joint_diag_obstruction(Cx: QuatMatrix, Cxa: QuatMatrix, axis, tol: float = DEFAULT_TOL) -> bool:
    """True when no unitary ``U`` can diagonalise both ``U^H Cx U`` and ``U^H Cxa U^axis``.

    The obstruction is ``Cx Cxa != (Cx Cxa)^{axis H}``.
    """
    axis = Axis.parse(axis)
    if Cx.shape != Cxa.shape:
        raise DimensionError(f"shape mismatch: {Cx.shape} vs {Cxa.shape}")
    if not Cx.is_hermitian(tol):
        raise StructureError("Cx must be Hermitian")
    if not Cxa.is_alpha_hermitian(axis, tol):
        raise StructureError(f"Cxa must be {axis}-Hermitian")
    scale = Cx.fro() * Cxa.fro()
    if scale == 0.0:
        return False
    P = Cx @ Cxa
    return (P - P.alpha_hermitian(axis)).fro() > tol * scale
