"""Uncorrelating transforms: whitening, the exact QUT and the approximate QAUT."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .decomp import alpha_hermitian_factor, eig_hermitian
from .errors import DegeneracyWarning, DomainError, RankDeficiencyError, StructureError, UndefinedError
from .qmatrix import QuatMatrix
from .quaternion import AXES, Axis
from .stats import CovarianceSet, SampleSet, covariance, covariance_set

# eigenvalues below this fraction of the trace count as zero for whitening
WHITEN_TOL = 1e-12
# relative eigen-gap below which qaut warns
DEGENERACY_GAP = 1e-8
# squared diagonal errors (percent) below this are rounding residue of an exact transform
ROUNDING_FLOOR = 1e-12


# --- whitening --------------------------------------------------------------

def whitening(C: QuatMatrix, tol: float = WHITEN_TOL) -> QuatMatrix:
    """Symmetric whitener ``D = V diag(lam)^(-1/2) V^H`` of a Hermitian PD ``C``."""
    eig = eig_hermitian(C)
    lam = eig.eigenvalues
    trace = float(np.sum(np.abs(lam)))
    floor = tol * trace
    bad = lam <= floor
    if trace == 0.0 or np.any(bad):
        worst = float(lam[bad][-1]) if np.any(bad) else 0.0
        raise RankDeficiencyError(
            f"covariance is not positive definite: eigenvalue {worst:.3g} <= {floor:.3g}", worst
        )
    V = eig.Q.H
    return V @ QuatMatrix.diag(1.0 / np.sqrt(lam)) @ V.H


# --- QUT --------------------------------------------------------------------

@dataclass(frozen=True)
class QutResult:
    Q: QuatMatrix
    axis: Axis
    D: QuatMatrix
    W: QuatMatrix
    lambda_alpha: np.ndarray

    def apply(self, s: SampleSet) -> SampleSet:
        return SampleSet(self.Q @ s.data, s.mean_removed)


def qut(s, axis) -> QutResult:
    """Quaternion uncorrelating transform: ``y = Q x`` has ``C_y = I`` and
    a real diagonal ``axis``-complementary covariance.

    ``s`` may be a SampleSet or a precomputed CovarianceSet.
    """
    axis = Axis.parse(axis)
    cs = s if isinstance(s, CovarianceSet) else covariance_set(s)
    D = whitening(cs.C)
    # complementary covariance of s = D x
    Cs = D @ cs.complementary(axis) @ D.alpha_hermitian(axis)
    Cs = (Cs + Cs.alpha_hermitian(axis)) * 0.5
    fac = alpha_hermitian_factor(Cs, axis)
    W = fac.Q.H
    return QutResult(W.H @ D, axis, D, W, fac.eigenvalues)


# --- error metric -------------------------------------------------------------

def off_diagonal_ratio(M: QuatMatrix) -> float:
    """Off-diagonal over diagonal power of ``M``, in percent."""
    if not M.is_square:
        raise StructureError(f"square matrix required, got {M.shape}")
    diag = float(np.sum(M.diagonal() ** 2))
    if diag == 0.0:
        raise UndefinedError("diagonal power is zero; the error ratio is undefined")
    return M.off_diagonal_power() / diag * 100.0


def squared_diag_error(M: QuatMatrix, n_norm: int) -> float:
    """Squared diagonal error ``sum_{i!=j} |m_ij|^2 / ((n_norm - 1) sum_i |m_ii|^2)``, percent.

    ``n_norm`` is the sample count of the data the matrix was estimated
    from. Use :func:`off_diagonal_ratio` for the unnormalised ratio.
    """
    if n_norm < 2:
        raise DomainError(f"n_norm must be at least 2, got {n_norm}")
    return off_diagonal_ratio(M) / (n_norm - 1)


# --- QAUT -------------------------------------------------------------------

@dataclass(frozen=True)
class QautResult:
    Phi: QuatMatrix
    lambda_x: np.ndarray
    errors: np.ndarray  # squared diagonal error per axis (i, j, k), percent
    ratios: np.ndarray  # unnormalised off/on-diagonal power per axis, percent
    rotated: dict  # axis -> Phi C_a Phi^{aH}
    n_norm: int

    def error(self, axis) -> float:
        return float(self.errors[Axis.parse(axis).index - 1])


def qaut(s, n_norm: int | None = None) -> QautResult:
    """Approximate uncorrelating transform from the eigenvectors of ``C``.

    ``Phi`` diagonalises the covariance exactly; the three complementary
    covariances are rotated as ``Phi C_a Phi^{aH}`` and scored with
    :func:`squared_diag_error`. ``n_norm`` defaults to the sample count.
    """
    cs = s if isinstance(s, CovarianceSet) else covariance_set(s)
    if n_norm is None:
        n_norm = cs.N
    eig = eig_hermitian(cs.C)
    lam = eig.eigenvalues
    trace = float(np.sum(np.abs(lam)))
    if len(lam) > 1 and trace > 0 and np.min(np.abs(np.diff(lam))) < DEGENERACY_GAP * trace:
        warnings.warn(
            "covariance has near-repeated eigenvalues; the QAUT basis and its errors are gauge-dependent",
            DegeneracyWarning,
            stacklevel=2,
        )
    Phi = eig.Q
    errors = np.zeros(3)
    ratios = np.zeros(3)
    rotated = {}
    for idx, a in enumerate(AXES):
        M = Phi @ cs.complementary(a) @ Phi.alpha_hermitian(a)
        rotated[a] = M
        if M.fro() == 0.0:
            continue  # vanishing complementary covariance: trivially diagonal
        ratios[idx] = off_diagonal_ratio(M)
        errors[idx] = squared_diag_error(M, n_norm)
    return QautResult(Phi, lam, errors, ratios, rotated, n_norm)


# --- rank reduction -----------------------------------------------------------

@dataclass(frozen=True)
class RankReduction:
    X_hat: QuatMatrix
    kept: int
    variance_ratios: np.ndarray
    Phi: QuatMatrix
    Y: QuatMatrix

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.variance_ratios)


def rank_reduce(X, P: int | None = None, threshold: float | None = None) -> RankReduction:
    """Keep the ``P`` highest-variance QAUT variables of an M x N data matrix.

    Either ``P`` or a cumulative variance ``threshold`` in (0, 1] selects
    how many transformed variables survive; ``X_hat = sum_m phi_m^H y_m``.
    """
    if isinstance(X, SampleSet):
        X = X.data
    M, N = X.shape
    if (P is None) == (threshold is None):
        raise DomainError("give exactly one of P or threshold")
    if P is not None and not 0 <= P <= M:
        raise DomainError(f"P must be in [0, {M}], got {P}")
    if threshold is not None and not 0.0 < threshold <= 1.0:
        raise DomainError(f"threshold must lie in (0, 1], got {threshold}")
    C = (X @ X.H) / N
    C = (C + C.H) * 0.5
    Phi = eig_hermitian(C).Q
    variances = (Phi @ C @ Phi.H).diagonal()[:, 0]
    order = np.lexsort((np.arange(M), -variances))
    Phi = QuatMatrix(Phi.data[order])
    variances = np.clip(variances[order], 0.0, None)
    total = variances.sum()
    ratios = variances / total if total > 0 else np.zeros(M)
    if P is None:
        if threshold >= 1.0:
            P = M
        else:
            P = int(min(M, np.searchsorted(np.cumsum(ratios), threshold - 1e-12) + 1))
    Y = Phi @ X
    if P == 0:
        X_hat = QuatMatrix.zeros(M, N)
    else:
        head = QuatMatrix(Phi.data[:P])
        X_hat = head.H @ QuatMatrix(Y.data[:P])
    return RankReduction(X_hat, P, ratios, Phi, Y)
