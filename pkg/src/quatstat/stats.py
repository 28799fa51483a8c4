"""Second-order sample statistics of quaternion vectors.

All estimators normalise by 1/N. The three complementary covariances are
``C_a = (1/N) sum x x^{aH}`` for ``a`` in {i, j, k}, and the
pseudo-covariance is ``P = (1/N) sum x x^T``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, NonZeroMeanWarning
from .qmatrix import QuatMatrix
from .quaternion import AXES, Axis, axis_conj_components, conj_components, hamilton

# sample mean counted as "non-negligible" above this fraction of the RMS
MEAN_WARN_RATIO = 0.01


@dataclass(frozen=True)
class SampleSet:
    """``data`` is L x N: column n holds the vector sample x(n).

    ``mean_removed`` records that the caller centred the data (or accepts
    a non-zero mean); estimators warn otherwise when the mean is large.
    """

    data: QuatMatrix
    mean_removed: bool = False

    def __post_init__(self):
        if not isinstance(self.data, QuatMatrix):
            object.__setattr__(self, "data", QuatMatrix(self.data))

    @classmethod
    def from_array(cls, arr, mean_removed=False) -> "SampleSet":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2 and arr.shape[-1] == 4:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[-1] != 4:
            raise DimensionError(f"expected (L, N, 4) components, got {arr.shape}")
        if arr.shape[1] == 0:
            raise DomainError("sample set has no samples")
        return cls(QuatMatrix(arr), mean_removed)

    @property
    def L(self) -> int:
        return self.data.rows

    @property
    def N(self) -> int:
        return self.data.cols

    def to_array(self) -> np.ndarray:
        return self.data.to_array()

    def mean(self) -> np.ndarray:
        """(L, 4) sample mean."""
        return self.data.data.mean(axis=1)

    def centered(self) -> "SampleSet":
        arr = self.data.data - self.mean()[:, None, :]
        return SampleSet(QuatMatrix(arr), mean_removed=True)

    def acknowledge_mean(self) -> "SampleSet":
        return SampleSet(self.data, mean_removed=True)

    def channels(self, idx) -> "SampleSet":
        return SampleSet(QuatMatrix(self.data.data[np.atleast_1d(idx)]), self.mean_removed)


def _checked(s: SampleSet) -> QuatMatrix:
    if s.N < 1:
        raise DomainError("sample set is empty")
    if not s.mean_removed:
        arr = s.data.data
        rms = np.sqrt(np.mean(np.sum(arr ** 2, axis=-1)))
        mean_norm = np.linalg.norm(arr.mean(axis=1))
        if rms > 0 and mean_norm > MEAN_WARN_RATIO * rms * np.sqrt(s.L):
            warnings.warn(
                f"sample mean norm {mean_norm:.3g} exceeds {MEAN_WARN_RATIO:g} x RMS; "
                "estimators assume zero-mean data (use SampleSet.centered())",
                NonZeroMeanWarning,
                stacklevel=3,
            )
    return s.data


# HAMILTON[r, p, q]: component r of e_p * e_q for basis units e = (1, i, j, k)
HAMILTON = np.stack([hamilton(np.eye(4)[p], np.eye(4)) for p in range(4)], axis=0).transpose(2, 0, 1)


def _right_signs(kind):
    if kind == "H":
        return conj_components(np.ones(4))
    if kind == "T":
        return np.ones(4)
    # x^{aH} entries are conj(x^a) = axis-conjugate of x
    return axis_conj_components(np.ones(4), kind)


def gram(s: SampleSet) -> np.ndarray:
    """Real component Gram tensor ``G[p, q] = (1/N) X_p X_q^T``, shape (4, 4, L, L)."""
    arr = s.data.data
    L, N = s.L, s.N
    flat = np.ascontiguousarray(arr.transpose(2, 0, 1)).reshape(4 * L, N)
    G = flat @ flat.T / N
    return G.reshape(4, L, 4, L).transpose(0, 2, 1, 3)


def _second_order(G, kind) -> QuatMatrix:
    """``(1/N) sum x y`` with ``y = x^H``, ``x^T`` or ``x^{aH}``, from the Gram tensor."""
    weights = HAMILTON * _right_signs(kind)[None, None, :]
    return QuatMatrix(np.einsum("rpq,pqmn->mnr", weights, G))


def covariance(s: SampleSet) -> QuatMatrix:
    _checked(s)
    C = _second_order(gram(s), "H")
    # exact Hermitian symmetry: average away rounding asymmetry
    return (C + C.H) * 0.5


def complementary_covariance(s: SampleSet, axis) -> QuatMatrix:
    axis = Axis.parse(axis)
    _checked(s)
    return _second_order(gram(s), axis)


def pseudo_covariance(s: SampleSet) -> QuatMatrix:
    _checked(s)
    return _second_order(gram(s), "T")


@dataclass(frozen=True)
class CovarianceSet:
    C: QuatMatrix
    Ci: QuatMatrix
    Cj: QuatMatrix
    Ck: QuatMatrix
    P: QuatMatrix
    N: int = field(default=0)

    def complementary(self, axis) -> QuatMatrix:
        return {Axis.I: self.Ci, Axis.J: self.Cj, Axis.K: self.Ck}[Axis.parse(axis)]

    def linked_pseudo(self) -> QuatMatrix:
        """``(Ci + Cj + Ck - C) / 2``, which equals P identically."""
        return (self.Ci + self.Cj + self.Ck - self.C) * 0.5

    def eq1_residual(self) -> float:
        """Relative gap between P and its expression in C, Ci, Cj, Ck."""
        gap = (self.P - self.linked_pseudo()).fro()
        scale = self.P.fro()
        return gap / scale if scale > 0 else gap

    @property
    def L(self) -> int:
        return self.C.rows


def covariance_set(s: SampleSet) -> CovarianceSet:
    _checked(s)
    G = gram(s)
    C = _second_order(G, "H")
    return CovarianceSet(
        C=(C + C.H) * 0.5,
        Ci=_second_order(G, Axis.I),
        Cj=_second_order(G, Axis.J),
        Ck=_second_order(G, Axis.K),
        P=_second_order(G, "T"),
        N=s.N,
    )


@dataclass(frozen=True)
class PropernessReport:
    kind: str  # "H-proper" | "C-improper" | "general-improper"
    axis: Axis | None
    norms: dict
    ratios: dict
    tol_rel: float

    @property
    def label(self) -> str:
        if self.kind == "C-improper":
            return f"C{self.axis}-improper"
        return self.kind

    def as_dict(self) -> dict:
        return {
            "class": self.label,
            "axis": None if self.axis is None else str(self.axis),
            "tol_rel": self.tol_rel,
            "norms": {str(a): self.norms[a] for a in AXES},
            "ratios": {str(a): self.ratios[a] for a in AXES},
        }


def properness_report(cs: CovarianceSet, tol_rel: float = 0.1) -> PropernessReport:
    """Classify by which complementary covariances exceed ``tol_rel * ||C||_F``."""
    ref = cs.C.fro()
    norms = {a: cs.complementary(a).fro() for a in AXES}
    ratios = {a: (norms[a] / ref if ref > 0 else 0.0) for a in AXES}
    active = [a for a in AXES if norms[a] > tol_rel * ref]
    if not active:
        return PropernessReport("H-proper", None, norms, ratios, tol_rel)
    if len(active) == 1:
        return PropernessReport("C-improper", active[0], norms, ratios, tol_rel)
    return PropernessReport("general-improper", None, norms, ratios, tol_rel)


def pair_coefficients(cs: CovarianceSet, axis) -> dict:
    """``|C_a[m, n]| / sqrt(C[m, m] C[n, n])`` for every channel pair m < n.

    A normalised cross-improperness measure; a plain quaternion analogue
    of the complex correlation coefficient, not a standardised statistic.
    """
    Ca = cs.complementary(axis)
    mod = Ca.modulus()
    var = cs.C.data[np.arange(cs.L), np.arange(cs.L), 0]
    out = {}
    for m in range(cs.L):
        for n in range(m + 1, cs.L):
            denom = np.sqrt(var[m] * var[n])
            out[(m, n)] = float(mod[m, n] / denom) if denom > 0 else 0.0
    return out
