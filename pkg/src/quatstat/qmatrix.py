"""Dense quaternion matrices and the complex adjoint embedding.

A :class:`QuatMatrix` wraps a read-only ``(rows, cols, 4)`` float64 array.
Products go through the Cayley-Dickson pair ``A = Z1 + Z2 j`` with complex
``Z1, Z2``, which turns one quaternion matmul into four complex ones:

    (Z1 + Z2 j)(W1 + W2 j) = (Z1 W1 - Z2 conj(W2)) + (Z1 W2 + Z2 conj(W1)) j
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError, NotAnAdjointError
from .quaternion import (
    Axis,
    Quaternion,
    axis_conj_components,
    conj_components,
    hamilton,
    involution_components,
)

ATOL = 1e-12
RTOL = 1e-10


class QuatMatrix:
    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64)
        if arr.ndim == 2 and arr.shape[1] == 4:
            arr = arr[:, None, :]
        if arr.ndim != 3 or arr.shape[2] != 4:
            raise DimensionError(f"expected a (rows, cols, 4) array, got shape {arr.shape}")
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise DomainError("quaternion matrices must be non-empty")
        arr.setflags(write=False)
        self._data = arr

    # --- constructors ---------------------------------------------------

    @classmethod
    def _wrap(cls, arr):
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        arr.setflags(write=False)
        obj._data = arr
        return obj

    @classmethod
    def from_components(cls, a, b=None, c=None, d=None):
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        zeros = np.zeros_like(a)
        parts = [a] + [zeros if p is None else np.atleast_2d(np.asarray(p, dtype=np.float64)) for p in (b, c, d)]
        return cls(np.stack(parts, axis=-1))

    @classmethod
    def from_complex_pair(cls, z1, z2):
        """Build ``Z1 + Z2 j`` from complex arrays encoding ``re + im i``."""
        z1 = np.atleast_2d(np.asarray(z1, dtype=np.complex128))
        z2 = np.atleast_2d(np.asarray(z2, dtype=np.complex128))
        if z1.shape != z2.shape:
            raise DimensionError(f"pair shapes differ: {z1.shape} vs {z2.shape}")
        return cls._wrap(np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1))

    @classmethod
    def from_quaternions(cls, rows):
        """Nested lists of :class:`Quaternion` (or reals) -> matrix."""
        arr = np.array([[_as_components(q) for q in row] for row in rows], dtype=np.float64)
        return cls(arr)

    @classmethod
    def zeros(cls, rows, cols=None):
        cols = rows if cols is None else cols
        return cls(np.zeros((rows, cols, 4)))

    @classmethod
    def eye(cls, n):
        arr = np.zeros((n, n, 4))
        arr[np.arange(n), np.arange(n), 0] = 1.0
        return cls._wrap(arr)

    @classmethod
    def from_real(cls, m):
        return cls.from_components(m)

    @classmethod
    def diag(cls, values):
        values = np.asarray(values)
        n = values.shape[0]
        arr = np.zeros((n, n, 4))
        if values.ndim == 1:
            arr[np.arange(n), np.arange(n), 0] = values
        else:
            arr[np.arange(n), np.arange(n), :] = values
        return cls._wrap(arr)

    @classmethod
    def column(cls, entries):
        """Column vector (L x 1); the shape used for a quaternion vector."""
        arr = np.array([_as_components(q) for q in entries], dtype=np.float64)
        if arr.shape[0] == 0:
            raise DomainError("quaternion vectors need length >= 1")
        return cls(arr[:, None, :])

    # --- views ------------------------------------------------------------

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self):
        return self._data.shape[:2]

    @property
    def rows(self):
        return self._data.shape[0]

    @property
    def cols(self):
        return self._data.shape[1]

    @property
    def is_square(self):
        return self.rows == self.cols

    @property
    def a(self):
        return self._data[..., 0]

    @property
    def b(self):
        return self._data[..., 1]

    @property
    def c(self):
        return self._data[..., 2]

    @property
    def d(self):
        return self._data[..., 3]

    @property
    def z1(self):
        return self._data[..., 0] + 1j * self._data[..., 1]

    @property
    def z2(self):
        return self._data[..., 2] + 1j * self._data[..., 3]

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key, slice(None))
        if len(key) != 2:
            raise IndexError("QuatMatrix takes (row, col) indices")
        if all(isinstance(k, (int, np.integer)) for k in key):
            return Quaternion.from_array(self._data[key])
        # integer indices keep their axis so the result stays two-dimensional
        r, c = (slice(k, k + 1 if k != -1 else None) if isinstance(k, (int, np.integer)) else k for k in key)
        return QuatMatrix(self._data[r, c])

    def __repr__(self):
        return f"QuatMatrix(shape={self.shape})"

    def __eq__(self, other):
        if not isinstance(other, QuatMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None

    # --- arithmetic -----------------------------------------------------

    def _same_shape(self, other):
        if not isinstance(other, QuatMatrix):
            raise TypeError(f"expected QuatMatrix, got {type(other).__name__}")
        if other.shape != self.shape:
            raise DimensionError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other):
        if not isinstance(other, QuatMatrix):
            return NotImplemented
        self._same_shape(other)
        return QuatMatrix._wrap(self._data + other._data)

    def __sub__(self, other):
        if not isinstance(other, QuatMatrix):
            return NotImplemented
        self._same_shape(other)
        return QuatMatrix._wrap(self._data - other._data)

    def __neg__(self):
        return QuatMatrix._wrap(-self._data)

    def __mul__(self, other):
        """Right scalar multiplication: ``A * s`` (entry-wise ``a_mn s``)."""
        if isinstance(other, (int, float, np.floating, np.integer)):
            return QuatMatrix._wrap(self._data * float(other))
        if isinstance(other, Quaternion):
            return QuatMatrix._wrap(hamilton(self._data, other.to_array()))
        return NotImplemented

    def __rmul__(self, other):
        """Left scalar multiplication: ``s * A``."""
        if isinstance(other, (int, float, np.floating, np.integer)):
            return QuatMatrix._wrap(self._data * float(other))
        if isinstance(other, Quaternion):
            return QuatMatrix._wrap(hamilton(other.to_array(), self._data))
        return NotImplemented

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, float, np.floating, np.integer)):
            return QuatMatrix._wrap(self._data / float(scalar))
        return NotImplemented

    def __matmul__(self, other):
        if not isinstance(other, QuatMatrix):
            return NotImplemented
        return matmul(self, other)

    # --- structural operators -------------------------------------------

    def conj(self):
        return QuatMatrix._wrap(conj_components(self._data))

    def transpose(self):
        return QuatMatrix._wrap(self._data.transpose(1, 0, 2))

    T = property(transpose)

    def hermitian(self):
        return QuatMatrix._wrap(conj_components(self._data.transpose(1, 0, 2)))

    H = property(hermitian)

    def involution(self, axis):
        return QuatMatrix._wrap(involution_components(self._data, axis))

    def axis_conj(self, axis):
        return QuatMatrix._wrap(axis_conj_components(self._data, axis))

    def alpha_hermitian(self, axis):
        """``A^{aH} = (A^a)^H``."""
        return QuatMatrix._wrap(involution_components(conj_components(self._data.transpose(1, 0, 2)), axis))

    # --- measures -------------------------------------------------------

    def fro(self) -> float:
        return float(np.sqrt(np.sum(self._data ** 2)))

    def modulus(self) -> np.ndarray:
        return np.sqrt(np.sum(self._data ** 2, axis=-1))

    def diagonal(self) -> np.ndarray:
        n = min(self.shape)
        return self._data[np.arange(n), np.arange(n), :]

    def off_diagonal_power(self) -> float:
        mod2 = np.sum(self._data ** 2, axis=-1)
        # summed over the off-diagonal mask; subtracting the diagonal from
        # the total cancels catastrophically when the matrix is near-diagonal
        return float(mod2[~np.eye(*mod2.shape, dtype=bool)].sum())

    def allclose(self, other, atol=ATOL, rtol=RTOL) -> bool:
        self._same_shape(other)
        diff = np.sqrt(np.sum((self._data - other._data) ** 2, axis=-1))
        scale = np.maximum(self.modulus(), other.modulus())
        return bool(np.all(diff <= atol + rtol * scale))

    def is_hermitian(self, tol=1e-9) -> bool:
        if not self.is_square:
            return False
        return (self - self.H).fro() <= tol * max(self.fro(), 1e-300)

    def is_alpha_hermitian(self, axis, tol=1e-9) -> bool:
        if not self.is_square:
            return False
        return (self - self.alpha_hermitian(axis)).fro() <= tol * max(self.fro(), 1e-300)

    def is_symmetric(self, tol=1e-9) -> bool:
        if not self.is_square:
            return False
        return (self - self.T).fro() <= tol * max(self.fro(), 1e-300)

    def to_array(self) -> np.ndarray:
        return np.array(self._data)


def _as_components(q):
    if isinstance(q, Quaternion):
        return q.to_array()
    if isinstance(q, (int, float, np.floating, np.integer)):
        return np.array([float(q), 0.0, 0.0, 0.0])
    arr = np.asarray(q, dtype=np.float64)
    if arr.shape != (4,):
        raise DimensionError(f"cannot interpret {q!r} as a quaternion")
    return arr


def matmul(A: QuatMatrix, B: QuatMatrix) -> QuatMatrix:
    if A.cols != B.rows:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    z1, z2 = A.z1, A.z2
    w1, w2 = B.z1, B.z2
    p1 = z1 @ w1 - z2 @ w2.conj()
    p2 = z1 @ w2 + z2 @ w1.conj()
    return QuatMatrix.from_complex_pair(p1, p2)


def identity(n: int) -> QuatMatrix:
    return QuatMatrix.eye(n)


def to_complex_adjoint(A: QuatMatrix) -> np.ndarray:
    """2R x 2C complex matrix ``[[Z1, Z2], [-conj(Z2), conj(Z1)]]``."""
    z1, z2 = A.z1, A.z2
    return np.block([[z1, z2], [-z2.conj(), z1.conj()]])


def from_complex_adjoint(M, atol=1e-10) -> QuatMatrix:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] % 2 or M.shape[1] % 2:
        raise NotAnAdjointError(f"adjoint must have even dimensions, got {M.shape}")
    r, c = M.shape[0] // 2, M.shape[1] // 2
    z1, z2 = M[:r, :c], M[:r, c:]
    bottom = np.block([-z2.conj(), z1.conj()])
    err = np.max(np.abs(M[r:, :] - bottom)) if M.size else 0.0
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if err > atol * scale:
        raise NotAnAdjointError(f"matrix lacks adjoint block structure (deviation {err:.3g})")
    return QuatMatrix.from_complex_pair(z1, z2)


# --- complex <-> quaternion column helpers used by the decompositions ---

def complex_to_quat_columns(vc: np.ndarray, n: int) -> QuatMatrix:
    """Map adjoint-space column vectors ``[x; y]`` to quaternion columns ``x - conj(y) j``."""
    x = vc[:n, :]
    y = vc[n:, :]
    return QuatMatrix.from_complex_pair(x, -y.conj())


def partner(vc: np.ndarray, n: int) -> np.ndarray:
    """The second adjoint column ``[-conj(y); conj(x)]`` belonging to ``[x; y]``."""
    x = vc[:n]
    y = vc[n:]
    return np.concatenate([-y.conj(), x.conj()])


def select_quaternion_basis(candidates: np.ndarray, n: int, count: int | None = None, threshold=1e-3) -> np.ndarray:
    """Greedy pick of adjoint-space vectors that are quaternion-orthonormal.

    ``candidates`` is (2n, K), columns in preference order. Each accepted
    vector is Gram-Schmidt orthogonalised against the already accepted
    vectors *and* their partners, which is exactly quaternion orthogonality.
    Missing directions are completed from the standard basis. Returns the
    (2n, count) array of accepted vectors.
    """
    count = n if count is None else count
    basis = np.zeros((2 * n, 2 * count), dtype=np.complex128)
    chosen = np.zeros((2 * n, count), dtype=np.complex128)
    k = 0

    def try_add(vec):
        nonlocal k
        w = np.array(vec, dtype=np.complex128)
        ref = np.linalg.norm(w)
        if ref == 0.0:
            return False
        B = basis[:, : 2 * k]
        for _ in range(2):
            w = w - B @ (B.conj().T @ w)
        nrm = np.linalg.norm(w)
        if nrm <= threshold * ref:
            return False
        w = w / nrm
        chosen[:, k] = w
        basis[:, 2 * k] = w
        basis[:, 2 * k + 1] = partner(w, n)
        k += 1
        return True

    for col in range(candidates.shape[1]):
        if k == count:
            break
        try_add(candidates[:, col])
    e = 0
    while k < count and e < 2 * n:
        unit = np.zeros(2 * n, dtype=np.complex128)
        unit[e] = 1.0
        try_add(unit)
        e += 1
    return chosen
