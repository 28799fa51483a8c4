"""Quaternion scalars, imaginary axes, and the elementwise kernels shared with matrices.

Component order everywhere is ``(a, b, c, d)`` for ``a + b i + c j + d k``.
The array helpers (``hamilton``, ``involution_components``, ...) work on any
array whose trailing axis has length 4.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidAxesError


class Axis(enum.Enum):
    I = 1
    J = 2
    K = 3

    @classmethod
    def parse(cls, value) -> "Axis":
        if isinstance(value, Axis):
            return value
        key = str(value).strip().upper()
        aliases = {"I": cls.I, "J": cls.J, "K": cls.K, "1": cls.I, "2": cls.J, "3": cls.K}
        if key not in aliases:
            raise InvalidAxesError(f"unknown axis {value!r}; expected one of i, j, k")
        return aliases[key]

    @property
    def index(self) -> int:
        """Position of this axis' component in (a, b, c, d)."""
        return self.value

    @property
    def unit(self) -> "Quaternion":
        comps = [0.0, 0.0, 0.0, 0.0]
        comps[self.value] = 1.0
        return Quaternion(*comps)

    def others(self) -> tuple["Axis", "Axis"]:
        return tuple(ax for ax in Axis if ax is not self)

    def third(self, other: "Axis") -> "Axis":
        if other is self:
            raise InvalidAxesError("axes must be distinct")
        (rest,) = [ax for ax in Axis if ax is not self and ax is not other]
        return rest

    def next(self) -> "Axis":
        """Cyclic successor (i -> j -> k -> i); the default Cayley-Dickson wing."""
        return Axis(self.value % 3 + 1)

    def __str__(self):
        return self.name.lower()


AXES = (Axis.I, Axis.J, Axis.K)


# --- array kernels -------------------------------------------------------

def hamilton(p, q):
    """Elementwise Hamilton product of two (..., 4) arrays (broadcasting)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


_CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])
_INVOLUTION_SIGNS = {
    Axis.I: np.array([1.0, 1.0, -1.0, -1.0]),
    Axis.J: np.array([1.0, -1.0, 1.0, -1.0]),
    Axis.K: np.array([1.0, -1.0, -1.0, 1.0]),
}
_AXIS_CONJ_SIGNS = {ax: _CONJ_SIGNS * s for ax, s in _INVOLUTION_SIGNS.items()}


def conj_components(x):
    return np.asarray(x, dtype=np.float64) * _CONJ_SIGNS


def involution_components(x, axis):
    return np.asarray(x, dtype=np.float64) * _INVOLUTION_SIGNS[Axis.parse(axis)]


def axis_conj_components(x, axis):
    return np.asarray(x, dtype=np.float64) * _AXIS_CONJ_SIGNS[Axis.parse(axis)]


def _check_axes(plane, wing):
    plane, wing = Axis.parse(plane), Axis.parse(wing)
    if plane is wing:
        raise InvalidAxesError(f"Cayley-Dickson plane and wing must differ (both {plane})")
    return plane, wing


def split_components(x, plane=Axis.I, wing=Axis.J):
    """Cayley-Dickson split of (..., 4) quaternions into complex ``z1, z2``.

    ``x = z1 + z2 * wing`` with ``z1, z2`` in span{1, plane}; the returned
    complex arrays encode ``re + im * plane``.
    """
    plane, wing = _check_axes(plane, wing)
    x = np.asarray(x, dtype=np.float64)
    z1 = x[..., 0] + 1j * x[..., plane.index]
    rest = x.copy()
    rest[..., 0] = 0.0
    rest[..., plane.index] = 0.0
    # z2 = rest * wing^{-1} = -rest * wing
    w = hamilton(rest, -_unit_components(wing))
    z2 = w[..., 0] + 1j * w[..., plane.index]
    return z1, z2


def join_components(z1, z2, plane=Axis.I, wing=Axis.J):
    """Inverse of :func:`split_components`."""
    plane, wing = _check_axes(plane, wing)
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.asarray(z2, dtype=np.complex128)
    q1 = np.zeros(z1.shape + (4,))
    q1[..., 0] = z1.real
    q1[..., plane.index] = z1.imag
    q2 = np.zeros(z2.shape + (4,))
    q2[..., 0] = z2.real
    q2[..., plane.index] = z2.imag
    return q1 + hamilton(q2, _unit_components(wing))


def _unit_components(axis):
    u = np.zeros(4)
    u[axis.index] = 1.0
    return u


# --- scalar type ---------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        a, b, c, d = (float(v) for v in np.asarray(arr, dtype=np.float64).reshape(4))
        return cls(a, b, c, d)

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    @property
    def real(self) -> float:
        return self.a

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.b, self.c, self.d])

    def is_pure(self, tol=0.0) -> bool:
        return abs(self.a) <= tol

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return qmul(self, other)

    def __rmul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return qmul(other, self)

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, float)):
            return Quaternion(self.a / scalar, self.b / scalar, self.c / scalar, self.d / scalar)
        return NotImplemented

    def __abs__(self):
        return modulus(self)

    def norm2(self) -> float:
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    def conj(self) -> "Quaternion":
        return conj(self)

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0.0:
            raise ZeroDivisionError("quaternion zero has no inverse")
        return self.conj() / n2

    def involution(self, axis) -> "Quaternion":
        return involution(self, axis)

    def axis_conj(self, axis) -> "Quaternion":
        return axis_conj(self, axis)

    def isclose(self, other, atol=1e-12, rtol=1e-10) -> bool:
        other = _coerce(other)
        diff = math.sqrt((self - other).norm2())
        return diff <= atol + rtol * max(abs(self), abs(other))

    def __repr__(self):
        return f"Quaternion({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"


def _coerce(value):
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Quaternion(float(value))
    return NotImplemented


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p q``."""
    return Quaternion(
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    )


def conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.a, -q.b, -q.c, -q.d)


def involution(q: Quaternion, axis) -> Quaternion:
    """``q^axis = -axis q axis``: keeps the real and ``axis`` parts, flips the other two."""
    return Quaternion.from_array(involution_components(q.to_array(), axis))


def axis_conj(q: Quaternion, axis) -> Quaternion:
    """Negate only the ``axis`` imaginary component."""
    return Quaternion.from_array(axis_conj_components(q.to_array(), axis))


def modulus(q: Quaternion) -> float:
    return math.sqrt(q.norm2())


def cayley_dickson_split(q: Quaternion, plane=Axis.I, wing=Axis.J) -> tuple[complex, complex]:
    z1, z2 = split_components(q.to_array(), plane, wing)
    return complex(z1), complex(z2)


def cayley_dickson_join(z1: complex, z2: complex, plane=Axis.I, wing=Axis.J) -> Quaternion:
    return Quaternion.from_array(join_components(z1, z2, plane, wing))


def rotate_onto(u, v):
    """Unit quaternion ``r`` (as a (4,) array) with ``r* u r = v`` for unit pure ``u, v``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    r = np.array([1.0, 0.0, 0.0, 0.0]) - hamilton(u, v)
    n = np.linalg.norm(r)
    if n > 1e-8:
        return r / n
    # u = -v: any unit pure quaternion orthogonal to u
    vec = u[1:]
    trial = np.eye(3)[int(np.argmin(np.abs(vec)))]
    perp = trial - vec * np.dot(vec, trial)
    out = np.zeros(4)
    out[1:] = perp / np.linalg.norm(perp)
    return out
