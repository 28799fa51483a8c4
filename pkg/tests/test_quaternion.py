import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from quatstat import Axis, Quaternion, axis_conj, conj, involution, qmul
from quatstat.errors import InvalidAxesError
from quatstat.qmatrix import QuatMatrix
from quatstat.quaternion import (
    AXES,
    I,
    J,
    K,
    cayley_dickson_join,
    cayley_dickson_split,
    hamilton,
    modulus,
    rotate_onto,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
quats = st.builds(Quaternion, finite, finite, finite, finite)
axes = st.sampled_from(AXES)


def close(p, q, tol=1e-9):
    return np.allclose(np.asarray(p.to_array()), np.asarray(q.to_array()), atol=tol, rtol=1e-12)


def test_product_example():
    # frozen from the basis-table oracle
    assert qmul(Quaternion(1, 1, 0, 0), Quaternion(1, 0, 1, 0)).isclose(Quaternion(1, 1, 1, 1))


def test_basis_products():
    assert (I * J).isclose(K)
    assert (J * K).isclose(I)
    assert (K * I).isclose(J)
    assert (J * I).isclose(-K)
    for u in (I, J, K):
        assert (u * u).isclose(Quaternion(-1, 0, 0, 0))


@given(quats, quats)
def test_product_matches_table(p, q):
    expect = oracles.qmul(p.to_array(), q.to_array())
    assert np.allclose(qmul(p, q).to_array(), expect, rtol=1e-12, atol=1e-9)


def test_array_hamilton_matches_left_matrix(rng):
    p = rng.standard_normal((50, 4))
    q = rng.standard_normal((50, 4))
    got = hamilton(p, q)
    for n in range(50):
        assert np.allclose(got[n], oracles.left_matrix(p[n]) @ q[n])


def test_conj_examples():
    assert conj(Quaternion(1, 2, 3, 4)) == Quaternion(1, -2, -3, -4)
    assert conj(Quaternion(3.5, 0, 0, 0)) == Quaternion(3.5, 0, 0, 0)


@given(quats, quats)
def test_conj_reverses_products(p, q):
    assert close(conj(p * q), conj(q) * conj(p), 1e-6)


def test_involution_examples():
    assert involution(Quaternion(1, 2, 3, 4), "i") == Quaternion(1, 2, -3, -4)
    assert involution(I, Axis.I).isclose(I)
    q = Quaternion(1, 2, 3, 4)
    assert involution(involution(q, "i"), "j").isclose(involution(q, "k"))


@given(quats, axes)
def test_involution_is_rotation(q, a):
    assert np.allclose(involution(q, a).to_array(), oracles.involution(q.to_array(), str(a)))


def test_axis_conj_examples():
    assert axis_conj(Quaternion(1, 2, 3, 4), "i") == Quaternion(1, -2, 3, 4)
    q = Quaternion(1, 0, 3, 4)
    assert axis_conj(q, "i") == q


@given(quats, axes)
def test_axis_conj_involutive(q, a):
    assert axis_conj(axis_conj(q, a), a) == q


@given(quats, quats)
def test_multiplicative_norm(p, q):
    assert math.isclose(modulus(p * q), modulus(p) * modulus(q), rel_tol=1e-10, abs_tol=1e-9)


@given(quats)
def test_axis_conjugates_sum(q):
    total = axis_conj(q, "i") + axis_conj(q, "j") + axis_conj(q, "k") - conj(q)
    assert close(total, q * 2.0, 1e-9)


def test_cayley_dickson_example():
    z1, z2 = cayley_dickson_split(Quaternion(1, 2, 3, 4), "i", "j")
    assert z1 == 1 + 2j and z2 == 3 + 4j
    _, z2 = cayley_dickson_split(Quaternion(5, 0, 0, 0))
    assert z2 == 0


@given(quats, axes, axes)
def test_cayley_dickson_round_trip(q, plane, wing):
    if plane is wing:
        with pytest.raises(InvalidAxesError):
            cayley_dickson_split(q, plane, wing)
        return
    z1, z2 = cayley_dickson_split(q, plane, wing)
    # z1 + z2 * wing with z in span{1, plane}, via the table oracle
    pz1 = np.zeros(4)
    pz1[0], pz1[plane.index] = z1.real, z1.imag
    pz2 = np.zeros(4)
    pz2[0], pz2[plane.index] = z2.real, z2.imag
    rebuilt = pz1 + oracles.qmul(pz2, oracles.unit(str(wing)))
    assert np.allclose(rebuilt, q.to_array(), atol=1e-9)
    assert close(cayley_dickson_join(z1, z2, plane, wing), q)


def test_axis_parse():
    assert Axis.parse("K") is Axis.K
    assert Axis.I.third(Axis.J) is Axis.K
    with pytest.raises(InvalidAxesError):
        Axis.parse("x")


@given(quats.filter(lambda q: abs(q) > 1e-3 and np.linalg.norm(q.vector) > 1e-3), axes)
def test_rotate_onto(q, a):
    u = np.concatenate([[0.0], q.vector / np.linalg.norm(q.vector)])
    r = rotate_onto(u, oracles.unit(str(a)))
    assert math.isclose(np.linalg.norm(r), 1.0, rel_tol=1e-12)
    # conj(r) u r = target
    got = oracles.qmul(oracles.qmul(oracles.conj(r), u), r)
    assert np.allclose(got, oracles.unit(str(a)), atol=1e-9)


# --- matrix properties ---------------------------------------------------------

dims = st.integers(1, 8)
seeds = st.integers(0, 2**32 - 1)


def _pair(seed, m, n, p):
    g = np.random.default_rng(seed)
    return QuatMatrix(g.standard_normal((m, n, 4))), QuatMatrix(g.standard_normal((n, p, 4)))


@given(seeds, dims, dims, dims, axes)
def test_properties_p1_p3(seed, m, n, _, a):
    A, _ = _pair(seed, m, n, 1)
    assert A.T.conj() == A.conj().T
    assert A.axis_conj(a) == A.conj().involution(a) == A.involution(a).conj()
    assert A.involution(a).T == A.T.involution(a)
    assert A.alpha_hermitian(a) == A.involution(a).H == A.H.involution(a)
    b, c = a.others()
    assert A.involution(b).involution(c).allclose(A.involution(a))
    assert A.involution(c).involution(b).allclose(A.involution(a))


@given(seeds, dims, dims, dims, axes)
def test_properties_p6_p8(seed, m, n, p, a):
    A, B = _pair(seed, m, n, p)
    AB = A @ B
    assert AB.H.allclose(B.H @ A.H)
    assert AB.involution(a).allclose(A.involution(a) @ B.involution(a))
    assert AB.alpha_hermitian(a).allclose(B.alpha_hermitian(a) @ A.alpha_hermitian(a))


@given(seeds, st.integers(2, 6))
def test_p4_p5_fail_generically(seed, n):
    A, B = _pair(seed, n, n, n)
    AB = A @ B
    assert not AB.conj().allclose(A.conj() @ B.conj())
    assert not AB.T.allclose(B.T @ A.T)


def test_p4_p5_counterexample():
    A = QuatMatrix.from_quaternions([[I]])
    B = QuatMatrix.from_quaternions([[J]])
    AB = A @ B
    assert np.allclose(AB.T.data[0, 0], [0, 0, 0, 1])
    assert np.allclose((B.T @ A.T).data[0, 0], [0, 0, 0, -1])
    # (ij)* = -k while i* j* = k
    assert np.allclose(AB.conj().data[0, 0], [0, 0, 0, -1])
    assert np.allclose((A.conj() @ B.conj()).data[0, 0], [0, 0, 0, 1])
