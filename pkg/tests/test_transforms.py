import warnings

import numpy as np
import pytest

from conftest import random_hermitian, random_qmatrix
from quatstat import QuatMatrix, covariance_set, qaut, qut, rank_reduce, squared_diag_error, whitening
from quatstat.decomp import unitarity_defect
from quatstat.errors import DegeneracyWarning, DomainError, RankDeficiencyError, UndefinedError
from quatstat.experiments import near_rank_one
from quatstat.signals import gen_c_alpha_improper, gen_h_proper, gen_rho_correlated, mix
from quatstat.transforms import off_diagonal_ratio


def test_whitening_examples(rng):
    assert whitening(QuatMatrix.eye(3)).allclose(QuatMatrix.eye(3))
    assert whitening(QuatMatrix.diag([4.0, 1.0])).allclose(QuatMatrix.diag([0.5, 1.0]))
    B = random_qmatrix(8, 8, rng)
    C = B @ B.H + QuatMatrix.eye(8) * 0.1
    D = whitening(C)
    assert (D @ C @ D.H - QuatMatrix.eye(8)).fro() < 1e-9


def test_whitening_rank_deficient(rng):
    B = random_qmatrix(4, 2, rng)
    with pytest.raises(RankDeficiencyError) as info:
        whitening(B @ B.H)
    assert abs(info.value.eigenvalue) < 1e-9


def test_squared_diag_error_examples():
    assert squared_diag_error(QuatMatrix.diag([1.0, 2.0, 3.0]), 10) == 0.0
    M = QuatMatrix.from_real(np.ones((2, 2)))
    assert squared_diag_error(M, 2) == pytest.approx(100.0)
    assert off_diagonal_ratio(M) == pytest.approx(100.0)
    with pytest.raises(UndefinedError):
        squared_diag_error(QuatMatrix.from_real([[0.0, 1.0], [1.0, 0.0]]), 5)
    with pytest.raises(DomainError):
        squared_diag_error(M, 1)


def _qut_metrics(s, res):
    y = res.apply(s)
    cs = covariance_set(y)
    defect = (cs.C - QuatMatrix.eye(s.L)).fro() / np.sqrt(s.L)
    Ck = cs.complementary(res.axis)
    off = Ck.off_diagonal_power() / float(np.sum(Ck.diagonal() ** 2))
    return defect, off, cs


def test_qut_c_kappa_improper():
    x = gen_c_alpha_improper(3, 10_000, "k", np.array([1.0, 2.0, 0.5]), np.array([4.0, 0.5, 3.0]), seed=11)
    s, _ = mix(x, seed=12)
    res = qut(s, "k")
    defect, off, cs = _qut_metrics(s, res)
    assert defect < 0.05
    assert off < 0.05
    # Q = W^H D with W unitary
    assert unitarity_defect(res.W) < 1e-10
    assert res.Q.allclose(res.W.H @ res.D)
    # the population has Ci = Cj = 0
    assert cs.Ci.fro() < 0.05 * cs.C.fro()
    assert cs.Cj.fro() < 0.05 * cs.C.fro()


def test_qut_h_proper():
    s = gen_h_proper(3, 20_000, seed=4)
    res = qut(s, "i")
    defect, _, _ = _qut_metrics(s, res)
    assert defect < 1e-10  # exact on the sample covariance
    assert np.all(res.lambda_alpha < 0.05)


def test_qut_rate():
    # C_y - I is exact on the training sample, so measure on a fresh draw
    Ns = [1_000, 10_000, 100_000]
    means = []
    for N in Ns:
        vals = []
        for t in range(20):
            x = gen_c_alpha_improper(3, N, "k", np.array([1.0, 2.0, 0.5]), np.array([4.0, 0.5, 3.0]), seed=100 + t)
            s, A = mix(x, seed=7)
            res = qut(s, "k")
            fresh = gen_c_alpha_improper(3, N, "k", np.array([1.0, 2.0, 0.5]), np.array([4.0, 0.5, 3.0]), seed=900 + t)
            fs, _ = mix(fresh, seed=7, mixing=A)
            cy = covariance_set(res.apply(fs)).C
            vals.append((cy - QuatMatrix.eye(3)).fro())
        means.append(np.mean(vals))
    slope = np.polyfit(np.log10(Ns), np.log10(means), 1)[0]
    assert -0.65 <= slope <= -0.35


def test_qaut_h_proper_is_small():
    s = gen_h_proper(4, 10_000, seed=2)
    res = qaut(s)
    # complementary covariances are estimation noise of order 1/sqrt(N)
    C = covariance_set(s).C
    for M in res.rotated.values():
        assert M.fro() < 5 / np.sqrt(s.N) * C.fro()
    assert np.all(res.errors < 0.1)
    assert unitarity_defect(res.Phi) < 1e-10
    assert np.all(np.diff(res.lambda_x) <= 0)


def test_qaut_diagonalises_covariance():
    s = gen_rho_correlated(6, 5000, 0.7, seed=3)
    cs = covariance_set(s)
    res = qaut(cs)
    D = res.Phi @ cs.C @ res.Phi.H
    assert (D - QuatMatrix.diag(res.lambda_x)).fro() < 1e-9 * cs.C.fro()


def test_qaut_fully_correlated():
    res = qaut(gen_rho_correlated(10, 10_000, 1.0, seed=8))
    assert np.all(res.errors < 0.1)


def test_qaut_normalisation():
    s = gen_rho_correlated(5, 2000, 0.5, seed=1)
    res = qaut(s)
    assert np.allclose(res.errors, res.ratios / (s.N - 1))
    assert np.allclose(qaut(s, n_norm=2).errors, res.ratios)


def test_qaut_degeneracy_warning():
    s = gen_h_proper(2, 4, seed=0)
    arr = np.zeros((2, 4, 4))
    arr[0, :, 0] = [1, -1, 1, -1]
    arr[1, :, 0] = [1, 1, -1, -1]
    with pytest.warns(DegeneracyWarning):
        qaut(type(s).from_array(arr, mean_removed=True))


def test_rank_reduce_full_and_zero(rng):
    X = random_qmatrix(4, 50, rng)
    full = rank_reduce(X, P=4)
    assert (full.X_hat - X).fro() < 1e-10 * X.fro()
    assert rank_reduce(X, threshold=1.0).kept == 4
    zero = rank_reduce(QuatMatrix.zeros(3, 10), P=2)
    assert zero.X_hat.fro() == 0 and np.all(zero.variance_ratios == 0)


def test_rank_reduce_monotone(rng):
    X = random_qmatrix(5, 80, rng)
    errs = [(rank_reduce(X, P=p).X_hat - X).fro() for p in range(6)]
    assert all(b <= a + 1e-10 for a, b in zip(errs, errs[1:]))
    ratios = rank_reduce(X, P=1).variance_ratios
    assert np.all(np.diff(ratios) <= 0) and ratios.sum() == pytest.approx(1.0)


def test_rank_reduce_near_rank_one():
    red = rank_reduce(near_rank_one(seed=5), P=1)
    assert red.variance_ratios[0] > 0.99


def test_rank_reduce_errors(rng):
    X = random_qmatrix(3, 10, rng)
    with pytest.raises(DomainError):
        rank_reduce(X, P=4)
    with pytest.raises(DomainError):
        rank_reduce(X)
    with pytest.raises(DomainError):
        rank_reduce(X, threshold=1.5)
