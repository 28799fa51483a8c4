"""Acceptance criteria, one test per criterion at the stated tolerance.

Each test registers a PASS/FAIL line (see conftest.record); the summary is
printed at the end of the pytest run.
"""
import os
import time
import warnings

import numpy as np
import pytest

import oracles
from conftest import record
from quatstat import (
    QuatMatrix,
    SampleSet,
    alpha_hermitian_factor,
    commutation_check,
    covariance_set,
    eig_hermitian,
    qaut,
    svd,
    takagi_2x2_symmetric,
    unitary_joint_diag_obstruction,
)
from quatstat.cli import main
from quatstat.decomp import unitarity_defect
from quatstat.errors import DegeneracyWarning, NotFactorableError
from quatstat.experiments import (
    DEFAULT_RHOS,
    DEFAULT_SIZES,
    decorrelate_experiment,
    imbalance_experiment,
    near_rank_one,
    qaut_sweep,
    trend_report,
)
from quatstat.io import write_qmat
from quatstat.quaternion import AXES, ONE, Quaternion
from quatstat.signals import FaultSpec, ThreePhaseConfig, gen_h_proper, gen_rho_correlated, mix
from quatstat.transforms import rank_reduce, squared_diag_error

SWEEP_SEED = 2024
SWEEP_TRIALS = 50
SWEEP_N = 10_000


@pytest.fixture(scope="module")
def sweeps():
    out = {}
    for mode in ("univariate", "multivariate"):
        t0 = time.perf_counter()
        sw = qaut_sweep(mode, DEFAULT_RHOS, DEFAULT_SIZES, SWEEP_TRIALS, SWEEP_N, SWEEP_SEED)
        out[mode] = (sw, time.perf_counter() - t0)
    return out


# 1 -------------------------------------------------------------------------------

def test_criterion_01_algebra():
    g = np.random.default_rng(1)
    t0 = time.perf_counter()
    failures = 0
    p45_generic = 0
    for _ in range(1000):
        m, n, p = (int(v) for v in g.integers(1, 9, 3))
        A = QuatMatrix(g.standard_normal((m, n, 4)))
        B = QuatMatrix(g.standard_normal((n, p, 4)))
        AB = A @ B
        ok = A.T.conj() == A.conj().T
        ok &= AB.H.allclose(B.H @ A.H)
        for a in AXES:
            b, c = a.others()
            ok &= A.axis_conj(a) == A.conj().involution(a) == A.involution(a).conj()
            ok &= A.involution(a).T == A.T.involution(a)
            ok &= A.alpha_hermitian(a) == A.involution(a).H == A.H.involution(a)
            ok &= A.involution(b).involution(c).allclose(A.involution(a))
            ok &= AB.involution(a).allclose(A.involution(a) @ B.involution(a))
            ok &= AB.alpha_hermitian(a).allclose(B.alpha_hermitian(a) @ A.alpha_hermitian(a))
        failures += not ok
        if m == n == p and n > 1:
            p45_generic += (not AB.conj().allclose(A.conj() @ B.conj())) and (not AB.T.allclose(B.T @ A.T))
    # stored counterexample: A = [i], B = [j]
    A = QuatMatrix.from_quaternions([[Quaternion(0, 1, 0, 0)]])
    B = QuatMatrix.from_quaternions([[Quaternion(0, 0, 1, 0)]])
    p5 = np.allclose((A @ B).T.data[0, 0], [0, 0, 0, 1]) and np.allclose((B.T @ A.T).data[0, 0], [0, 0, 0, -1])
    p4 = not (A @ B).conj().allclose(A.conj() @ B.conj())
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and p4 and p5 and elapsed < 5.0
    record(1, ok, f"{failures} property failures in 1000 pairs; P4/P5 counterexample "
                  f"{'violated' if p4 and p5 else 'NOT violated'}; {p45_generic} random square pairs also "
                  f"violate P4/P5; {elapsed:.2f}s")
    assert ok


# 2 -------------------------------------------------------------------------------

def test_criterion_02_linked_identity():
    g = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        L = int(g.integers(1, 9))
        N = int(g.integers(2, 500))
        X = g.standard_normal((L, N, 4)) * g.uniform(0.01, 100) + g.standard_normal(4)
        worst = max(worst, covariance_set(SampleSet.from_array(X, mean_removed=True)).eq1_residual())
    ok = worst <= 1e-13
    record(2, ok, f"worst relative residual {worst:.2e} (limit 1e-13)")
    assert ok


# 3 -------------------------------------------------------------------------------

def _takagi_inputs(g):
    mats = []
    for _ in range(10):
        p, r = g.standard_normal(2)
        q = Quaternion(*g.standard_normal(4))
        mats.append(QuatMatrix.from_quaternions([[p * ONE, q], [q, r * ONE]]))
        u = g.standard_normal(3)
        u /= np.linalg.norm(u)
        e = [Quaternion(a, *(b * u)) for a, b in g.standard_normal((3, 2))]
        mats.append(QuatMatrix.from_quaternions([[e[0], e[1]], [e[1], e[2]]]))
        d = QuatMatrix.zeros(2).to_array()
        d[0, 0], d[1, 1] = g.standard_normal(4), g.standard_normal(4)
        mats.append(QuatMatrix(d))
    return mats


def test_criterion_03_decompositions():
    g = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst_res = worst_unit = 0.0
    for n in (2, 5, 8, 16, 32):
        B = QuatMatrix(g.standard_normal((n, n, 4)))
        r = eig_hermitian(B + B.H)
        worst_res, worst_unit = max(worst_res, r.residual), max(worst_unit, unitarity_defect(r.Q))
        for shape in ((n, n), (n, max(1, n - 3)), (max(1, n - 3), n)):
            r = svd(QuatMatrix(g.standard_normal(shape + (4,))))
            worst_res = max(worst_res, r.residual)
            worst_unit = max(worst_unit, unitarity_defect(r.U), unitarity_defect(r.V))
        for a in AXES:
            r = alpha_hermitian_factor(B + B.alpha_hermitian(a), a)
            worst_res, worst_unit = max(worst_res, r.residual), max(worst_unit, unitarity_defect(r.Q))
    for A in _takagi_inputs(g):
        r = takagi_2x2_symmetric(A)
        worst_res, worst_unit = max(worst_res, r.residual), max(worst_unit, unitarity_defect(r.U))
    elapsed = time.perf_counter() - t0
    ok = worst_res <= 1e-10 and worst_unit <= 1e-10 and elapsed < 30
    record(3, ok, f"worst residual {worst_res:.1e}, worst unitarity defect {worst_unit:.1e}, {elapsed:.1f}s")
    assert ok


# 4 -------------------------------------------------------------------------------

def test_criterion_04_takagi_gate():
    g = np.random.default_rng(4)
    counts = {}
    for family in ("real-diagonal", "real-off-diagonal", "neither"):
        fa = fr = 0
        for _ in range(30):
            q = [Quaternion(*g.standard_normal(4)) for _ in range(3)]
            if family == "real-diagonal":
                q[0], q[2] = Quaternion(g.standard_normal()), Quaternion(g.standard_normal())
            elif family == "real-off-diagonal":
                q[1] = Quaternion(g.standard_normal())
            A = QuatMatrix.from_quaternions([[q[0], q[1]], [q[1], q[2]]])
            predicted = commutation_check(A, 1e-9)
            try:
                takagi_2x2_symmetric(A, 1e-9)
                accepted = True
            except NotFactorableError:
                accepted = False
            fa += accepted and not predicted
            fr += predicted and not accepted
        counts[family] = (fa, fr)
    ok = all(fa == 0 and fr == 0 for fa, fr in counts.values())
    detail = "; ".join(f"{k}: {fa} false accepts, {fr} false rejects" for k, (fa, fr) in counts.items())
    record(4, ok, detail)
    assert ok


# 5 -------------------------------------------------------------------------------

def test_criterion_05_qut():
    t0 = time.perf_counter()
    defect, off, other = [], [], []
    for t in range(20):
        s = decorrelate_experiment(channels=3, n_samples=10_000, axis="k", seed=500 + t)["summary"]
        defect.append(s["cy_identity_defect"])
        off.append(s["offdiag_power_ratio"])
        other.append(max(s["other_axes_ratio"].values()))
    elapsed = time.perf_counter() - t0
    ok = np.mean(defect) < 0.05 and np.mean(off) < 0.05 and np.mean(other) < 0.05 and elapsed < 60
    record(5, ok, f"mean ||Cy-I||/sqrt3 {np.mean(defect):.1e}, off-diag power {100 * np.mean(off):.2e}%, "
                  f"max(||Cy^i||,||Cy^j||)/||Cy|| {np.mean(other):.3f}, {elapsed:.1f}s")
    assert ok


# 6 / 7 ---------------------------------------------------------------------------

def test_criterion_06_qaut_levels(sweeps):
    parts = []
    ok = True
    for mode, (sw, elapsed) in sweeps.items():
        at = sw.cell(0.5, 20)[0]
        high = sw.mean[np.asarray(sw.rhos) >= 0.95 - 1e-9].max()
        good = bool(np.all(at < 1.0) and high < 0.1 and elapsed < 300)
        ok &= good
        parts.append(f"{mode}: max eps2 at (0.5, 20) {at.max():.3g}%, max at rho>=0.95 {high:.2g}%, {elapsed:.0f}s")
    record(6, ok, "; ".join(parts))
    assert ok


@pytest.mark.parametrize("mode", ["univariate", "multivariate"])
def test_criterion_07_qaut_trends(sweeps, mode):
    sw, _ = sweeps[mode]
    rep = trend_report(sw)
    bad = [r for r in rep["rows"] if not r["ok"]]
    detail = f"{mode}: {len(rep['rows']) - len(bad)}/{len(rep['rows'])} rows monotone"
    if bad:
        detail += " (failing: " + ", ".join(f"{r['axis']} along {r['along']} at {r['at']:g}" for r in bad) + ")"
    record("7." + ("1" if mode == "univariate" else "2"), rep["ok"], detail)
    assert rep["ok"]


# 8 -------------------------------------------------------------------------------

def test_criterion_08_exactness(sweeps):
    rotated, raw = [], []
    for t in range(20):
        s = gen_h_proper(5, 10_000, seed=800 + t)
        cs = covariance_set(s)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegeneracyWarning)
            rotated.append(qaut(cs).errors)
        raw.append([squared_diag_error(cs.complementary(a), s.N) for a in AXES])
    rotated, raw = np.mean(rotated, axis=0), np.mean(raw, axis=0)
    sw, _ = sweeps["univariate"]
    full = sw.mean[-1]
    ok = bool(np.all(rotated < 3 * raw) and full.max() < 0.1)
    record(8, ok, f"H-proper eps2 {np.array2string(rotated, precision=4)}% vs baseline "
                  f"{np.array2string(raw, precision=4)}%; rho=1 max {full.max():.1e}%")
    assert ok


# 9 -------------------------------------------------------------------------------

def test_criterion_09_obstruction():
    g = np.random.default_rng(9)
    false_on_commuting = 0
    for t in range(100):
        a = AXES[t % 3]
        U = QuatMatrix(oracles.random_unitary(4, g))
        C = U @ QuatMatrix.diag(g.uniform(1, 3, 4)) @ U.H
        Ca = U @ QuatMatrix.diag(g.uniform(-1, 1, 4)) @ U.alpha_hermitian(a)
        false_on_commuting += not unitary_joint_diag_obstruction(C, Ca, a)
    true_on_generic = 0
    for t in range(100):
        a = AXES[t % 3]
        s, _ = mix(gen_rho_correlated(4, 2000, 0.7, seed=900 + t), seed=1900 + t)
        cs = covariance_set(s)
        true_on_generic += unitary_joint_diag_obstruction(cs.C, cs.complementary(a), a)
    ok = false_on_commuting == 100 and true_on_generic >= 95
    record(9, ok, f"false on {false_on_commuting}/100 commuting pairs, true on {true_on_generic}/100 generic pairs")
    assert ok


# 10 ------------------------------------------------------------------------------

def test_criterion_10_rank_reduction():
    X = near_rank_one(n_samples=2000, noise_ratio=1e-4, seed=10)
    top = rank_reduce(X, P=1).variance_ratios[0]
    full = rank_reduce(X, P=2)
    err = (full.X_hat - X.data).fro() / X.data.fro()
    ok = top > 0.99 and err < 1e-10
    record(10, ok, f"top variable explains {100 * top:.4f}% of variance; full-P error {err:.1e}")
    assert ok


# 11 ------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def imbalance_runs():
    balanced = imbalance_experiment(ThreePhaseConfig(n_samples=50_000), baseline="leading")["trace"]
    fault = imbalance_experiment(ThreePhaseConfig(n_samples=5000, fault=FaultSpec()))["trace"]
    return balanced, fault


def test_criterion_11_detection(imbalance_runs):
    balanced, fault = imbalance_runs
    win = 0.04
    start, stop = 0.25, 0.5
    times = fault.flagged_times()
    inside_ok = len(times) > 0 and times.min() >= start - win and times.max() <= stop + win
    covers = len(times) > 0 and times.min() <= start + win and times.max() >= stop - win
    core = (fault.times >= start + win) & (fault.times <= stop - win)
    solid = bool(np.all(fault.flags[core]))
    ok = (not balanced.flags.any()) and inside_ok and covers and solid
    span = f"{times.min():.3f}-{times.max():.3f}s" if len(times) else "none"
    record("11.1", ok, f"balanced 10 s: {int(balanced.flags.sum())} flags; fault run flags {span} "
                       f"({len(times)} windows) for a 0.25-0.50 s fault")
    assert ok


def test_criterion_11_direction(imbalance_runs):
    _, fault = imbalance_runs
    half = 0.02
    pre = fault.times + half <= 0.25
    during = (fault.times - half >= 0.25) & (fault.times + half <= 0.5)
    before = fault.errors[pre].mean(axis=0)
    inside = fault.errors[during].mean(axis=0)
    ok = bool(inside[0] < before[0] and inside[1] > before[1] and inside[2] > before[2])
    fmt = lambda v: "(" + ", ".join(f"{x:.3g}" for x in v) + ")"  # noqa: E731
    record("11.2", ok, f"mean eps2 (i, j, k) before {fmt(before)}% during {fmt(inside)}%; "
                       "expected i down, j and k up")
    assert ok


# 12 ------------------------------------------------------------------------------

def _outputs(d):
    return {n: open(os.path.join(d, n), "rb").read() for n in sorted(os.listdir(d)) if n != "manifest.json"}


def test_criterion_12_determinism(tmp_path):
    g = np.random.default_rng(12)
    B = QuatMatrix(g.standard_normal((4, 4, 4)))
    write_qmat(tmp_path / "h.qmat", B + B.H)
    commands = {
        "factor": ["factor", str(tmp_path / "h.qmat"), "--kind", "eig"],
        "decorrelate": ["decorrelate", "--seed", "5", "--n-samples", "3000"],
        "qaut-sweep": ["qaut-sweep", "--seed", "5", "--trials", "3", "--n-samples", "500",
                       "--rho-grid", "0.5:1:0.25", "--size-grid", "3,6"],
        "rank-reduce": ["rank-reduce", "--seed", "5", "--rank", "1"],
        "imbalance": ["imbalance", "--seed", "5", "--duration", "0.6"],
        "check": ["check", "--seed", "5", "--generator", "c-alpha", "--n-samples", "2000"],
    }
    mismatched = []
    for name, argv in commands.items():
        first, second = tmp_path / f"{name}-1", tmp_path / f"{name}-2"
        assert main(argv + ["--out", str(first)]) == 0
        assert main(["replay", str(first / "manifest.json"), "--out", str(second)]) == 0
        if _outputs(first) != _outputs(second):
            mismatched.append(name)
    ok = not mismatched
    record(12, ok, f"{len(commands) - len(mismatched)}/{len(commands)} commands byte-identical on replay")
    assert ok
