"""Experiment drivers shared by the CLI and the acceptance tests.

Each runner is a pure function of its arguments (including the seed) and
returns plain arrays/dicts; the CLI only serialises them.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _accel
from .decomp import unitary_joint_diag_obstruction
from .errors import DegeneracyWarning, DomainError
from .qmatrix import QuatMatrix
from .quaternion import AXES, Axis, hamilton
from .signals import (
    FaultSpec,
    ThreePhaseConfig,
    balanced_baseline,
    detect_imbalance,
    gen_c_alpha_improper,
    gen_h_proper,
    gen_rho_correlated,
    gen_three_phase,
    mix,
    rng,
)
from .stats import SampleSet, covariance_set, pair_coefficients, properness_report
from .transforms import ROUNDING_FLOOR, qaut, qut, rank_reduce

DEFAULT_RHOS = tuple(np.round(np.arange(0.5, 1.0 + 1e-9, 0.05), 10))
DEFAULT_SIZES = (5, 10, 15, 20)


def parse_grid(text: str, integer=False) -> tuple:
    """``a:b:step`` (inclusive of b) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid {text!r} must look like a:b:step")
        a, b, step = (float(p) for p in parts)
        if step <= 0 or b < a:
            raise DomainError(f"grid {text!r} needs step > 0 and b >= a")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        values = [a + k * step for k in range(count)]
    else:
        values = [float(p) for p in text.split(",") if p.strip()]
    if not values:
        raise DomainError(f"empty grid {text!r}")
    if integer:
        return tuple(int(round(v)) for v in values)
    return tuple(float(np.round(v, 10)) for v in values)


def _pool_map(fn, items, threads=None):
    threads = threads or _accel.max_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- QAUT sweeps --------------------------------------------------------------

@dataclass
class SweepResult:
    mode: str
    rhos: tuple
    sizes: tuple
    trials: int
    n_samples: int
    seed: int
    errors: np.ndarray  # (n_rho, n_size, trials, 3)

    @property
    def mean(self):
        return self.errors.mean(axis=2)

    @property
    def sem(self):
        if self.trials < 2:
            return np.zeros_like(self.mean)
        return self.errors.std(axis=2, ddof=1) / math.sqrt(self.trials)

    def cell(self, rho, size):
        ri = int(np.argmin(np.abs(np.asarray(self.rhos) - rho)))
        si = list(self.sizes).index(size)
        return self.mean[ri, si], self.sem[ri, si]

    def rows(self):
        """Flat records: one per (rho, size, axis)."""
        out = []
        mean, sem = self.mean, self.sem
        for ri, rho in enumerate(self.rhos):
            for si, size in enumerate(self.sizes):
                for ai, ax in enumerate(AXES):
                    out.append({
                        "rho": rho, "size": size, "axis": str(ax),
                        "mean_error_pct": float(mean[ri, si, ai]),
                        "sem_pct": float(sem[ri, si, ai]),
                    })
        return out


def _sweep_trial(args):
    mode, rho, size, n_samples, seq = args
    data_seq, mix_seq = seq.spawn(2)
    s = gen_rho_correlated(size, n_samples, rho, seed=data_seq)
    if mode == "multivariate":
        s, _ = mix(s, seed=mix_seq)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        return qaut(s).errors


def qaut_sweep(mode="univariate", rhos=DEFAULT_RHOS, sizes=DEFAULT_SIZES, trials=50,
               n_samples=10_000, seed=0, threads=None) -> SweepResult:
    """Mean squared diagonal error over a (rho, L or M) grid.

    Univariate: L i.i.d. rho-correlated quaternion entries per sample.
    Multivariate: M such channels mixed by a random real M x M matrix.

    Trials use common random numbers across the rho grid: trial ``t`` at
    size index ``s`` draws from the same stream (and, multivariate, the
    same mixing matrix) for every rho, so differences along rho are paired.
    """
    if mode not in ("univariate", "multivariate"):
        raise DomainError(f"unknown sweep mode {mode!r}")
    if trials < 1:
        raise DomainError("trials must be positive")
    jobs = []
    for rho in rhos:
        for si, size in enumerate(sizes):
            for t in range(trials):
                seq = np.random.SeedSequence(int(seed), spawn_key=(si, t))
                jobs.append((mode, float(rho), int(size), int(n_samples), seq))
    flat = _pool_map(_sweep_trial, jobs, threads)
    errors = np.asarray(flat).reshape(len(rhos), len(sizes), trials, 3)
    return SweepResult(mode, tuple(rhos), tuple(sizes), trials, n_samples, int(seed), errors)


def trend_inversions(values, sem, increasing: bool):
    """Inversions along a 1-D sequence expected to be monotone.

    Returns (count, all_within_one_sem). ``increasing`` selects the
    expected direction (non-decreasing when True). Steps smaller than
    ``ROUNDING_FLOOR`` count as ties.
    """
    v = np.asarray(values)
    s = np.asarray(sem)
    diffs = np.diff(v) if increasing else -np.diff(v)
    bad = np.flatnonzero(diffs < -ROUNDING_FLOOR)
    tol = np.maximum(s[bad], s[bad + 1])
    return len(bad), bool(np.all(-diffs[bad] <= tol))


def trend_report(sweep: SweepResult) -> dict:
    """Per-row monotonicity: non-increasing in rho, non-decreasing in size."""
    mean, sem = sweep.mean, sweep.sem
    rows = []
    ok = True
    for ai, ax in enumerate(AXES):
        for si, size in enumerate(sweep.sizes):
            n, small = trend_inversions(mean[:, si, ai], sem[:, si, ai], increasing=False)
            good = n == 0 or (n == 1 and small)
            ok &= good
            rows.append({"axis": str(ax), "along": "rho", "at": size, "inversions": n, "ok": good})
        for ri, rho in enumerate(sweep.rhos):
            if np.all(np.abs(mean[ri, :, ai]) <= ROUNDING_FLOOR):
                continue  # exact transform: flat zero row
            n, small = trend_inversions(mean[ri, :, ai], sem[ri, :, ai], increasing=True)
            good = n == 0 or (n == 1 and small)
            ok &= good
            rows.append({"axis": str(ax), "along": "size", "at": rho, "inversions": n, "ok": good})
    return {"ok": bool(ok), "rows": rows}


# --- QUT decorrelation --------------------------------------------------------

def decorrelate_experiment(channels=3, n_samples=10_000, axis="k", var1=1.0, var2=4.0,
                           source="c-alpha", seed=0) -> dict:
    """Mix independent improper (or H-proper) channels and undo the mixing with the QUT."""
    axis = Axis.parse(axis)
    gen_seq, mix_seq = np.random.SeedSequence(int(seed)).spawn(2)
    if source == "c-alpha":
        # channel-dependent wing variances keep the QUT spectrum non-degenerate
        g = rng(gen_seq.spawn(1)[0])
        v1 = var1 * g.uniform(0.5, 1.5, channels)
        v2 = var2 * g.uniform(0.5, 1.5, channels)
        s = gen_c_alpha_improper(channels, n_samples, axis, v1, v2, seed=gen_seq)
    elif source == "h-proper":
        s = gen_h_proper(channels, n_samples, 1.0, seed=gen_seq)
    else:
        raise DomainError(f"unknown source {source!r}")
    x, A = mix(s, seed=mix_seq)
    before = covariance_set(x)
    q = qut(before, axis)
    y = q.apply(x)
    after = covariance_set(y)
    eye = QuatMatrix.eye(channels)
    Ca = after.complementary(axis)
    diag_power = float(np.sum(Ca.diagonal() ** 2))
    return {
        "x": x,
        "y": y,
        "mixing": A,
        "transform": q,
        "before": before,
        "after": after,
        "summary": {
            "axis": str(axis),
            "source": source,
            "channels": channels,
            "n_samples": n_samples,
            "before_class": properness_report(before).label,
            "after_class": properness_report(after).label,
            "cy_identity_defect": (after.C - eye).fro() / math.sqrt(channels),
            "offdiag_power_ratio": Ca.off_diagonal_power() / diag_power if diag_power > 0 else 0.0,
            "other_axes_ratio": {
                str(a): after.complementary(a).fro() / after.C.fro() for a in AXES if a is not axis
            },
            "lambda_alpha": [float(v) for v in q.lambda_alpha],
            "pairs_before": {f"{m}-{n}": v for (m, n), v in pair_coefficients(before, axis).items()},
            "pairs_after": {f"{m}-{n}": v for (m, n), v in pair_coefficients(after, axis).items()},
        },
    }


# --- rank reduction -----------------------------------------------------------------

def near_rank_one(n_samples=2000, noise_ratio=1e-4, seed=0) -> SampleSet:
    """Two variates ``x2 = q x1 + e`` with a random unit quaternion ``q``.

    The noise ``e`` has variance ``noise_ratio`` times that of ``x1``.
    """
    src_seq, q_seq, e_seq = np.random.SeedSequence(int(seed)).spawn(3)
    x1 = gen_rho_correlated(1, n_samples, 0.8, seed=src_seq).data.data[0]
    q = rng(q_seq).standard_normal(4)
    q /= np.linalg.norm(q)
    var = float(np.mean(np.sum(x1 ** 2, axis=-1)))
    e = rng(e_seq).standard_normal((n_samples, 4)) * math.sqrt(noise_ratio * var / 4.0)
    x2 = hamilton(q, x1) + e
    return SampleSet(QuatMatrix(np.stack([x1, x2])), mean_removed=True)


def rank_reduce_experiment(X, P=None, threshold=None) -> dict:
    res = rank_reduce(X, P=P, threshold=threshold)
    Xm = X.data if isinstance(X, SampleSet) else X
    scale = Xm.fro()
    err = (Xm - res.X_hat).fro() / scale if scale > 0 else 0.0
    raw = np.clip(((Xm @ Xm.H) / Xm.cols).diagonal()[:, 0], 0.0, None)
    raw_sorted = np.sort(raw)[::-1]
    raw_ratio = raw_sorted / raw_sorted.sum() if raw_sorted.sum() > 0 else np.zeros_like(raw_sorted)
    table = []
    for m, r in enumerate(res.variance_ratios):
        table.append({
            "variable": m + 1,
            "variance_ratio": float(r),
            "log10_ratio": float(np.log10(r)) if r > 0 else float("-inf"),
            "cumulative_transformed": float(res.cumulative[m]),
            "cumulative_original": float(np.cumsum(raw_ratio)[m]),
        })
    return {"result": res, "reconstruction_error": err, "table": table}


# --- three-phase imbalance --------------------------------------------------------

def imbalance_experiment(cfg: ThreePhaseConfig, window_s=0.04, hop_s=None, embed=4,
                         kappa=5.0, baseline="reference") -> dict:
    """Run the detector; ``baseline`` is "reference" (fault-free twin run) or "leading"."""
    stream = gen_three_phase(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        base = balanced_baseline(cfg, window_s, hop_s, embed) if baseline == "reference" else None
        trace = detect_imbalance(stream, window_s, cfg.dt, hop_s=hop_s, embed=embed,
                                 kappa=kappa, baseline=base)
    return {"trace": trace, "config": cfg}


# --- data checks --------------------------------------------------------------------

def check_report(s: SampleSet, tol_rel=0.1) -> dict:
    """Linkage residual, properness class and joint-diagonalisation obstruction per axis.

    Axes whose complementary covariance is below the properness tolerance
    are treated as vanishing (no obstruction): a sampled H-proper signal
    has tiny but non-zero complementary covariances that would otherwise
    always trip the exact commutation test.
    """
    cs = covariance_set(s)
    rep = properness_report(cs, tol_rel)
    obstruction = {}
    for a in AXES:
        if rep.ratios[a] <= tol_rel:
            obstruction[str(a)] = False
        else:
            obstruction[str(a)] = bool(unitary_joint_diag_obstruction(cs.C, cs.complementary(a), a))
    return {
        "eq1_residual": cs.eq1_residual(),
        "properness": rep.as_dict(),
        "obstruction": obstruction,
        "L": s.L,
        "N": s.N,
    }


__all__ = [
    "DEFAULT_RHOS", "DEFAULT_SIZES", "FaultSpec", "SweepResult", "ThreePhaseConfig",
    "check_report", "decorrelate_experiment", "imbalance_experiment", "near_rank_one",
    "parse_grid", "qaut_sweep", "rank_reduce_experiment", "trend_report",
]
