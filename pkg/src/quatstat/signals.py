"""Synthetic quaternion signals and the three-phase imbalance detector.

Random numbers come from numpy's counter-based Philox bit generator. Every
generator takes an integer seed; independent streams for channels or
trials are split off with ``SeedSequence.spawn`` (see :func:`spawn_seeds`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .qmatrix import QuatMatrix
from .quaternion import AXES, Axis, join_components
from .stats import SampleSet
from .transforms import ROUNDING_FLOOR, qaut

MIN_WINDOW = 8
SINGULAR_DET = 1e-8


def rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def spawn_seeds(seed, n: int) -> list:
    """``n`` independent child seed sequences of ``seed``."""
    return np.random.SeedSequence(int(seed)).spawn(n)


def _counts(L, N):
    if L < 1 or N < 1:
        raise DomainError(f"need at least one channel and one sample, got L={L}, N={N}")


def gen_h_proper(L: int, N: int, variance: float = 1.0, seed=0) -> SampleSet:
    """Four i.i.d. Gaussian components of variance ``variance / 4`` per channel."""
    _counts(L, N)
    if variance <= 0:
        raise DomainError("variance must be positive")
    g = rng(seed)
    x = g.standard_normal((L, N, 4)) * math.sqrt(variance / 4.0)
    return SampleSet(QuatMatrix(x), mean_removed=True)


def gen_c_alpha_improper(L: int, N: int, axis, var1, var2, seed=0, wing=None) -> SampleSet:
    """C^axis-improper vectors ``x = z1 + z2 * wing`` built from proper complex wings.

    ``z1``, ``z2`` live in span{1, axis}, have independent real and
    imaginary parts of equal variance, and total variances ``var1 != var2``
    (scalars or per-channel arrays).
    """
    _counts(L, N)
    axis = Axis.parse(axis)
    wing = axis.next() if wing is None else Axis.parse(wing)
    var1 = np.broadcast_to(np.asarray(var1, dtype=np.float64), (L,))
    var2 = np.broadcast_to(np.asarray(var2, dtype=np.float64), (L,))
    if np.any(var1 <= 0) or np.any(var2 <= 0):
        raise DomainError("wing variances must be positive")
    if np.any(np.isclose(var1, var2, rtol=1e-12, atol=0.0)):
        raise DomainError("var1 == var2 gives an H-proper signal; the wing variances must differ")
    g = rng(seed)
    parts = g.standard_normal((4, L, N))
    s1 = np.sqrt(var1 / 2.0)[:, None]
    s2 = np.sqrt(var2 / 2.0)[:, None]
    z1 = s1 * (parts[0] + 1j * parts[1])
    z2 = s2 * (parts[2] + 1j * parts[3])
    return SampleSet(QuatMatrix(join_components(z1, z2, axis, wing)), mean_removed=True)


def equicorrelation(rho: float, size: int = 4) -> np.ndarray:
    return np.full((size, size), rho) + (1.0 - rho) * np.eye(size)


def gen_rho_correlated(L: int, N: int, rho: float, seed=0) -> SampleSet:
    """Unit-variance Gaussian components with every pairwise correlation ``rho``."""
    _counts(L, N)
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    g = rng(seed)
    if rho == 1.0:
        common = g.standard_normal((L, N, 1))
        x = np.repeat(common, 4, axis=-1)
    else:
        chol = np.linalg.cholesky(equicorrelation(rho))
        x = g.standard_normal((L, N, 4)) @ chol.T
    return SampleSet(QuatMatrix(x), mean_removed=True)


def mixing_matrix(L: int, seed=0) -> QuatMatrix:
    """Real L x L standard-normal matrix, redrawn until ``|det| >= 1e-8``."""
    g = rng(seed)
    while True:
        A = g.standard_normal((L, L))
        if abs(np.linalg.det(A)) >= SINGULAR_DET:
            return QuatMatrix.from_real(A)


def mix(s: SampleSet, seed=0, mixing: QuatMatrix | None = None):
    """Return ``(A x, A)`` with a random real mixing matrix ``A``.

    ``mixing`` overrides the draw (used by tests to force ``A = I``).
    """
    if s.L < 2:
        raise DomainError("mixing needs at least two channels")
    A = mixing_matrix(s.L, seed) if mixing is None else mixing
    if A.shape != (s.L, s.L):
        raise DomainError(f"mixing matrix must be {s.L}x{s.L}, got {A.shape}")
    return SampleSet(A @ s.data, s.mean_removed), A


# --- three-phase power ------------------------------------------------------

@dataclass(frozen=True)
class FaultSpec:
    start_s: float = 0.25
    duration_s: float = 0.25
    amplitudes: tuple = (0.5, 1.3, 1.15)


@dataclass(frozen=True)
class ThreePhaseConfig:
    amplitudes: tuple = (1.0, 1.0, 1.0)
    phases: tuple = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
    f: float = 50.0
    dt: float = 1.0 / 5000.0
    n_samples: int = 5000
    fault: FaultSpec | None = None
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.f * self.dt >= 0.5:
            raise DomainError(f"f * dt = {self.f * self.dt:g} violates Nyquist (< 0.5)")
        if self.n_samples < 1:
            raise DomainError("n_samples must be positive")
        if len(self.amplitudes) != 3 or len(self.phases) != 3:
            raise DomainError("three amplitudes and three phases are required")


def three_phase_voltages(cfg: ThreePhaseConfig) -> np.ndarray:
    """(3, N) array of phase voltages, with the fault amplitudes switched in."""
    n = np.arange(cfg.n_samples)
    amp = np.tile(np.asarray(cfg.amplitudes, dtype=np.float64)[:, None], (1, cfg.n_samples))
    if cfg.fault is not None:
        t = n * cfg.dt
        inside = (t >= cfg.fault.start_s) & (t < cfg.fault.start_s + cfg.fault.duration_s)
        amp[:, inside] = np.asarray(cfg.fault.amplitudes, dtype=np.float64)[:, None]
    theta = 2.0 * math.pi * cfg.f * cfg.dt * n
    v = amp * np.sin(theta[None, :] + np.asarray(cfg.phases)[:, None])
    if cfg.noise_std > 0:
        v = v + rng(cfg.seed).standard_normal(v.shape) * cfg.noise_std
    return v


def gen_three_phase(cfg: ThreePhaseConfig) -> SampleSet:
    """Pure-quaternion stream ``v1 i + v2 j + v3 k`` as a 1 x N SampleSet."""
    v = three_phase_voltages(cfg)
    x = np.zeros((1, cfg.n_samples, 4))
    x[0, :, 1:] = v.T
    return SampleSet(QuatMatrix(x), mean_removed=True)


def delay_embed(stream: np.ndarray, length: int) -> SampleSet:
    """Sliding vectors ``(x(n), ..., x(n + length - 1))`` of a (T, 4) scalar stream."""
    stream = np.asarray(stream, dtype=np.float64)
    T = stream.shape[0]
    if not 1 <= length <= T:
        raise DomainError(f"embedding length {length} does not fit a stream of {T} samples")
    idx = np.arange(length)[:, None] + np.arange(T - length + 1)[None, :]
    return SampleSet(QuatMatrix(stream[idx]), mean_removed=True)


@dataclass
class ImbalanceTrace:
    times: np.ndarray  # window centres, seconds
    errors: np.ndarray  # (n_windows, 3) squared diagonal errors, percent
    flags: np.ndarray  # bool per window
    spread: np.ndarray  # max pairwise |e_a - e_b| per window
    baseline: float
    threshold: float
    meta: dict = field(default_factory=dict)

    def flagged_times(self) -> np.ndarray:
        return self.times[self.flags]


def window_errors(stream: SampleSet, window: int, hop: int, embed: int):
    """Per-window QAUT errors of a 1-channel stream; returns (starts, errors)."""
    x = stream.data.data[0]
    T = x.shape[0]
    starts = np.arange(0, T - window + 1, hop)
    errs = np.zeros((len(starts), 3))
    for w, st in enumerate(starts):
        res = qaut(delay_embed(x[st:st + window], embed))
        errs[w] = res.errors
    return starts, errs


def _spread(errs):
    return np.max(np.abs(errs[:, :, None] - errs[:, None, :]), axis=(1, 2))


def detect_imbalance(
    stream: SampleSet,
    window_s: float = 0.04,
    dt: float = 1.0 / 5000.0,
    *,
    hop_s: float | None = None,
    embed: int = 4,
    kappa: float = 5.0,
    baseline: float | None = None,
    baseline_s: float = 0.2,
) -> ImbalanceTrace:
    """Sliding-window QAUT imbalance detector.

    Each window is delay-embedded into ``embed``-long vectors and passed to
    the univariate QAUT. A window is flagged when the largest pairwise gap
    between its three squared diagonal errors exceeds ``kappa`` times the
    balanced baseline gap. Without an explicit ``baseline`` the largest gap
    over the leading ``baseline_s`` seconds (assumed balanced) is used.
    """
    if stream.L != 1:
        raise DomainError("detect_imbalance expects a single-channel stream")
    window = int(round(window_s / dt))
    if window < MIN_WINDOW:
        raise DomainError(f"window of {window} samples is below the minimum of {MIN_WINDOW}")
    if window > stream.N:
        raise DomainError(f"window of {window} samples exceeds the stream length {stream.N}")
    if not 1 <= embed < window:
        raise DomainError(f"embedding length {embed} must be in [1, {window})")
    hop = max(1, int(round((hop_s if hop_s is not None else window_s / 4) / dt)))
    starts, errs = window_errors(stream, window, hop, embed)
    spread = _spread(errs)
    times = (starts + window / 2.0) * dt
    if baseline is None:
        ref = (starts + window) * dt <= baseline_s + 1e-12
        if not np.any(ref):
            raise DomainError(f"no complete window inside the {baseline_s:g} s baseline segment")
        baseline = float(spread[ref].max())
    # noise-free balanced windows score at rounding level; never flag on that
    threshold = kappa * max(baseline, ROUNDING_FLOOR)
    flags = spread > threshold
    meta = {"window": window, "hop": hop, "embed": embed, "kappa": kappa, "dt": dt}
    return ImbalanceTrace(times, errs, flags, spread, baseline, threshold, meta)


def balanced_baseline(cfg: ThreePhaseConfig, window_s=0.04, hop_s=None, embed=4) -> float:
    """Largest pairwise error gap over a fault-free run of ``cfg``."""
    ref = ThreePhaseConfig(**{**cfg.__dict__, "fault": None})
    window = int(round(window_s / cfg.dt))
    hop = max(1, int(round((hop_s if hop_s is not None else window_s / 4) / cfg.dt)))
    _, errs = window_errors(gen_three_phase(ref), window, hop, embed)
    return float(_spread(errs).max())
