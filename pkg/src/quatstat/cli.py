"""``quatstat`` command-line driver.

Every command writes its artifacts plus a ``manifest.json`` into ``--out``.
``quatstat replay MANIFEST`` re-executes the recorded configuration, which
must reproduce the listed artifacts byte for byte.

Exit codes: 0 ok, 1 usage, 2 structure/domain error, 3 numeric failure, 4 I/O.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import secrets
import sys
import warnings

import numpy as np

from . import __version__
from .decomp import (
    alpha_hermitian_factor,
    eig_hermitian,
    svd,
    takagi_2x2_symmetric,
    unitarity_defect,
)
from .errors import DomainError, IOFailure, QuatStatError
from .experiments import (
    check_report,
    decorrelate_experiment,
    imbalance_experiment,
    near_rank_one,
    parse_grid,
    qaut_sweep,
    rank_reduce_experiment,
    trend_report,
)
from .io import LAYOUTS, fmt_float, ingest_csv, read_qmat, write_qmat
from .qmatrix import QuatMatrix
from .signals import FaultSpec, ThreePhaseConfig, gen_c_alpha_improper, gen_h_proper, gen_rho_correlated
from .stats import SampleSet

SCHEMA = "quatstat/1"
EXIT_OK, EXIT_USAGE = 0, 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- output helpers -----------------------------------------------------------------

class Outputs:
    """Collects written artifacts and their digests."""

    def __init__(self, directory):
        self.dir = directory
        self.files = {}
        try:
            os.makedirs(directory, exist_ok=True)
        except OSError as exc:
            raise IOFailure(f"cannot create output directory {directory}: {exc.strerror}") from exc

    def _record(self, name):
        path = os.path.join(self.dir, name)
        with open(path, "rb") as fh:
            self.files[name] = hashlib.sha256(fh.read()).hexdigest()
        return path

    def text(self, name, content):
        path = os.path.join(self.dir, name)
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(content)
        except OSError as exc:
            raise IOFailure(f"cannot write {path}: {exc.strerror}") from exc
        return self._record(name)

    def json(self, name, obj):
        payload = {"schema": SCHEMA, **obj}
        return self.text(name, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")

    def table(self, stem, rows, fmt):
        if fmt == "json":
            return self.json(stem + ".json", {"rows": rows})
        if not rows:
            return self.text(stem + ".csv", "\n")
        cols = list(rows[0])
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join(_cell(r[c]) for c in cols))
        return self.text(stem + ".csv", "\n".join(lines) + "\n")

    def qmat(self, name, M):
        path = os.path.join(self.dir, name)
        write_qmat(path, M)
        return self._record(name)


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v) or np.isinf(v):
            return str(v)
        return v
    return obj


def _seed(args):
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


# --- commands -------------------------------------------------------------------------

def cmd_factor(args, out: Outputs):
    A = read_qmat(args.input)
    kind = args.kind
    report = {"kind": kind}
    if kind == "eig":
        r = eig_hermitian(A)
        out.qmat("Q.qmat", r.Q)
        report.update(residual=r.residual, spectrum=r.eigenvalues, unitarity_defect=unitarity_defect(r.Q))
    elif kind == "svd":
        r = svd(A)
        out.qmat("U.qmat", r.U)
        out.qmat("V.qmat", r.V)
        report.update(residual=r.residual, spectrum=r.sigma,
                      unitarity_defect=max(unitarity_defect(r.U), unitarity_defect(r.V)))
    elif kind == "takagi2":
        r = takagi_2x2_symmetric(A)
        out.qmat("U.qmat", r.U)
        report.update(residual=r.residual, spectrum=r.sigma, unitarity_defect=unitarity_defect(r.U))
    else:
        r = alpha_hermitian_factor(A, args.axis)
        out.qmat("Q.qmat", r.Q)
        report.update(residual=r.residual, spectrum=r.eigenvalues, axis=args.axis,
                      unitarity_defect=unitarity_defect(r.Q))
    out.json("report.json", report)
    return report


def _scatter_rows(s, prefix):
    arr = s.data.data
    rows = []
    for n in range(arr.shape[1]):
        row = {"n": n}
        for l in range(arr.shape[0]):
            for c, name in enumerate("abcd"):
                row[f"{prefix}{l}_{name}"] = float(arr[l, n, c])
        rows.append(row)
    return rows


def cmd_decorrelate(args, out: Outputs):
    seed = _seed(args)
    res = decorrelate_experiment(args.channels, args.n_samples, args.axis, args.var1, args.var2,
                                 args.source, seed)
    out.json("report.json", res["summary"])
    out.qmat("mixing.qmat", res["mixing"])
    out.qmat("qut.qmat", res["transform"].Q)
    n_scatter = min(args.scatter, res["x"].N)
    idx = slice(0, n_scatter)
    xs = SampleSet(QuatMatrix(res["x"].data.data[:, idx]))
    ys = SampleSet(QuatMatrix(res["y"].data.data[:, idx]))
    out.table("scatter_before", _scatter_rows(xs, "x"), args.format)
    out.table("scatter_after", _scatter_rows(ys, "y"), args.format)
    return res["summary"]


def cmd_qaut_sweep(args, out: Outputs):
    seed = _seed(args)
    rhos = parse_grid(args.rho_grid)
    sizes = parse_grid(args.size_grid, integer=True)
    if any(not 0 < r <= 1 for r in rhos):
        raise DomainError("rho grid values must lie in (0, 1]")
    sw = qaut_sweep(args.mode, rhos, sizes, args.trials, args.n_samples, seed)
    out.table("sweep", sw.rows(), args.format)
    summary = {
        "mode": sw.mode, "trials": sw.trials, "n_samples": sw.n_samples, "seed": sw.seed,
        "rhos": list(sw.rhos), "sizes": list(sw.sizes),
        "mean_error_pct": sw.mean, "sem_pct": sw.sem,
        "trend": trend_report(sw),
    }
    out.json("report.json", summary)
    return summary


def cmd_rank_reduce(args, out: Outputs):
    if args.input:
        s = ingest_csv(args.input, args.layout)
        X = s.data
    else:
        seed = _seed(args)
        X = near_rank_one(args.n_samples, args.noise_ratio, seed).data
    if (args.rank is None) == (args.threshold is None):
        raise UsageError("give exactly one of --rank or --threshold")
    res = rank_reduce_experiment(X, P=args.rank, threshold=args.threshold)
    out.table("variance", res["table"], args.format)
    summary = {
        "kept": res["result"].kept,
        "variates": X.rows,
        "reconstruction_error": res["reconstruction_error"],
        "variance_ratios": res["result"].variance_ratios,
    }
    out.json("report.json", summary)
    return summary


def _three_phase_config(args):
    fault = None
    if args.fault:
        amps = tuple(float(v) for v in args.fault_amplitudes.split(","))
        if len(amps) != 3:
            raise UsageError("--fault-amplitudes needs three comma-separated values")
        fault = FaultSpec(args.fault_start, args.fault_duration, amps)
    n = int(round(args.duration / args.dt))
    return ThreePhaseConfig(f=args.frequency, dt=args.dt, n_samples=n, fault=fault,
                            noise_std=args.noise_std, seed=args.seed or 0)


def cmd_imbalance(args, out: Outputs):
    if args.noise_std > 0:
        _seed(args)
    cfg = _three_phase_config(args)
    res = imbalance_experiment(cfg, args.window, args.hop, args.embed, args.kappa, args.baseline)
    tr = res["trace"]
    rows = []
    for w in range(len(tr.times)):
        rows.append({
            "time_s": float(tr.times[w]),
            "err_i_pct": float(tr.errors[w, 0]),
            "err_j_pct": float(tr.errors[w, 1]),
            "err_k_pct": float(tr.errors[w, 2]),
            "spread_pct": float(tr.spread[w]),
            "flag": bool(tr.flags[w]),
        })
    out.table("imbalance", rows, args.format)
    flagged = tr.flagged_times()
    summary = {
        "windows": len(tr.times),
        "flags": int(tr.flags.sum()),
        "first_flag_s": float(flagged[0]) if len(flagged) else None,
        "last_flag_s": float(flagged[-1]) if len(flagged) else None,
        "baseline_spread_pct": tr.baseline,
        "threshold_pct": tr.threshold,
        "detector": tr.meta,
    }
    out.json("report.json", summary)
    return summary


def _generated_sample(args):
    seed = _seed(args)
    if args.generator == "h-proper":
        return gen_h_proper(args.channels, args.n_samples, 1.0, seed)
    if args.generator == "c-alpha":
        return gen_c_alpha_improper(args.channels, args.n_samples, args.axis, args.var1, args.var2, seed)
    return gen_rho_correlated(args.channels, args.n_samples, args.rho, seed)


def cmd_check(args, out: Outputs):
    s = ingest_csv(args.input, args.layout) if args.input else _generated_sample(args)
    rep = check_report(s)
    out.json("report.json", rep)
    return rep


COMMANDS = {
    "factor": cmd_factor,
    "decorrelate": cmd_decorrelate,
    "qaut-sweep": cmd_qaut_sweep,
    "rank-reduce": cmd_rank_reduce,
    "imbalance": cmd_imbalance,
    "check": cmd_check,
}


# --- parser -----------------------------------------------------------------------------

def _common(p, seeded=True, fmt=True):
    p.add_argument("--out", default="quatstat-out", help="output directory")
    if seeded:
        p.add_argument("--seed", type=int, default=None, help="random seed (printed when omitted)")
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quatstat", description="Quaternion widely-linear statistics toolkit")
    parser.add_argument("--version", action="version", version=f"quatstat {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("factor", help="factorise a QMAT matrix")
    p.add_argument("input")
    p.add_argument("--kind", choices=("eig", "svd", "takagi2", "alpha-factor"), required=True)
    p.add_argument("--axis", choices=("i", "j", "k"), default="i")
    _common(p, seeded=False, fmt=False)

    p = sub.add_parser("decorrelate", help="QUT decorrelation of mixed improper channels")
    p.add_argument("--source", choices=("c-alpha", "h-proper"), default="c-alpha")
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--n-samples", type=int, default=10_000)
    p.add_argument("--axis", choices=("i", "j", "k"), default="k")
    p.add_argument("--var1", type=float, default=1.0)
    p.add_argument("--var2", type=float, default=4.0)
    p.add_argument("--scatter", type=int, default=1000, help="samples written to the scatter tables")
    _common(p)

    p = sub.add_parser("qaut-sweep", help="QAUT squared diagonal error over a (rho, size) grid")
    p.add_argument("--mode", choices=("univariate", "multivariate"), default="univariate")
    p.add_argument("--rho-grid", default="0.5:1:0.05")
    p.add_argument("--size-grid", default="5:20:5", help="L (univariate) or M (multivariate) grid")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--n-samples", type=int, default=10_000)
    _common(p)

    p = sub.add_parser("rank-reduce", help="QAUT rank reduction of CSV or synthetic data")
    p.add_argument("--input", help="CSV file; rows are samples, one channel per variate")
    p.add_argument("--layout", choices=LAYOUTS, default="per-channel-quads")
    p.add_argument("--rank", type=int, help="number of variables kept (P)")
    p.add_argument("--threshold", type=float, help="cumulative variance threshold in (0, 1]")
    p.add_argument("--n-samples", type=int, default=2000)
    p.add_argument("--noise-ratio", type=float, default=1e-4)
    _common(p)

    p = sub.add_parser("imbalance", help="three-phase imbalance detection")
    p.add_argument("--duration", type=float, default=1.0, help="seconds")
    p.add_argument("--dt", type=float, default=1.0 / 5000.0)
    p.add_argument("--frequency", type=float, default=50.0)
    p.add_argument("--fault", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--fault-start", type=float, default=0.25)
    p.add_argument("--fault-duration", type=float, default=0.25)
    p.add_argument("--fault-amplitudes", default="0.5,1.3,1.15")
    p.add_argument("--noise-std", type=float, default=0.0)
    p.add_argument("--window", type=float, default=0.04)
    p.add_argument("--hop", type=float, default=None)
    p.add_argument("--embed", type=int, default=4)
    p.add_argument("--kappa", type=float, default=5.0)
    p.add_argument("--baseline", choices=("reference", "leading"), default="reference")
    _common(p)

    p = sub.add_parser("check", help="linkage identity, properness and obstruction report")
    p.add_argument("--input", help="CSV file")
    p.add_argument("--layout", choices=LAYOUTS, default="per-channel-quads")
    p.add_argument("--generator", choices=("h-proper", "c-alpha", "rho"), default="h-proper")
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--n-samples", type=int, default=10_000)
    p.add_argument("--axis", choices=("i", "j", "k"), default="k")
    p.add_argument("--var1", type=float, default=1.0)
    p.add_argument("--var2", type=float, default=4.0)
    p.add_argument("--rho", type=float, default=0.5)
    _common(p, fmt=False)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="output directory (default: the manifest's own)")
    return parser


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "command")}


def _utc_now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def execute(args) -> int:
    started = _utc_now()
    out = Outputs(args.out)
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        COMMANDS[args.command](args, out)
    manifest = {
        "schema": SCHEMA,
        "command": args.command,
        "config": _config(args),
        "version": __version__,
        "started": started,
        "finished": _utc_now(),
        "outputs": dict(sorted(out.files.items())),
    }
    path = os.path.join(args.out, "manifest.json")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror}") from exc
    return EXIT_OK


def _replay(args, parser) -> argparse.Namespace:
    try:
        with open(args.manifest, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise IOFailure(f"cannot read {args.manifest}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"{args.manifest} is not valid JSON: {exc}") from exc
    if manifest.get("schema") != SCHEMA or manifest.get("command") not in COMMANDS:
        raise DomainError(f"{args.manifest} is not a quatstat manifest")
    ns = parser.parse_args([manifest["command"]] + _required_positionals(manifest))
    for key, value in manifest["config"].items():
        setattr(ns, key, value)
    ns.out = args.out or os.path.dirname(os.path.abspath(args.manifest))
    return ns


def _required_positionals(manifest):
    if manifest["command"] == "factor":
        cfg = manifest["config"]
        return [cfg["input"], "--kind", cfg["kind"]]
    return []


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            args = _replay(args, parser)
        return execute(args)
    except UsageError as exc:
        print(f"quatstat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuatStatError as exc:
        print(f"quatstat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
