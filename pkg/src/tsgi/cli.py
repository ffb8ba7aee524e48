"""Command-line surface for distances, generators and experiment runners.

Exit codes: 0 success, 1 usage/config error, 2 data error.  Every
command is deterministic given --seed; when --seed is omitted it
defaults to the TSGI_SEED environment variable (then 0).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .align import cost_matrix, dtw, soft_dtw
from .barycenter import BarycenterProblem, dba_gi, soft_barycenter_gi
from .bench import (
    ROTATION_METHODS,
    TIMING_METHODS,
    forecast_study,
    rotation_study,
    timing_study,
)
from .forecast import BACKENDS
from .gi import FAMILIES, SolverConfig, dtw_gi_bcd, soft_dtw_gi_grad
from .retrieval import METHODS as RETRIEVAL_METHODS
from .retrieval import run_retrieval
from .seriesio import SeriesFormatError, read_series, write_series, write_table
from .synth import KINDS, GeneratorSpec, generate
from .transforms import AffineStiefel, ChromaTransposition, StiefelLinear


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_seed() -> int:
    try:
        return int(os.environ.get("TSGI_SEED", "0"))
    except ValueError:
        return 0


def _parse_grid(text: str) -> list[int]:
    """Comma list of ints, or 'a..b' for a doubling sweep from a to b."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if lo < 1 or hi < lo:
            raise _UsageError(f"bad range {text!r}")
        out = []
        v = lo
        while v <= hi:
            out.append(v)
            v *= 2
        return out
    return [int(v) for v in text.split(",") if v]


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _build_cfg(args) -> SolverConfig:
    try:
        return SolverConfig(
            max_iter=getattr(args, "max_iter", 5000),
            patience=getattr(args, "patience", 100),
            step_size=getattr(args, "step_size", 1e-2),
            gamma=getattr(args, "gamma", 1.0),
            tolerance=getattr(args, "tolerance", 1e-9),
            restarts=getattr(args, "restarts", 1),
            seed=args.seed,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _transform_dump(f) -> dict:
    if f is None:
        return {"kind": "identity"}
    if isinstance(f, StiefelLinear):
        return {"kind": "stiefel", "P": f.P.tolist()}
    if isinstance(f, AffineStiefel):
        return {"kind": "affine_stiefel", "P": f.P.tolist(), "b": f.b.tolist()}
    if isinstance(f, ChromaTransposition):
        return {"kind": "transposition", "k": f.k}
    raise ValueError(f"cannot serialize transform {f!r}")


def _cmd_dist(args) -> int:
    cfg = _build_cfg(args)
    if cfg.gamma <= 0 and args.method in ("softdtw", "softdtw-gi"):
        raise _UsageError("--gamma must be > 0 for soft methods")
    x = read_series(args.file_x)
    y = read_series(args.file_y)
    transform = None
    path = None
    if args.method == "dtw":
        cost, path = dtw(cost_matrix(x, y))
    elif args.method == "softdtw":
        cost = soft_dtw(cost_matrix(x, y), cfg.gamma)
    elif args.method == "dtw-gi":
        res = dtw_gi_bcd(x, y, args.family, cfg)
        cost, transform, path = res.cost, res.transform, res.path
    else:
        if args.family == "transposition":
            raise _UsageError("softdtw-gi supports stiefel or affine_stiefel families")
        res = soft_dtw_gi_grad(x, y, args.family, cfg, final_path=bool(args.out))
        cost, transform, path = res.cost, res.transform, res.path
    print(f"{cost:.17g}")
    if args.out:
        dump = {
            "method": args.method,
            "cost": cost,
            "transform": _transform_dump(transform),
            "path": None if path is None else [[int(i), int(j)] for i, j in path],
        }
        Path(args.out).write_text(json.dumps(dump, indent=1) + "\n")
    return 0


def _cmd_gen(args) -> int:
    try:
        spec = GeneratorSpec(
            kind=args.kind,
            length=args.length,
            dim=args.dim,
            noise_std=args.noise_std,
            theta=args.theta,
            warp_seed=args.warp_seed,
            seed=args.seed,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    write_series(args.out, generate(spec))
    return 0


def _cmd_bench_timing(args) -> int:
    cfg = _build_cfg(args)
    rows = timing_study(
        lengths=_parse_grid(args.lengths),
        dims=_parse_grid(args.dims),
        methods=[m for m in args.methods.split(",") if m],
        trials=args.trials,
        seed=args.seed,
        cfg=cfg,
    )
    write_table(args.out, rows, ["sweep", "method", "T", "p", "trial", "seconds"])
    print(f"wrote {len(rows)} timing rows to {args.out}")
    return 0


def _cmd_bench_rotation(args) -> int:
    cfg = _build_cfg(args)
    rows = rotation_study(
        trials=args.trials,
        n_angles=args.angles,
        length=args.length,
        noise_std=args.noise_std,
        methods=[m for m in args.methods.split(",") if m],
        seed=args.seed,
        cfg=cfg,
    )
    write_table(args.out, rows, ["method", "theta", "trial", "cost", "ratio_to_theta0"])
    print(f"wrote {len(rows)} rotation rows to {args.out}")
    return 0


def _cmd_barycenter(args) -> int:
    cfg = _build_cfg(args)
    inputs = [read_series(f) for f in args.inputs]
    problem = BarycenterProblem(inputs, length=args.length, dim=args.dim)
    if args.method == "dba-gi":
        result = dba_gi(problem, cfg, family="affine_stiefel")
    elif args.method == "soft-gi":
        result = soft_barycenter_gi(problem, cfg, family="affine_stiefel")
    elif args.method == "dba":
        result = dba_gi(problem, cfg, family="identity")
    else:
        result = soft_barycenter_gi(problem, cfg, family="identity")
    write_series(args.out, result.series)
    trace_out = args.trace_out or str(Path(args.out).with_suffix("")) + "_trace.csv"
    write_table(
        trace_out,
        [{"iteration": i, "loss": v} for i, v in enumerate(result.loss_trace)],
        ["iteration", "loss"],
    )
    print(f"{result.loss:.17g}")
    print(f"wrote barycenter to {args.out} and loss trace to {trace_out}")
    return 0


def _cmd_forecast_study(args) -> int:
    cfg = _build_cfg(args)
    lambdas = _parse_floats(args.lambda_grid)
    if any(l <= 0 for l in lambdas):
        raise _UsageError("lambda values must be > 0")
    rows = forecast_study(
        lambda_grid=lambdas,
        backends=[b for b in args.backends.split(",") if b],
        trials=args.trials,
        n_train=args.n_train,
        n_test=args.n_test,
        length=args.length,
        split=args.split,
        gamma=cfg.gamma,
        seed=args.seed,
        cfg=cfg,
    )
    write_table(args.out, rows, ["backend", "lambda", "trial", "l2_error"])
    print(f"wrote {len(rows)} forecast rows to {args.out}")
    return 0


def _load_dir(directory: str) -> list[tuple[str, np.ndarray]]:
    root = Path(directory)
    if not root.is_dir():
        raise SeriesFormatError(f"{directory}: not a directory")
    items = []
    for path in sorted(root.iterdir()):
        if not path.is_file():
            continue
        try:
            items.append((path.name, read_series(path)))
        except SeriesFormatError as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
    if not items:
        raise SeriesFormatError(f"{directory}: no readable series files")
    return items


def _cmd_retrieval(args) -> int:
    cfg = _build_cfg(args)
    queries = _load_dir(args.query_dir)
    corpus = _load_dir(args.corpus_dir)
    summary = run_retrieval(queries, corpus, args.method, cfg)
    recall_cols = [f"recall_at_{k}" for k in sorted(summary["recall"])]
    rows = []
    for (name, _), rank in zip(queries, summary["ranks"]):
        row = {"query": name, "rank_of_true_match": rank, "mr1": summary["mr1"]}
        for k in sorted(summary["recall"]):
            row[f"recall_at_{k}"] = summary["recall"][k]
        rows.append(row)
    write_table(args.out, rows, ["query", "rank_of_true_match", "mr1"] + recall_cols)
    print(f"MR1 {summary['mr1']:.17g}")
    print(f"wrote {len(rows)} retrieval rows to {args.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="tsgi",
        description="Compare, average and forecast multivariate time series "
                    "under joint time warping and global feature transforms.",
        epilog="Seeds default to the TSGI_SEED environment variable, then 0.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    seed_default = _default_seed()

    def add_seed(p):
        p.add_argument("--seed", type=int, default=seed_default)

    p = sub.add_parser("dist", help="distance between two series files")
    p.add_argument("file_x")
    p.add_argument("file_y")
    p.add_argument("--method", choices=["dtw", "softdtw", "dtw-gi", "softdtw-gi"], default="dtw")
    p.add_argument("--family", choices=list(FAMILIES), default="affine_stiefel")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=5000)
    p.add_argument("--out", help="write a JSON dump (cost, transform, path)")
    add_seed(p)
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("gen", help="generate a synthetic series file")
    p.add_argument("--kind", choices=list(KINDS), required=True)
    p.add_argument("--length", type=int, default=64)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--warp-seed", dest="warp_seed", type=int, default=None)
    p.add_argument("--out", required=True)
    add_seed(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench-timing", help="wall-time scaling study")
    p.add_argument("--lengths", default="8..1024")
    p.add_argument("--dims", default="2..128")
    p.add_argument("--methods", default=",".join(TIMING_METHODS))
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=5000)
    p.add_argument("--patience", type=int, default=100)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--out", required=True)
    add_seed(p)
    p.set_defaults(func=_cmd_bench_timing)

    p = sub.add_parser("bench-rotation", help="rotation-invariance study")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--angles", type=int, default=16)
    p.add_argument("--length", type=int, default=48)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=0.05)
    p.add_argument("--methods", default=",".join(ROTATION_METHODS))
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--out", required=True)
    add_seed(p)
    p.set_defaults(func=_cmd_bench_rotation)

    p = sub.add_parser("barycenter", help="barycenter of a set of series files")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--method", choices=["dba-gi", "soft-gi", "dba", "softdtw"], default="dba-gi")
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=1000)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--trace-out", dest="trace_out", default=None)
    add_seed(p)
    p.set_defaults(func=_cmd_barycenter)

    p = sub.add_parser("forecast-study", help="forecast-error study over a lambda grid")
    p.add_argument("--lambda-grid", dest="lambda_grid", default="0.001,0.01,0.1,1.0")
    p.add_argument("--backends", default=",".join(BACKENDS))
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--n-train", dest="n_train", type=int, default=12)
    p.add_argument("--n-test", dest="n_test", type=int, default=2)
    p.add_argument("--length", type=int, default=48)
    p.add_argument("--split", type=int, default=24)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=500)
    p.add_argument("--out", required=True)
    add_seed(p)
    p.set_defaults(func=_cmd_forecast_study)

    p = sub.add_parser("retrieval", help="query-by-example retrieval over feature dirs")
    p.add_argument("--query-dir", dest="query_dir", required=True)
    p.add_argument("--corpus-dir", dest="corpus_dir", required=True)
    p.add_argument("--method", choices=list(RETRIEVAL_METHODS), default="dtw-gi-oti")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--out", required=True)
    add_seed(p)
    p.set_defaults(func=_cmd_retrieval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"tsgi: error: {exc}", file=sys.stderr)
        return 1
    except (SeriesFormatError, FileNotFoundError) as exc:
        print(f"tsgi: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"tsgi: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
