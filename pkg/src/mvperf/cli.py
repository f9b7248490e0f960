"""Command-line entry point: ``mvperf {gen,train,predict,eval,verify}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import measures as M
from .data import load_manifest, write_dataset
from .errors import DataError, DimensionMismatch, MeasureError, SearchError, SolverError
from .inference import check_weights, predict
from .oracles import SUITES, run_suite
from .synthetic import GenSpec, generate
from .trainer import TrainConfig, evaluate, history_csv, load_model, save_model, train

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIMS = 4
EXIT_SOLVER = 5
EXIT_MEASURE = 6

EXIT_HELP = """\
exit status:
  0  success
  1  a verification suite failed, or an unexpected error
  2  malformed or unknown flags
  3  missing, unreadable or malformed data/model file
  4  model and data dimensions disagree
  5  the dual QP solver did not converge
  6  measure cannot be evaluated or has no admissible tuple

environment:
  MVPERF_THREADS  cap on BLAS threads (0 or unset: library default)
"""


def _measure(text: str) -> M.Measure:
    try:
        return M.parse_measure(text)
    except MeasureError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dims(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _noise(text: str):
    vals = [float(t) for t in text.split(",")]
    return vals[0] if len(vals) == 1 else vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mvperf",
        description="Multi-view linear predictors trained for multivariate performance measures.",
        epilog=EXIT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic multi-view dataset", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--stem", default="data", help="file name stem (default: data)")
    g.add_argument("-n", type=int, default=60)
    g.add_argument("--dims", type=_dims, default=[5, 4], help="per-view dimensions, e.g. 5,4")
    g.add_argument("--balance", type=float, default=0.5)
    g.add_argument("--margin", type=float, default=2.0)
    g.add_argument("--noise", type=_noise, default=0.0, help="one value or one per view")
    g.add_argument("--correlation", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("train", help="train a model", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    t.add_argument("--data", required=True, help="dataset manifest (JSON)")
    t.add_argument("--measure", type=_measure, default=M.ERROR_RATE, help="err|f1|prbep|prec@K|rec@K")
    t.add_argument("--c1", type=float, default=1.0)
    t.add_argument("--c2", type=float, default=0.1)
    t.add_argument("--max-iter", type=int, default=100)
    t.add_argument("--eps", type=float, default=1e-4)
    t.add_argument("--update", choices=("per_view", "joint"), default="per_view")
    t.add_argument("--out", required=True, help="model file to write")
    t.add_argument("--log", help="iteration log (default: MODEL.log.csv)")

    pr = sub.add_parser("predict", help="write one +1/-1 per line", epilog=EXIT_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    pr.add_argument("--data", required=True)
    pr.add_argument("--model", required=True)
    pr.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="print contingency table and loss", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    e.add_argument("--data", required=True)
    e.add_argument("--model", required=True)
    e.add_argument("--measure", type=_measure, help="defaults to the training measure")
    e.add_argument("--json", action="store_true", help="machine-readable output")

    v = sub.add_parser("verify", help="run brute-force oracle suites", epilog=EXIT_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    v.add_argument("--suite", default="all", choices=SUITES + ("all",))
    v.add_argument("--seed", type=int)
    v.add_argument("--update", choices=("per_view", "joint"), default="per_view")
    return p


def _load_checked(data, model_path):
    ds = load_manifest(data)
    model = load_model(model_path)
    if model.dims != ds.dims:
        raise DimensionMismatch(f"model dims {model.dims} do not match data dims {ds.dims}")
    check_weights(ds, model.weights)
    return ds, model


def cmd_gen(args) -> int:
    spec = GenSpec(n=args.n, m=len(args.dims), dims=args.dims, balance=args.balance, margin=args.margin,
                   noise=args.noise, correlation=args.correlation, seed=args.seed)
    try:
        ds = generate(spec)
    except ValueError as exc:
        print(f"mvperf gen: {exc}", file=sys.stderr)
        return EXIT_USAGE
    manifest = write_dataset(ds, args.out, stem=args.stem)
    print(manifest)
    return EXIT_OK


def cmd_train(args) -> int:
    ds = load_manifest(args.data)
    cfg = TrainConfig(C1=args.c1, C2=args.c2, T=args.max_iter, epsilon=args.eps, measure=args.measure,
                      update=args.update)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"mvperf train: {exc}", file=sys.stderr)
        return EXIT_USAGE
    model, state = train(ds, cfg)
    save_model(model, args.out)
    log_path = Path(args.log) if args.log else Path(str(args.out) + ".log.csv")
    log_path.write_text(history_csv(state))
    print(f"{model.status} after {len(state.history)} iterations, xi={model.xi:.6g}")
    return EXIT_OK


def cmd_predict(args) -> int:
    ds, model = _load_checked(args.data, args.model)
    y = predict(ds, model.weights)
    Path(args.out).write_text("".join(f"{int(v):+d}\n" for v in y))
    return EXIT_OK


def cmd_eval(args) -> int:
    ds, model = _load_checked(args.data, args.model)
    rep = evaluate(ds, model, args.measure)
    measure = args.measure or model.measure
    if args.json:
        print(json.dumps({"measure": measure.name, **rep.table._asdict(), "loss": rep.loss}))
    else:
        t = rep.table
        print(f"tp={t.tp} fp={t.fp} fn={t.fn} tn={t.tn}")
        print(f"{measure.name} loss {rep.loss!r}")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in names:
        rep = run_suite(name, seed=args.seed, update=args.update)
        print(rep.summary(), flush=True)
        ok &= rep.ok
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"gen": cmd_gen, "train": cmd_train, "predict": cmd_predict, "eval": cmd_eval, "verify": cmd_verify}


def _thread_limit():
    raw = os.environ.get("MVPERF_THREADS", "").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        n = 0
    if n <= 0:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    limiter = _thread_limit()
    try:
        return COMMANDS[args.command](args)
    except DimensionMismatch as exc:
        print(f"mvperf {args.command}: {exc}", file=sys.stderr)
        return EXIT_DIMS
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"mvperf {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"mvperf {args.command}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (MeasureError, SearchError) as exc:
        print(f"mvperf {args.command}: {exc}", file=sys.stderr)
        return EXIT_MEASURE
    finally:
        if limiter is not None:
            limiter.unregister()


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
