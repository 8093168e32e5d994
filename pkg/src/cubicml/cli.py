"""Command-line entry point: ``cubicml <subcommand> ...``.

Exit codes: 0 success, 2 usage or configuration error, 3 data or degeneracy
error (empty history, degenerate split, constant metrics, ...).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

import yaml

from .evaluate import SPLITS, PredictorSpec, fit_eval, make_split, split_curve
from .loop import DegenerateHistory, LoopConfig, derive_seed, loop_report, run_loop
from .metrics import CorrelationError
from .predictor.gbdt import GbdtConfig
from .predictor.mlp import DegenerateTargets, MlpConfig
from .resources import builtin_params, builtin_spaces, params_path, space_path
from .searcher import SearcherConfig
from .sim import SIMULATORS, OracleError, generate_dataset, make_executor
from .sim.dataset import TIMESTAMP_POLICIES
from .space import SpaceError, load_space
from .store import JobRecord, JobStore, RecordError, SplitError, completed_only

log = logging.getLogger("cubicml")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3

FORMATS = """\
files:
  *.space          YAML: name, version, dimensions (name, kind, values | min/max/step)
  *.params         YAML: simulator constants; keys match the simulator's params class
  manifest         YAML: space, simulator, params, seed, out_dir, loop: {bootstrap_budget,
                   rounds, backend, parallel, searcher: {...}, mlp: {...}, gbdt: {...}}
  history.jsonl    one job per line: config, status, metric, timestamp, scale, round, predicted
  frontier.csv     launch_index, round, status, actual_metric, frontier
  round_corr.csv   round, kendall, pearson, spearman, n, launched, failed, best
  corr_report.csv  split, backend, n_train, n_valid, kendall, pearson, spearman
  predictions.csv  predicted, actual, timestamp, scale
  learning_curve.csv  size, then <metric>_mean, <metric>_std, <metric>_lo, <metric>_hi
                   for kendall, pearson, spearman (lo/hi = mean -/+ 2 std)
Output directory defaults to $CUBIC_OUT_DIR, else ./cubic_out.
"""


class NoCompletedJobs(ValueError):
    pass


DATA_ERRORS = (
    NoCompletedJobs, SplitError, DegenerateHistory, DegenerateTargets, CorrelationError, OracleError, RecordError,
)


def _pick(cls, doc: dict | None):
    doc = dict(doc or {})
    names = {f.name for f in fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ValueError(f"{cls.__name__}: unknown keys {sorted(unknown)}")
    return cls(**doc)


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("CUBIC_OUT_DIR") or "cubic_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _load_history(path: str) -> list[JobRecord]:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"history file not found: {p}")
    return JobStore(p).load()


# -- reporting -----------------------------------------------------------------


def write_reports(records: list[JobRecord], out: Path, normalize: float = 1.0) -> dict:
    """frontier.csv, round_corr.csv and best_config.json from stored records alone."""
    if not completed_only(records):
        raise NoCompletedJobs("no completed jobs")
    rep = loop_report(records)
    rows, best = [], None
    for i, r in enumerate(records):
        if r.completed:
            best = r.metric if best is None else max(best, r.metric)
        rows.append([
            i, r.round, r.status,
            _fmt(r.metric / normalize if r.completed else None),
            _fmt(None if best is None else best / normalize),
        ])
    _write_csv(out / "frontier.csv", ["launch_index", "round", "status", "actual_metric", "frontier"], rows)
    corr_rows = []
    for rr in rep.rounds:
        c = rr.correlation
        corr_rows.append([
            rr.label, _fmt(c and c.kendall), _fmt(c and c.pearson), _fmt(c and c.spearman),
            c.n if c else 0, len(rr.launched), rr.n_failed, _fmt(None if rr.best is None else rr.best / normalize),
        ])
    _write_csv(
        out / "round_corr.csv",
        ["round", "kendall", "pearson", "spearman", "n", "launched", "failed", "best"],
        corr_rows,
    )
    best_doc = {"metric": rep.best_metric, "normalized_metric": rep.best_metric / normalize, "config": rep.best_config.as_dict()}
    (out / "best_config.json").write_text(json.dumps(best_doc, indent=2, sort_keys=True, default=str) + "\n")
    return best_doc


# -- subcommands -----------------------------------------------------------------


def cmd_search(args) -> int:
    manifest = {}
    if args.manifest:
        mpath = Path(args.manifest)
        if not mpath.is_file():
            raise FileNotFoundError(f"manifest not found: {mpath}")
        manifest = yaml.safe_load(mpath.read_text()) or {}
        if not isinstance(manifest, dict):
            raise ValueError(f"{mpath}: manifest must be a mapping")
    space_name = args.space or manifest.get("space")
    sim_name = args.sim or manifest.get("simulator")
    if not space_name or not sim_name:
        raise ValueError("search needs a space and a simulator (flags or manifest)")
    params = args.params or manifest.get("params")
    seed = args.seed if args.seed is not None else int(manifest.get("seed", 0))
    if args.out is None and manifest.get("out_dir"):
        args.out = manifest["out_dir"]

    loop_doc = dict(manifest.get("loop") or {})
    searcher = _pick(SearcherConfig, loop_doc.pop("searcher", None))
    mlp = _pick(MlpConfig, loop_doc.pop("mlp", None))
    gbdt = _pick(GbdtConfig, loop_doc.pop("gbdt", None))
    overrides = {
        "bootstrap_budget": args.bootstrap, "rounds": args.rounds, "backend": args.backend, "parallel": args.parallel,
    }
    loop_doc.update({k: v for k, v in overrides.items() if v is not None})
    if args.top_k is not None:
        searcher.top_k = args.top_k
    cfg = _pick(LoopConfig, {**loop_doc, "searcher": searcher, "mlp": mlp, "gbdt": gbdt, "seed": seed})

    space = load_space(space_path(space_name))
    executor = make_executor(sim_name, params_path(params) if params else None)
    out = _out_dir(args)
    hist = out / "history.jsonl"
    if hist.exists():
        log.info("replacing existing %s", hist)
        hist.unlink()
    store = JobStore(hist)
    rep = run_loop(space, executor, store, cfg)
    best = write_reports(store.load(), out, args.normalize)
    print(f"jobs={rep.jobs} fits={rep.predictor_fits} best={best['metric']!r} -> {out}")
    return EXIT_OK


def cmd_report(args) -> int:
    records = _load_history(args.history)
    best = write_reports(records, _out_dir(args), args.normalize)
    print(json.dumps(best, sort_keys=True, default=str))
    return EXIT_OK


def _spec(args) -> PredictorSpec:
    return PredictorSpec(args.backend, gbdt=GbdtConfig(log_target=args.target == "log"))


def cmd_fit_eval(args) -> int:
    space = load_space(space_path(args.space))
    records = _load_history(args.history)
    split = make_split(
        records, args.split, args.valid_fraction, args.train_max_scale, args.valid_min_scale,
        derive_seed(args.seed, "split"),
    )
    res = fit_eval(space, split, _spec(args), derive_seed(args.seed, "predictor"))
    out = _out_dir(args)
    _write_csv(
        out / "predictions.csv",
        ["predicted", "actual", "timestamp", "scale"],
        [[_fmt(p), _fmt(a), _fmt(r.timestamp), r.scale] for p, a, r in zip(res.predicted, res.actual, split.valid)],
    )
    c = res.report
    _write_csv(
        out / "corr_report.csv",
        ["split", "backend", "n_train", "n_valid", "kendall", "pearson", "spearman"],
        [[args.split, args.backend, len(split.train), len(split.valid), _fmt(c.kendall), _fmt(c.pearson), _fmt(c.spearman)]],
    )
    print(f"{args.split}: n_train={len(split.train)} n_valid={len(split.valid)} "
          f"kendall={c.kendall:.4f} pearson={c.pearson:.4f} spearman={c.spearman:.4f}")
    return EXIT_OK


def cmd_gen_dataset(args) -> int:
    space = load_space(space_path(args.space))
    executor = make_executor(args.sim, params_path(args.params) if args.params else None)
    records = generate_dataset(
        space, executor, args.count, derive_seed(args.seed, "dataset"), args.timestamps, args.failure_rate,
    )
    path = Path(args.output) if args.output else _out_dir(args) / "dataset.jsonl"
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists():
        path.unlink()
    JobStore(path).extend(records)
    print(f"{len(records)} records -> {path}")
    return EXIT_OK


def cmd_curve(args) -> int:
    space = load_space(space_path(args.space))
    records = _load_history(args.history)
    split = make_split(records, "random", args.valid_fraction, seed=derive_seed(args.seed, "split"))
    sizes = sorted({int(s) for s in args.sizes.split(",") if s.strip()})
    points = split_curve(space, split, sizes, _spec(args), args.perturbations, derive_seed(args.seed, "curve"))
    metrics = ("kendall", "pearson", "spearman")
    header = ["size"] + [f"{m}_{k}" for m in metrics for k in ("mean", "std", "lo", "hi")]
    rows = []
    for p in points:
        row = [p.size]
        for m in metrics:
            row += [_fmt(p.mean[m]), _fmt(p.std[m]), _fmt(p.mean[m] - 2 * p.std[m]), _fmt(p.mean[m] + 2 * p.std[m])]
        rows.append(row)
    out = _out_dir(args)
    _write_csv(out / "learning_curve.csv", header, rows)
    for p in points:
        print(f"size={p.size} spearman={p.mean['spearman']:.4f} +/- {2 * p.std['spearman']:.4f}")
    return EXIT_OK


def cmd_space_info(args) -> int:
    space = load_space(space_path(args.space))
    print(f"space {space.name} v{space.version}: {len(space)} dimensions")
    for d in space.dimensions:
        vals = ", ".join(str(v) for v in d.values) if d.size <= 6 else f"{d.values[0]} .. {d.values[-1]}"
        print(f"  {d.name:<28} {d.kind:<12} {d.size:>4}  [{vals}]")
    print(f"cardinality: {space.cardinality()}")
    print(f"one-hot width: {space.onehot_width}  mixed width: {len(space.mixed_layout)}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    epilog = (
        FORMATS + f"Built-in spaces: {', '.join(builtin_spaces())}. "
        f"Built-in simulator params: {', '.join(builtin_params())}.\n"
    )
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(
        prog="cubicml", description="Predictor-guided search over ML co-design configurations.",
        epilog=epilog, formatter_class=fmt,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (-vv for debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", help="output directory (default $CUBIC_OUT_DIR or ./cubic_out)")
        if seed:
            p.add_argument("--seed", type=int, default=0, help="global seed; component seeds derive from it")

    def predictor_flags(p):
        p.add_argument("--backend", choices=("gbdt", "mlp"), default="gbdt")
        p.add_argument("--target", choices=("log", "raw"), default="log",
                       help="GBDT target: fit log(metric) and exponentiate, or the raw metric")

    p = sub.add_parser("search", help="run bootstrap plus predictor-guided rounds", epilog=epilog, formatter_class=fmt)
    p.add_argument("--manifest", help="YAML run manifest; flags below override it")
    p.add_argument("--space", help="space file or built-in name")
    p.add_argument("--sim", choices=sorted(SIMULATORS), help="simulated executor")
    p.add_argument("--params", help="simulator params file or built-in name")
    p.add_argument("--bootstrap", type=int, help="random bootstrap jobs")
    p.add_argument("--rounds", type=int, help="predictor-guided rounds")
    p.add_argument("--top-k", type=int, help="jobs launched per round")
    p.add_argument("--backend", choices=("mlp", "gbdt"), help="predictor used by the loop")
    p.add_argument("--parallel", type=int, help="concurrent simulated jobs")
    p.add_argument("--normalize", type=_positive_float, default=1.0, help="divide reported metrics by this constant")
    p.add_argument("--out", help="output directory (default manifest out_dir, $CUBIC_OUT_DIR or ./cubic_out)")
    p.add_argument("--seed", type=int, default=None, help="global seed (default manifest seed or 0)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fit-eval", help="fit a predictor on a split of a history and score it", epilog=epilog,
                       formatter_class=fmt)
    p.add_argument("--history", required=True, help="history/dataset .jsonl")
    p.add_argument("--space", default="llm", help="space the history was drawn from")
    p.add_argument("--split", choices=SPLITS, default="random")
    p.add_argument("--valid-fraction", type=float, default=145 / 568, help="random/temporal validation share")
    p.add_argument("--train-max-scale", type=int, default=3072, help="scale split: largest training scale")
    p.add_argument("--valid-min-scale", type=int, default=4096, help="scale split: smallest validation scale")
    predictor_flags(p)
    common(p)
    p.set_defaults(func=cmd_fit_eval)

    p = sub.add_parser("gen-dataset", help="generate a synthetic job history", epilog=epilog, formatter_class=fmt)
    p.add_argument("--space", default="llm")
    p.add_argument("--sim", choices=sorted(SIMULATORS), default="llm")
    p.add_argument("--params", help="simulator params file or built-in name")
    p.add_argument("--count", type=int, default=568)
    p.add_argument("--timestamps", choices=TIMESTAMP_POLICIES, default="scale-correlated")
    p.add_argument("--failure-rate", type=float, default=0.0, help="share of failed jobs to include")
    p.add_argument("--output", help="output .jsonl (default <out>/dataset.jsonl)")
    common(p)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("curve", help="rank correlation versus training-set size", epilog=epilog, formatter_class=fmt)
    p.add_argument("--history", required=True)
    p.add_argument("--space", default="llm")
    p.add_argument("--sizes", default="25,50,100,150,200,300,423", help="comma-separated training sizes")
    p.add_argument("--perturbations", type=int, default=10)
    p.add_argument("--valid-fraction", type=float, default=145 / 568)
    predictor_flags(p)
    common(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("report", help="rebuild frontier and round reports from a history", epilog=epilog,
                       formatter_class=fmt)
    p.add_argument("--history", required=True)
    p.add_argument("--normalize", type=_positive_float, default=1.0, help="divide reported metrics by this constant")
    common(p, seed=False)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("space-info", help="print dimensions and cardinality of a space")
    p.add_argument("--space", required=True, help="space file or built-in name")
    p.set_defaults(func=cmd_space_info)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"cubicml {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, SpaceError, yaml.YAMLError, ValueError, TypeError) as exc:
        print(f"cubicml {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
